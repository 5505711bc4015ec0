// Domain types shared by every part of the age-of-information game:
// per-node constants, transmission-probability profiles, per-frame
// observations, run configuration and recorded trajectories.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aoigame {

/// Additive margin that turns the strict lower bound on rho2 into a value.
inline constexpr double kRho2Margin = 0.01;

/// Constants a node chooses locally. `alpha` is always cost * rho1.
struct NodeParams {
  double cost_per_transmission = 1.0;
  double rho1 = 1.0;
  double rho2 = 1.0;
  double p_min = 0.05;
  double alpha = 1.0;

  /// Builds a parameter set, checking positivity and the p_min domain.
  static NodeParams make(double cost, double rho1, double rho2, double p_min) {
    if (!(cost > 0.0)) throw std::invalid_argument("NodeParams: cost must be positive");
    if (!(rho1 > 0.0)) throw std::invalid_argument("NodeParams: rho1 must be positive");
    if (!(rho2 > 0.0)) throw std::invalid_argument("NodeParams: rho2 must be positive");
    if (!(p_min > 0.0 && p_min < 1.0))
      throw std::invalid_argument("NodeParams: p_min must lie in (0,1)");
    return NodeParams{cost, rho1, rho2, p_min, cost * rho1};
  }
};

/// Maximizer of f(n) = (n-1)(1-p)^(n-2) over the positive reals.
inline double worst_case_roster_size(double p_global_min) {
  return 1.0 - 1.0 / std::log1p(-p_global_min);
}

/// Smallest rho2 (exclusive) for which the contraction bound stays below
/// one for every roster size, given alpha and the global probability floor.
inline double rho2_threshold(double alpha, double p_global_min) {
  const double n_star = worst_case_roster_size(p_global_min);
  const double f_max = (n_star - 1.0) * std::pow(1.0 - p_global_min, n_star - 2.0);
  return std::max(0.0, std::log(f_max / (alpha + 1.0)));
}

/// Parameter selection that certifies a unique, globally attracting
/// equilibrium for every roster size. rho1 takes its largest admissible
/// value, which makes alpha (and hence the probability trajectory)
/// independent of the node's cost.
inline NodeParams derive_params(double cost, double p_global_min) {
  if (!(p_global_min > 0.0 && p_global_min < 0.5))
    throw std::domain_error("derive_params: p_global_min must lie in (0, 0.5)");
  if (!(cost > 0.0)) throw std::invalid_argument("derive_params: cost must be positive");
  const double alpha = -std::log(2.0 * p_global_min);
  const double rho1 = alpha / cost;
  const double rho2 = rho2_threshold(alpha, p_global_min) + kRho2Margin;
  NodeParams out = NodeParams::make(cost, rho1, rho2, p_global_min);
  out.alpha = alpha;  // exact, not cost * (alpha / cost)
  return out;
}

/// Transmission probabilities of the active roster, one entry per node in
/// roster order. Entries are checked to lie in [0,1]; the tighter
/// [p_min, 1) domain depends on node parameters, see `check_profile`.
class ProbVector {
 public:
  ProbVector() = default;
  explicit ProbVector(std::vector<double> values) : values_(std::move(values)) {
    for (double p : values_)
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("ProbVector: entries must lie in [0,1]");
  }
  ProbVector(std::initializer_list<double> values) : ProbVector(std::vector<double>(values)) {}
  ProbVector(std::size_t n, double value) : ProbVector(std::vector<double>(n, value)) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(std::size_t i) const { return values_.at(i); }
  void set(std::size_t i, double p) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("ProbVector: entries must lie in [0,1]");
    values_.at(i) = p;
  }
  std::span<const double> values() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }
  void push_back(double p) {
    values_.push_back(0.0);
    set(values_.size() - 1, p);
  }
  void truncate(std::size_t n) {
    if (n < values_.size()) values_.resize(n);
  }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> values_;
};

/// Largest absolute entrywise difference.
inline double sup_distance(const ProbVector& a, const ProbVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_distance: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Throws unless every entry lies in [p_min of its node, 1).
inline void check_profile(const ProbVector& P, std::span<const NodeParams> nodes) {
  if (P.size() != nodes.size())
    throw std::invalid_argument("profile length differs from roster size");
  for (std::size_t i = 0; i < P.size(); ++i)
    if (!(P[i] >= nodes[i].p_min && P[i] < 1.0))
      throw std::invalid_argument("profile entry " + std::to_string(i) +
                                  " outside [p_min, 1)");
}

/// One node's statistics over a single frame.
struct FrameObservation {
  double avg_cost = 0.0;
  double avg_age = 0.0;
  std::size_t successes = 0;
  std::size_t transmissions = 0;

  friend bool operator==(const FrameObservation&, const FrameObservation&) = default;
};

/// Probability that node `l` is the sole transmitter of a slot.
inline double success_probability(const ProbVector& P, std::size_t l) {
  if (l >= P.size()) throw std::out_of_range("success_probability: node index");
  double nu = P[l];
  for (std::size_t k = 0; k < P.size(); ++k)
    if (k != l) nu *= 1.0 - P[k];
  return nu;
}

/// e^rho2 divided by the probability that every other node stays silent.
inline double b_factor(const ProbVector& P, std::size_t l, double rho2) {
  if (l >= P.size()) throw std::out_of_range("b_factor: node index");
  double silent = 1.0;
  for (std::size_t k = 0; k < P.size(); ++k) {
    if (k == l) continue;
    if (P[k] >= 1.0) throw std::domain_error("b_factor: another node transmits with probability 1");
    silent *= 1.0 - P[k];
  }
  return std::exp(rho2) / silent;
}

/// 1 / b, finite even when another node transmits with probability 1.
inline double inverse_b_factor(const ProbVector& P, std::size_t l, double rho2) {
  if (l >= P.size()) throw std::out_of_range("inverse_b_factor: node index");
  double silent = 1.0;
  for (std::size_t k = 0; k < P.size(); ++k)
    if (k != l) silent *= 1.0 - P[k];
  return std::exp(-rho2) * silent;
}

/// Learning-rate schedule. `kappa(t)` is queried with a node-local clock
/// t >= 1.
struct Schedule {
  enum class Kind { reciprocal, constant, table };

  Kind kind = Kind::reciprocal;
  double constant_value = 1.0;
  std::vector<double> table;
  /// Frames between restarts of every node's clock; 0 disables.
  std::size_t reinit_period = 0;
  /// Restart every node's clock whenever the roster changes.
  bool reinit_on_churn = false;

  static Schedule reciprocal() { return {}; }
  static Schedule constant(double k) {
    Schedule s;
    s.kind = Kind::constant;
    s.constant_value = k;
    s.validate();
    return s;
  }
  static Schedule from_table(std::vector<double> values) {
    Schedule s;
    s.kind = Kind::table;
    s.table = std::move(values);
    s.validate();
    return s;
  }

  void validate() const {
    auto ok = [](double k) { return k > 0.0 && k <= 1.0; };
    if (kind == Kind::constant && !ok(constant_value))
      throw std::invalid_argument("Schedule: constant rate must lie in (0,1]");
    if (kind == Kind::table) {
      if (table.empty()) throw std::invalid_argument("Schedule: empty rate table");
      for (double k : table)
        if (!ok(k)) throw std::invalid_argument("Schedule: table rates must lie in (0,1]");
    }
  }

  double kappa(std::size_t t) const {
    if (t == 0) throw std::invalid_argument("Schedule: clock starts at 1");
    switch (kind) {
      case Kind::reciprocal: return 1.0 / static_cast<double>(t);
      case Kind::constant: return constant_value;
      case Kind::table: return table[std::min(t, table.size()) - 1];
    }
    return 1.0 / static_cast<double>(t);
  }
};

/// Roster change applied before frame `frame` is simulated. Removals take
/// nodes from the roster tail, additions append to it.
struct ChurnEvent {
  std::size_t frame = 0;
  std::vector<NodeParams> added;
  std::size_t removed = 0;
};

struct GameConfig {
  std::vector<NodeParams> nodes;
  std::size_t frame_length = 10000;
  Schedule schedule;
  std::uint64_t seed = 1;
  std::vector<ChurnEvent> churn_events;
  double p_global_min = 0.05;
  /// Starting profile for the initial roster; drawn uniformly on
  /// (p_min, 1) when absent.
  std::optional<std::vector<double>> initial_probabilities;

  void validate() const {
    if (nodes.empty()) throw std::invalid_argument("GameConfig: empty roster");
    if (frame_length < 1) throw std::invalid_argument("GameConfig: frame_length must be >= 1");
    schedule.validate();
    if (initial_probabilities && initial_probabilities->size() != nodes.size())
      throw std::invalid_argument("GameConfig: initial_probabilities length mismatch");
    std::size_t n = nodes.size();
    std::size_t last = 0;
    for (const auto& ev : churn_events) {
      if (ev.frame < 1) throw std::invalid_argument("GameConfig: churn frames start at 1");
      if (ev.frame < last) throw std::invalid_argument("GameConfig: churn events out of order");
      last = ev.frame;
      // removals are applied before additions
      if (ev.removed >= n) throw std::invalid_argument("GameConfig: churn would empty the roster");
      n = n - ev.removed + ev.added.size();
    }
  }
};

/// Homogeneous roster built from the parameter-selection rule.
inline GameConfig make_uniform_config(std::size_t n, double p_global_min = 0.05,
                                      double cost = 1.0, std::uint64_t seed = 1) {
  GameConfig cfg;
  cfg.nodes.assign(n, derive_params(cost, p_global_min));
  cfg.p_global_min = p_global_min;
  cfg.seed = seed;
  return cfg;
}

/// Everything recorded about one simulated frame.
struct FrameRecord {
  std::size_t frame = 0;
  /// Profile in force during the frame; its length is the roster size.
  ProbVector probabilities;
  std::vector<FrameObservation> observations;
  /// Per-node update direction computed at the end of the frame.
  std::vector<double> subgradients;
  std::vector<double> kappas;
  /// Slots with two or more transmitters.
  std::size_t collisions = 0;

  std::size_t roster_size() const noexcept { return probabilities.size(); }
};

struct Trajectory {
  std::vector<FrameRecord> records;
  /// Profile after the last update.
  ProbVector final_probabilities;

  std::size_t frames() const noexcept { return records.size(); }
};

}  // namespace aoigame
