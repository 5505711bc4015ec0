// Slotted collision channel: one frame of m slots at a fixed profile, plus
// the closed-form large-frame limits of its statistics.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "aoigame/core_model.hpp"
#include "aoigame/rng.hpp"

namespace aoigame {

struct SlotOutcome {
  std::vector<bool> transmitted;
  std::optional<std::size_t> sole_transmitter;
  std::size_t transmitter_count = 0;
};

/// Per-node age in slots since the last reception; frames start at 0.
struct AgeState {
  std::vector<std::uint64_t> age;

  explicit AgeState(std::size_t n) : age(n, 0) {}

  // success resets to 0, every other slot adds one
  void advance(const SlotOutcome& slot) {
    for (std::size_t l = 0; l < age.size(); ++l)
      age[l] = (slot.sole_transmitter == l) ? 0 : age[l] + 1;
  }
};

/// Every node may transmit in every slot.
struct OpenAccess {
  bool eligible(std::size_t /*node*/, std::size_t /*slot*/, std::size_t /*roster*/) const {
    return true;
  }
};

/// Node l may transmit only in slots i (0-based) with i mod N == l.
struct RoundRobinAccess {
  bool eligible(std::size_t node, std::size_t slot, std::size_t roster) const {
    return slot % roster == node;
  }
};

struct NoSlotObserver {
  void operator()(std::size_t /*slot*/, const SlotOutcome&, const AgeState&) const {}
};

struct FrameResult {
  std::vector<FrameObservation> observations;
  std::size_t collisions = 0;
  std::size_t idle_slots = 0;
};

/// Simulates one frame. Each node draws from its own stream keyed by
/// (seed, frame, node), all draws of a slot happen before adjudication, and
/// a slot succeeds iff exactly one node transmits. The observer sees every
/// slot after ages are updated.
template <class Access = OpenAccess, class Observer = NoSlotObserver>
FrameResult simulate_frame(const ProbVector& P, std::span<const NodeParams> nodes,
                           std::size_t frame_length, std::uint64_t seed, std::size_t frame,
                           Access access = {}, Observer&& observer = {}) {
  const std::size_t n = P.size();
  if (n != nodes.size()) throw std::invalid_argument("simulate_frame: roster size mismatch");
  if (frame_length < 1) throw std::invalid_argument("simulate_frame: frame_length must be >= 1");

  std::vector<Stream> streams;
  streams.reserve(n);
  for (std::size_t l = 0; l < n; ++l) streams.emplace_back(seed, StreamTag::channel, frame, l);

  std::vector<std::size_t> transmissions(n, 0), successes(n, 0);
  std::vector<double> age_sum(n, 0.0);
  SlotOutcome slot;
  slot.transmitted.assign(n, false);
  AgeState ages(n);
  FrameResult result;

  for (std::size_t i = 0; i < frame_length; ++i) {
    slot.transmitter_count = 0;
    std::size_t last = 0;
    for (std::size_t l = 0; l < n; ++l) {
      bool tx = access.eligible(l, i, n) && streams[l].bernoulli(P[l]);
      slot.transmitted[l] = tx;
      if (tx) {
        ++transmissions[l];
        ++slot.transmitter_count;
        last = l;
      }
    }
    slot.sole_transmitter.reset();
    if (slot.transmitter_count == 1) {
      slot.sole_transmitter = last;
      ++successes[last];
    } else if (slot.transmitter_count > 1) {
      ++result.collisions;
    } else {
      ++result.idle_slots;
    }
    ages.advance(slot);
    for (std::size_t l = 0; l < n; ++l) age_sum[l] += static_cast<double>(ages.age[l]);
    observer(i, slot, ages);
  }

  const double m = static_cast<double>(frame_length);
  result.observations.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    auto& o = result.observations[l];
    o.transmissions = transmissions[l];
    o.successes = successes[l];
    o.avg_cost = nodes[l].cost_per_transmission * static_cast<double>(transmissions[l]) / m;
    o.avg_age = age_sum[l] / m;
  }
  return result;
}

/// Large-frame limit of the average transmission cost.
inline double expected_cost(double p, double cost) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("expected_cost: p outside [0,1]");
  return cost * p;
}

/// Mean of the geometric age law, (1 - nu) / nu.
inline double expected_age_from_success(double nu) {
  if (!(nu > 0.0)) throw std::domain_error("expected_age: zero success probability, age is unbounded");
  return (1.0 - nu) / nu;
}

/// Large-frame limit of the time-averaged age of node `l`.
inline double expected_age(const ProbVector& P, std::size_t l) {
  return expected_age_from_success(success_probability(P, l));
}

/// Stationary law of the within-frame age chain: nu (1 - nu)^k.
inline double age_stationary_pmf(double nu, std::uint64_t k) {
  if (!(nu > 0.0 && nu < 1.0)) throw std::domain_error("age_stationary_pmf: nu must lie in (0,1)");
  return nu * std::pow(1.0 - nu, static_cast<double>(k));
}

/// Observer that histograms one node's age over the frame.
struct AgeHistogram {
  std::size_t node = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  void operator()(std::size_t, const SlotOutcome&, const AgeState& ages) {
    auto a = ages.age.at(node);
    if (a >= counts.size()) counts.resize(a + 1, 0);
    ++counts[a];
    ++total;
  }
};

/// Total-variation distance between an empirical age histogram and the
/// geometric stationary law with success probability nu.
inline double age_tv_distance(const AgeHistogram& h, double nu) {
  if (h.total == 0) throw std::invalid_argument("age_tv_distance: empty histogram");
  double tv = 0.0, covered = 0.0;
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    double pmf = age_stationary_pmf(nu, k);
    covered += pmf;
    tv += std::abs(static_cast<double>(h.counts[k]) / static_cast<double>(h.total) - pmf);
  }
  tv += std::max(0.0, 1.0 - covered);  // pmf tail beyond the largest observed age
  return 0.5 * tv;
}

}  // namespace aoigame
