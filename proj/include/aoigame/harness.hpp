// Scenario orchestration: runs an experiment, writes comma-separated
// tables plus a run manifest, and evaluates the scenario's cross-checks.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "aoigame/config.hpp"
#include "aoigame/core_model.hpp"
#include "aoigame/game.hpp"
#include "aoigame/learning.hpp"
#include "aoigame/round_robin.hpp"
#include "aoigame/welfare.hpp"

namespace aoigame {

inline constexpr const char* kVersion = "1.0.0";

/// Cross-check tolerances used by the scenarios.
inline constexpr double kStochasticEndpointTol = 0.02;
inline constexpr double kExpectedEndpointTol = 1e-4;
inline constexpr double kChurnTol = 0.03;
inline constexpr std::size_t kChurnSettleFrames = 40;
inline constexpr double kPoaFloor = 1.0 - 1e-9;

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ScenarioReport {
  std::vector<std::filesystem::path> tables;
  std::filesystem::path manifest;
  std::vector<CheckResult> checks;

  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
};

/// Formatting shared by every table so output is byte-stable.
inline std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  template <class... Ts>
  void row(const Ts&... cells) {
    std::vector<std::string> r;
    (r.push_back(cell(cells)), ...);
    if (r.size() != header_.size()) throw std::logic_error("CsvTable: row width mismatch");
    rows_.push_back(std::move(r));
  }

  std::string str() const {
    std::string out;
    auto emit = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += r[i];
      }
      out += '\n';
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return out;
  }

 private:
  static std::string cell(double x) { return fmt_real(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Runs fn(i) for i in [0, count) on a small worker pool.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return r;
}

/// Mean over nodes of the final profile.
inline double mean_final_probability(const Trajectory& t) {
  double s = 0.0;
  for (double p : t.final_probabilities) s += p;
  return s / static_cast<double>(t.final_probabilities.size());
}

/// Mean over nodes and over the last quarter of frames of avg_age.
inline double tail_mean_age(const Trajectory& t) {
  const std::size_t frames = t.records.size();
  const std::size_t tail = std::max<std::size_t>(1, frames / 4);
  double s = 0.0;
  std::size_t count = 0;
  for (std::size_t f = frames - tail; f < frames; ++f)
    for (const auto& o : t.records[f].observations) {
      s += o.avg_age;
      ++count;
    }
  return s / static_cast<double>(count);
}

/// Equilibria keyed by roster size. Derived parameters do not depend on
/// cost, so rosters of equal size share one equilibrium.
class EquilibriumCache {
 public:
  const ProbVector& get(std::span<const NodeParams> nodes, double p_global_min) {
    auto it = cache_.find(nodes.size());
    if (it != cache_.end()) return it->second;
    auto res = solve_ne_from(nodes, p_global_min, ProbVector(nodes.size(), 0.5));
    return cache_.emplace(nodes.size(), std::move(res.probabilities)).first->second;
  }

 private:
  std::map<std::size_t, ProbVector> cache_;
};

/// Roster in force at frame t given the initial roster and churn events.
inline std::vector<NodeParams> roster_at(const GameConfig& g, std::size_t t) {
  std::vector<NodeParams> r = g.nodes;
  for (const auto& ev : g.churn_events) {
    if (ev.frame > t) break;
    r.resize(r.size() - ev.removed);
    r.insert(r.end(), ev.added.begin(), ev.added.end());
  }
  return r;
}

inline double best_response_in_profile(const ProbVector& P, std::size_t l, const NodeParams& np) {
  std::vector<double> others;
  for (std::size_t k = 0; k < P.size(); ++k)
    if (k != l) others.push_back(P[k]);
  return best_response_to_others(others, np);
}

struct SweepPoint {
  std::size_t n = 0;
  MeanSe p_learning, p_rr, age_learning, age_rr;
  double p_ne = 0.0;
  double age_ne = 0.0;
};

inline std::vector<SweepPoint> run_learning_sweep(const ExperimentConfig& cfg) {
  const auto& sc = cfg.scenario;
  const std::size_t count = sc.n_max - sc.n_min + 1;
  std::vector<SweepPoint> points(count);
  parallel_for(count, [&](std::size_t idx) {
    const std::size_t n = sc.n_min + idx;
    SweepPoint pt;
    pt.n = n;
    std::vector<double> pl, pr, al, ar;
    for (std::size_t r = 0; r < sc.replicates; ++r) {
      const std::uint64_t run_seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(StreamTag::replicate), n, r});
      GameConfig g = cfg.game(n, run_seed);
      Trajectory learn = run_learning(g, sc.frames, cfg.mode);
      Trajectory rr = simulate_rr(g, sc.frames);
      pl.push_back(mean_final_probability(learn));
      pr.push_back(mean_final_probability(rr));
      al.push_back(tail_mean_age(learn));
      ar.push_back(tail_mean_age(rr));
    }
    pt.p_learning = mean_se(pl);
    pt.p_rr = mean_se(pr);
    pt.age_learning = mean_se(al);
    pt.age_rr = mean_se(ar);
    GameConfig g = cfg.game(n, cfg.seed);
    ProbVector ne = solve_ne(g).probabilities;
    pt.p_ne = std::accumulate(ne.begin(), ne.end(), 0.0) / static_cast<double>(n);
    double age = 0.0;
    for (std::size_t l = 0; l < n; ++l) age += expected_age(ne, l);
    pt.age_ne = age / static_cast<double>(n);
    points[idx] = pt;
  });
  return points;
}

inline std::string join_names(const std::vector<std::filesystem::path>& paths) {
  std::string s;
  for (const auto& p : paths) s += (s.empty() ? "" : ",") + p.filename().string();
  return s;
}

}  // namespace detail

/// Runs the configured scenario and writes its tables plus manifest.json
/// into `out_dir`.
inline ScenarioReport run_scenario(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw std::runtime_error("output directory " + out_dir.string() + " is not writable");

  ScenarioReport report;
  const auto& sc = cfg.scenario;
  auto emit = [&](const std::string& name, const CsvTable& table) {
    auto path = out_dir / name;
    detail::write_file(path, table.str());
    report.tables.push_back(path);
  };
  auto check = [&](std::string name, bool passed, std::string detail) {
    report.checks.push_back({std::move(name), passed, std::move(detail)});
  };

  try {
    switch (sc.kind) {
      case ScenarioKind::convergence: {
        GameConfig g = cfg.game();
        Trajectory learn = run_learning(g, sc.frames, cfg.mode);
        Trajectory expected = cfg.mode == LearningMode::expected ? learn : run_learning(g, sc.frames, LearningMode::expected);
        ProbVector ne = solve_ne(g).probabilities;
        CsvTable t({"frame", "node", "p_learning", "p_expected", "p_best_response", "p_ne"});
        for (std::size_t f = 0; f < learn.records.size(); ++f) {
          const auto& P = learn.records[f].probabilities;
          for (std::size_t l = 0; l < P.size(); ++l)
            t.row(learn.records[f].frame, l, P[l], expected.records[f].probabilities[l],
                  detail::best_response_in_profile(P, l, g.nodes[l]), ne[l]);
        }
        emit("convergence.csv", t);
        const double d_learn = sup_distance(learn.final_probabilities, ne);
        const double d_exp = sup_distance(expected.final_probabilities, ne);
        const double tol = cfg.mode == LearningMode::stochastic ? kStochasticEndpointTol : kExpectedEndpointTol;
        check("learning endpoint near equilibrium", d_learn <= tol,
              "sup distance " + fmt_real(d_learn) + " (tolerance " + fmt_real(tol) + ")");
        check("expected-mode endpoint near equilibrium", d_exp <= kExpectedEndpointTol,
              "sup distance " + fmt_real(d_exp) + " (tolerance " + fmt_real(kExpectedEndpointTol) + ")");
        break;
      }
      case ScenarioKind::churn: {
        GameConfig g = cfg.game();
        Trajectory learn = run_learning(g, sc.frames, cfg.mode);
        detail::EquilibriumCache ne_cache;
        CsvTable t({"frame", "node", "roster_size", "p_learning", "p_best_response", "p_ne"});
        for (const auto& rec : learn.records) {
          auto roster = detail::roster_at(g, rec.frame);
          const auto& ne = ne_cache.get(roster, g.p_global_min);
          for (std::size_t l = 0; l < rec.roster_size(); ++l)
            t.row(rec.frame, l, rec.roster_size(), rec.probabilities[l],
                  detail::best_response_in_profile(rec.probabilities, l, roster[l]), ne[l]);
        }
        emit("churn.csv", t);
        for (const auto& ev : g.churn_events) {
          const std::size_t at = ev.frame + kChurnSettleFrames;
          if (at > sc.frames) continue;
          const auto& rec = learn.records[at - 1];
          auto roster = detail::roster_at(g, at);
          const double d = sup_distance(rec.probabilities, ne_cache.get(roster, g.p_global_min));
          check("re-converged " + std::to_string(kChurnSettleFrames) + " frames after churn at frame " +
                    std::to_string(ev.frame),
                d <= kChurnTol, "sup distance " + fmt_real(d) + " (tolerance " + fmt_real(kChurnTol) + ")");
        }
        break;
      }
      case ScenarioKind::sweep_prob_vs_n: {
        auto points = detail::run_learning_sweep(cfg);
        CsvTable t({"n", "p_learning", "p_learning_se", "p_rr", "p_rr_se", "p_ne"});
        bool ordered = true;
        for (const auto& pt : points) {
          t.row(pt.n, pt.p_learning.mean, pt.p_learning.se, pt.p_rr.mean, pt.p_rr.se, pt.p_ne);
          if (pt.n >= 2 && !(pt.p_rr.mean > pt.p_ne)) ordered = false;
        }
        emit("sweep_prob_vs_n.csv", t);
        check("round-robin probability above equilibrium probability for N >= 2", ordered, "");
        break;
      }
      case ScenarioKind::sweep_age_vs_n: {
        auto points = detail::run_learning_sweep(cfg);
        CsvTable t({"n", "age_learning", "age_learning_se", "age_rr", "age_rr_se", "age_ne", "age_rr_approx",
                    "age_rr_renewal"});
        for (const auto& pt : points)
          t.row(pt.n, pt.age_learning.mean, pt.age_learning.se, pt.age_rr.mean, pt.age_rr.se, pt.age_ne,
                rr_age_approximation(pt.n, pt.p_rr.mean), rr_age_renewal(pt.n, pt.p_rr.mean));
        emit("sweep_age_vs_n.csv", t);
        if (points.size() >= 2) {
          const auto& a = points.front();
          const auto& b = points.back();
          const bool superlinear = b.age_learning.mean / static_cast<double>(b.n) >
                                   a.age_learning.mean / static_cast<double>(a.n);
          check("learning age per node grows with N", superlinear,
                "age/N " + fmt_real(a.age_learning.mean / a.n) + " -> " + fmt_real(b.age_learning.mean / b.n));
        }
        break;
      }
      case ScenarioKind::sweep_poa_vs_n: {
        const std::size_t count = sc.n_max - sc.n_min + 1;
        std::vector<WelfareResult> results(count);
        std::vector<double> ext(count);
        detail::parallel_for(count, [&](std::size_t i) {
          GameConfig g = cfg.game(sc.n_min + i, cfg.seed);
          results[i] = price_of_anarchy(g);
          ext[i] = externality(results[i].p_ne, 0, g.nodes);
        });
        CsvTable t({"n", "p_ne", "u_ne", "u_opt", "poa", "externality"});
        bool above = true;
        std::vector<double> excess;
        for (std::size_t i = 0; i < count; ++i) {
          const auto& r = results[i];
          t.row(sc.n_min + i, r.p_ne[0], r.u_ne, r.u_opt, r.poa, ext[i]);
          above = above && r.poa >= kPoaFloor;
          excess.push_back(r.poa - 1.0);
        }
        emit("sweep_poa_vs_n.csv", t);
        check("price of anarchy >= 1", above, "");
        const auto peak = static_cast<std::size_t>(std::max_element(excess.begin(), excess.end()) - excess.begin());
        bool unimodal = true;
        for (std::size_t i = 1; i < count; ++i)
          if (i <= peak ? excess[i] < excess[i - 1] : excess[i] > excess[i - 1]) unimodal = false;
        check("price of anarchy unimodal in N", unimodal, "peak at N = " + std::to_string(sc.n_min + peak));
        break;
      }
      case ScenarioKind::rr_compare: {
        GameConfig g = cfg.game();
        Trajectory rr = simulate_rr(g, sc.frames);
        Trajectory learn = run_learning(g, sc.frames, cfg.mode);
        CsvTable t({"frame", "node", "p_rr", "avg_age_rr", "avg_cost_rr", "p_learning", "avg_age_learning",
                    "avg_cost_learning"});
        std::size_t collisions = 0;
        for (std::size_t f = 0; f < rr.records.size(); ++f) {
          const auto& a = rr.records[f];
          const auto& b = learn.records[f];
          collisions += a.collisions;
          for (std::size_t l = 0; l < a.roster_size(); ++l)
            t.row(a.frame, l, a.probabilities[l], a.observations[l].avg_age, a.observations[l].avg_cost,
                  b.probabilities[l], b.observations[l].avg_age, b.observations[l].avg_cost);
        }
        emit("rr_compare.csv", t);
        check("no round-robin collisions", collisions == 0, std::to_string(collisions) + " collisions");
        if (g.nodes.size() >= 2) {
          const double p_ne = solve_ne(g).probabilities[0];
          const double p_rr = detail::mean_final_probability(rr);
          check("round-robin probability above equilibrium probability", p_rr > p_ne,
                "p_rr " + fmt_real(p_rr) + " vs p_ne " + fmt_real(p_ne));
        }
        break;
      }
    }
  } catch (const std::exception& e) {
    throw std::runtime_error("scenario " + std::string(to_string(sc.kind)) + ": " + e.what());
  }

  nlohmann::ordered_json m;
  m["tool"] = "aoigame";
  m["version"] = kVersion;
  m["scenario"] = std::string(to_string(sc.kind));
  m["seed"] = cfg.seed;
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(canonical_text(cfg))));
  m["config_hash"] = hash;
  m["frame_length"] = cfg.frame_length;
  m["frames"] = sc.frames;
  m["mode"] = cfg.mode == LearningMode::stochastic ? "stochastic" : "expected";
  m["tables"] = nlohmann::ordered_json::array();
  for (const auto& p : report.tables) m["tables"].push_back(p.filename().string());
  m["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) m["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  report.manifest = out_dir / "manifest.json";
  detail::write_file(report.manifest, m.dump(2) + "\n");
  return report;
}

}  // namespace aoigame
