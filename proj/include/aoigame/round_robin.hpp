// Round-robin comparator: node l owns every N-th slot and transmits there
// with a probability learned by the same update rule.
#pragma once

#include <cstddef>
#include <stdexcept>

#include "aoigame/channel.hpp"
#include "aoigame/learning.hpp"

namespace aoigame {

/// Collision-free frames under a fixed roster-position slot allotment.
/// Frame statistics are normalized per slot (divided by m).
inline Trajectory simulate_rr(const GameConfig& config, std::size_t frames) {
  if (!config.churn_events.empty())
    throw std::invalid_argument("simulate_rr: churn is not supported in round-robin mode");
  return detail::run_frames(config, frames, [&](const ProbVector& P, std::span<const NodeParams> nodes,
                                                std::size_t t, FrameRecord& rec) {
    FrameResult fr = simulate_frame(P, nodes, config.frame_length, config.seed, t, RoundRobinAccess{});
    if (fr.collisions != 0) throw std::logic_error("simulate_rr: collision under round-robin allotment");
    rec.collisions = fr.collisions;
    rec.observations = std::move(fr.observations);
    rec.subgradients.resize(nodes.size());
    for (std::size_t l = 0; l < nodes.size(); ++l)
      rec.subgradients[l] = subgradient(rec.observations[l], P[l], nodes[l]);
  });
}

/// Long-run age approximation N E[s_a] / 2 with E[s_a] = 1/p allotted
/// slots per reception.
inline double rr_age_approximation(std::size_t n, double p) {
  if (!(p > 0.0)) throw std::domain_error("rr_age_approximation: p must be positive");
  return static_cast<double>(n) / p / 2.0;
}

/// Exact long-run mean age when successes are N * Geometric(p) slots apart:
/// (N (2 - p) / p - 1) / 2. Exceeds the approximation above by the factor
/// 2 - p - p/N.
inline double rr_age_renewal(std::size_t n, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("rr_age_renewal: p must lie in (0,1]");
  return (static_cast<double>(n) * (2.0 - p) / p - 1.0) / 2.0;
}

}  // namespace aoigame
