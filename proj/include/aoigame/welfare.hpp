// Social welfare of the virtual game and the price of anarchy.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoigame/core_model.hpp"
#include "aoigame/game.hpp"
#include "aoigame/rng.hpp"

namespace aoigame {

inline constexpr double kSweepTolerance = 1e-10;
inline constexpr std::size_t kSweepCap = 100000;
inline constexpr std::size_t kWelfareRandomStarts = 5;

/// Sum of every node's utility, each with its own b computed from P.
inline double system_utility(const ProbVector& P, std::span<const NodeParams> nodes) {
  if (P.size() != nodes.size()) throw std::invalid_argument("system_utility: roster size mismatch");
  double total = 0.0;
  for (std::size_t l = 0; l < P.size(); ++l)
    total += utility(P[l], nodes[l].alpha, 1.0 / inverse_b_factor(P, l, nodes[l].rho2));
  return total;
}

namespace detail {

inline double silent_product_except(const ProbVector& P, std::size_t a, std::size_t b) {
  double prod = 1.0;
  for (std::size_t k = 0; k < P.size(); ++k)
    if (k != a && k != b) prod *= 1.0 - P[k];
  return prod;
}

}  // namespace detail

/// Sum over l != j of (p_l^2 / 2) e^(-rho2_l) prod_{k != l, j}(1 - p_k):
/// what node j's transmissions cost everyone else, with the sign flipped.
inline double externality(const ProbVector& P, std::size_t j, std::span<const NodeParams> nodes) {
  if (j >= P.size()) throw std::out_of_range("externality: node index");
  double sum = 0.0;
  for (std::size_t l = 0; l < P.size(); ++l) {
    if (l == j) continue;
    sum += 0.5 * P[l] * P[l] * std::exp(-nodes[l].rho2) * detail::silent_product_except(P, l, j);
  }
  return sum;
}

/// Partial derivative of the system utility in p_j.
inline double system_gradient(const ProbVector& P, std::size_t j, std::span<const NodeParams> nodes) {
  if (j >= P.size()) throw std::out_of_range("system_gradient: node index");
  const double own = utility_gradient(P[j], nodes[j].alpha, 1.0 / inverse_b_factor(P, j, nodes[j].rho2));
  return own + externality(P, j, nodes);
}

/// Maximizes the system utility over [p_min, 1]^N by cyclic coordinate
/// ascent from `start`; each coordinate slice is strictly concave, so its
/// maximizer is the root of the slice gradient or an endpoint.
inline ProbVector coordinate_ascent(std::span<const NodeParams> nodes, ProbVector start,
                                    double tol = kSweepTolerance) {
  ProbVector P = std::move(start);
  for (std::size_t sweep = 0; sweep < kSweepCap; ++sweep) {
    double change = 0.0;
    for (std::size_t j = 0; j < P.size(); ++j) {
      ProbVector trial = P;
      auto slice = [&](double x) {
        trial.set(j, x);
        return system_gradient(trial, j, nodes);
      };
      const double lo = nodes[j].p_min;
      double best;
      if (slice(lo) <= 0.0) best = lo;
      else if (slice(1.0) >= 0.0) best = 1.0;
      else best = bisect_decreasing(slice, lo, 1.0);
      change = std::max(change, std::abs(best - P[j]));
      P.set(j, best);
    }
    if (change < tol) return P;
  }
  throw ConvergenceError("optimize_system: sweep cap exceeded");
}

/// Social optimum: best of coordinate ascent from the equilibrium and from
/// `kWelfareRandomStarts` seeded random starts.
inline ProbVector optimize_system(const GameConfig& config, double tol = kSweepTolerance) {
  config.validate();
  const auto& nodes = config.nodes;
  std::vector<ProbVector> starts;
  starts.push_back(solve_ne(config).probabilities);
  for (std::size_t s = 0; s < kWelfareRandomStarts; ++s) {
    Stream rng(config.seed, StreamTag::welfare_start, s);
    std::vector<double> v;
    for (const auto& n : nodes) v.push_back(rng.uniform_open(n.p_min, 1.0));
    starts.emplace_back(std::move(v));
  }
  ProbVector best;
  double best_u = -INFINITY;
  for (auto& s : starts) {
    ProbVector cand = coordinate_ascent(nodes, std::move(s), tol);
    const double u = system_utility(cand, nodes);
    if (u > best_u) {
      best_u = u;
      best = std::move(cand);
    }
  }
  return best;
}

struct WelfareResult {
  ProbVector p_opt;
  ProbVector p_ne;
  double u_opt = 0.0;
  double u_ne = 0.0;
  double poa = 1.0;
};

/// U_sys(P_opt) / U_sys(P_ne).
inline WelfareResult price_of_anarchy(const GameConfig& config) {
  WelfareResult r;
  r.p_ne = solve_ne(config).probabilities;
  r.p_opt = optimize_system(config);
  r.u_ne = system_utility(r.p_ne, config.nodes);
  r.u_opt = system_utility(r.p_opt, config.nodes);
  if (!(r.u_ne > 0.0)) throw std::domain_error("price_of_anarchy: non-positive equilibrium welfare");
  r.poa = r.u_opt / r.u_ne;
  return r;
}

}  // namespace aoigame
