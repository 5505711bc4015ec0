// Virtual-utility game: per-node utility, its gradient, best responses,
// the contraction certificate and the equilibrium solver.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoigame/core_model.hpp"
#include "aoigame/rng.hpp"

namespace aoigame {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kRootLow = 1e-12;
inline constexpr double kRootTolerance = 1e-12;
inline constexpr std::size_t kSolverIterationCap = 10000;

/// Root of a strictly decreasing function on [lo, hi] by bisection; needs
/// f(lo) > 0 > f(hi). Stops once the bracket is narrower than `tol`.
template <class F>
double bisect_decreasing(F&& f, double lo, double hi, double tol = kRootTolerance) {
  double flo = f(lo), fhi = f(hi);
  if (!(flo > 0.0 && fhi < 0.0))
    throw std::domain_error("bisect_decreasing: root is not bracketed");
  while (hi - lo >= tol) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double fm = f(mid);
    if (fm > 0.0) lo = mid;
    else if (fm < 0.0) hi = mid;
    else return mid;
  }
  return 0.5 * (lo + hi);
}

/// U(p) = -e^(-alpha p)/alpha - (p^2/2)(1 + 1/b) + (1 + alpha)/alpha.
inline double utility(double p, double alpha, double b) {
  return -std::exp(-alpha * p) / alpha - 0.5 * p * p * (1.0 + 1.0 / b) + (1.0 + alpha) / alpha;
}

/// dU/dp = e^(-alpha p) - p (1 + 1/b); strictly decreasing in p.
inline double utility_gradient(double p, double alpha, double b) {
  return std::exp(-alpha * p) - p * (1.0 + 1.0 / b);
}

/// Unconstrained maximizer of the utility on (0,1): the root of
/// e^(-alpha p) = p (1 + 1/b). Lies in [e^(-alpha)/2, 1).
inline double utility_maximizer(double alpha, double b) {
  if (!(alpha > 0.0) || !(b >= 1.0) || std::isnan(b))
    throw std::domain_error("utility_maximizer: needs alpha > 0 and b >= 1");
  return bisect_decreasing([&](double p) { return utility_gradient(p, alpha, b); }, kRootLow, 1.0);
}

/// Best response of node `l` to the rest of the profile. Entry `l` of
/// `profile` is ignored.
inline double best_response(std::size_t l, const ProbVector& profile, const NodeParams& params) {
  const double b = b_factor(profile, l, params.rho2);
  return std::max(params.p_min, utility_maximizer(params.alpha, b));
}

/// Best response from the probabilities of the other nodes only.
inline double best_response_to_others(std::span<const double> others, const NodeParams& params) {
  double silent = 1.0;
  for (double p : others) {
    if (!(p < 1.0)) throw std::domain_error("best_response: another node transmits with probability 1");
    silent *= 1.0 - p;
  }
  return std::max(params.p_min, utility_maximizer(params.alpha, std::exp(params.rho2) / silent));
}

/// Simultaneous (Jacobi) application of every node's best response.
inline ProbVector best_response_map(const ProbVector& P, std::span<const NodeParams> nodes) {
  if (P.size() != nodes.size()) throw std::invalid_argument("best_response_map: roster size mismatch");
  std::vector<double> out(P.size());
  for (std::size_t l = 0; l < P.size(); ++l) out[l] = best_response(l, P, nodes[l]);
  return ProbVector(std::move(out));
}

/// Upper bound on the infinity norm of the best-response Jacobian:
/// max_l (N-1)(1-p_global_min)^(N-2) / (e^rho2_l (alpha_l + 1)).
inline double contraction_bound(std::size_t n, std::span<const NodeParams> nodes, double p_global_min) {
  if (n < 1) throw std::invalid_argument("contraction_bound: N must be >= 1");
  if (n == 1) return 0.0;
  const double f = static_cast<double>(n - 1) * std::pow(1.0 - p_global_min, static_cast<double>(n) - 2.0);
  double bound = 0.0;
  for (const auto& p : nodes) bound = std::max(bound, f / (std::exp(p.rho2) * (p.alpha + 1.0)));
  return bound;
}

struct EquilibriumResult {
  ProbVector probabilities;
  /// |e^(-alpha p) - p (1 + 1/b)| per node, zero where the p_min clamp binds.
  std::vector<double> residuals;
  std::size_t iterations = 0;
  double contraction_bound = 0.0;
  /// Sup-norm step of each map application.
  std::vector<double> step_sizes;
};

inline std::vector<double> equilibrium_residuals(const ProbVector& P, std::span<const NodeParams> nodes) {
  std::vector<double> r(P.size());
  for (std::size_t l = 0; l < P.size(); ++l) {
    if (P[l] <= nodes[l].p_min) continue;
    r[l] = std::abs(utility_gradient(P[l], nodes[l].alpha, b_factor(P, l, nodes[l].rho2)));
  }
  return r;
}

/// Logs a message when the contraction certificate fails; the solver keeps
/// going but uniqueness is no longer guaranteed.
using SolverWarning = std::function<void(const std::string&)>;

/// Iterates the best-response map from `start` until the sup-norm step
/// drops below `tol`.
inline EquilibriumResult solve_ne_from(std::span<const NodeParams> nodes, double p_global_min,
                                       ProbVector start, double tol = 1e-10,
                                       const SolverWarning& warn = {}) {
  if (nodes.empty()) throw std::invalid_argument("solve_ne: empty roster");
  EquilibriumResult res;
  res.contraction_bound = contraction_bound(nodes.size(), nodes, p_global_min);
  if (res.contraction_bound >= 1.0 && warn)
    warn("contraction bound " + std::to_string(res.contraction_bound) +
         " >= 1: equilibrium uniqueness not certified");
  ProbVector P = std::move(start);
  for (std::size_t it = 1; it <= kSolverIterationCap; ++it) {
    ProbVector next = best_response_map(P, nodes);
    double step = sup_distance(next, P);
    res.step_sizes.push_back(step);
    P = std::move(next);
    if (step < tol) {
      res.iterations = it;
      res.residuals = equilibrium_residuals(P, nodes);
      res.probabilities = std::move(P);
      return res;
    }
  }
  throw ConvergenceError("solve_ne: no convergence within " + std::to_string(kSolverIterationCap) +
                         " iterations (contraction bound " + std::to_string(res.contraction_bound) +
                         ", last step " + std::to_string(res.step_sizes.back()) + ")");
}

/// Equilibrium of the roster in `config`, started from the midpoint of
/// every node's action interval.
inline EquilibriumResult solve_ne(const GameConfig& config, double tol = 1e-10,
                                  const SolverWarning& warn = {}) {
  std::vector<double> start;
  for (const auto& n : config.nodes) start.push_back(0.5 * (n.p_min + 1.0));
  return solve_ne_from(config.nodes, config.p_global_min, ProbVector(std::move(start)), tol, warn);
}

}  // namespace aoigame
