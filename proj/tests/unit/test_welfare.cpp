#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "aoigame/welfare.hpp"

using namespace aoigame;

namespace {

ProbVector random_profile(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 0.99);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return ProbVector(v);
}

struct GridArgmax {
  double p1 = 0.0, p2 = 0.0, value = -1.0, cell = 0.0;
};

GridArgmax grid_search_two(const std::vector<NodeParams>& nodes, std::size_t points) {
  GridArgmax g;
  const double lo = nodes[0].p_min;
  g.cell = (1.0 - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t j = 0; j < points; ++j) {
      const double a = lo + g.cell * i, b = lo + g.cell * j;
      const double u = system_utility(ProbVector({a, b}), nodes);
      if (u > g.value) g = {a, b, u, g.cell};
    }
  return g;
}

}  // namespace

TEST(SystemUtility, SingleNodeReducesToUtility) {
  const NodeParams np = derive_params(1.0, 0.05);
  for (double p : {0.05, 0.3, 0.9, 1.0})
    EXPECT_DOUBLE_EQ(system_utility(ProbVector(1, p), {&np, 1}), utility(p, np.alpha, std::exp(np.rho2)));
}

TEST(SystemUtility, PermutationInvariantForIdenticalNodes) {
  std::vector<NodeParams> nodes(4, derive_params(1.0, 0.05));
  const ProbVector P({0.1, 0.4, 0.6, 0.3}), Q({0.6, 0.3, 0.1, 0.4});
  EXPECT_NEAR(system_utility(P, nodes), system_utility(Q, nodes), 1e-14);
}

TEST(SystemUtility, TwoNodeValueMatchesHandSum) {
  std::vector<NodeParams> nodes(2, derive_params(1.0, 0.05));
  const double p = solve_ne(make_uniform_config(2)).probabilities[0];
  const double b = std::exp(nodes[0].rho2) / (1.0 - p);
  EXPECT_NEAR(system_utility(ProbVector(2, p), nodes), 2.0 * utility(p, nodes[0].alpha, b), 1e-14);
  // Along the symmetric diagonal the equilibrium is not the welfare maximum.
  double best = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double q = 0.05 + 0.95 * i / 9999.0;
    best = std::max(best, system_utility(ProbVector(2, q), nodes));
  }
  EXPECT_GE(best, system_utility(ProbVector(2, p), nodes));
}

TEST(SystemGradient, SingleNodeReducesToUtilityGradient) {
  const NodeParams np = derive_params(1.0, 0.05);
  EXPECT_DOUBLE_EQ(system_gradient(ProbVector(1, 0.3), 0, {&np, 1}),
                   utility_gradient(0.3, np.alpha, std::exp(np.rho2)));
}

TEST(SystemGradient, MatchesFiniteDifferences) {
  std::mt19937_64 gen(201);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + i % 8;
    std::vector<NodeParams> nodes;
    for (std::size_t l = 0; l < n; ++l) nodes.push_back(derive_params(1.0 + l, 0.02 + 0.05 * (l % 3)));
    const ProbVector P = random_profile(gen, n);
    const std::size_t j = i % n;
    auto f = [&](double x) {
      ProbVector Q = P;
      Q.set(j, x);
      return system_utility(Q, nodes);
    };
    const double h = 1e-3, x = P[j];
    const double fd = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
    const double g = system_gradient(P, j, nodes);
    EXPECT_LE(std::abs(g - fd) / std::max(std::abs(g), 1e-3), 1e-6) << "n=" << n << " j=" << j;
  }
}

TEST(SystemGradient, EqualsPositiveExternalityAtEquilibrium) {
  for (std::size_t n = 2; n <= 12; ++n) {
    GameConfig cfg = make_uniform_config(n);
    const ProbVector ne = solve_ne(cfg, 1e-13).probabilities;
    for (std::size_t j = 0; j < n; ++j) {
      const double ext = externality(ne, j, cfg.nodes);
      EXPECT_GT(ext, 0.0);
      EXPECT_NEAR(system_gradient(ne, j, cfg.nodes), ext, 1e-11);
    }
  }
  GameConfig one = make_uniform_config(1);
  EXPECT_DOUBLE_EQ(externality(solve_ne(one).probabilities, 0, one.nodes), 0.0);
}

TEST(OptimizeSystem, SingleNodeEqualsBestResponse) {
  GameConfig cfg = make_uniform_config(1);
  EXPECT_NEAR(optimize_system(cfg)[0], best_response(0, ProbVector(1, 0.5), cfg.nodes[0]), 1e-10);
}

TEST(OptimizeSystem, TwoNodesAgreeWithGridSearch) {
  GameConfig cfg = make_uniform_config(2);
  const ProbVector opt = optimize_system(cfg);
  const GridArgmax g = grid_search_two(cfg.nodes, 400);
  EXPECT_LE(std::abs(opt[0] - g.p1), g.cell);
  EXPECT_LE(std::abs(opt[1] - g.p2), g.cell);
  EXPECT_GE(system_utility(opt, cfg.nodes), g.value - 1e-8);
}

TEST(OptimizeSystem, DominatesRandomProfiles) {
  std::mt19937_64 gen(202);
  for (std::size_t n : {2u, 4u, 9u}) {
    GameConfig cfg = make_uniform_config(n);
    const ProbVector opt = optimize_system(cfg);
    const double u_opt = system_utility(opt, cfg.nodes);
    EXPECT_GE(u_opt, system_utility(solve_ne(cfg).probabilities, cfg.nodes));
    for (int i = 0; i < 1000; ++i) EXPECT_GE(u_opt, system_utility(random_profile(gen, n), cfg.nodes));
  }
}

TEST(OptimizeSystem, StaysInActionSet) {
  GameConfig cfg = make_uniform_config(6);
  for (double p : optimize_system(cfg)) {
    EXPECT_GE(p, cfg.nodes[0].p_min);
    EXPECT_LE(p, 1.0);
  }
}

TEST(PriceOfAnarchy, SingleNodeIsOne) {
  EXPECT_NEAR(price_of_anarchy(make_uniform_config(1)).poa, 1.0, 1e-9);
}

TEST(PriceOfAnarchy, RisesThenDecaysTowardOne) {
  std::vector<double> poa;
  for (std::size_t n = 1; n <= 25; ++n) {
    const WelfareResult r = price_of_anarchy(make_uniform_config(n));
    EXPECT_GT(r.u_ne, 0.0);
    EXPECT_GE(r.poa, 1.0 - 1e-9);
    EXPECT_NEAR(r.poa, r.u_opt / r.u_ne, 1e-15);
    poa.push_back(r.poa);
  }
  const auto peak = std::max_element(poa.begin(), poa.end()) - poa.begin();
  EXPECT_GT(peak, 0);
  EXPECT_LT(peak, 24);
  for (long i = 1; i <= peak; ++i) EXPECT_GE(poa[i], poa[i - 1] - 1e-12);
  for (std::size_t i = peak + 1; i < poa.size(); ++i) EXPECT_LE(poa[i], poa[i - 1] + 1e-12);
  EXPECT_LT(poa.back() - 1.0, poa[peak] - 1.0);
}
