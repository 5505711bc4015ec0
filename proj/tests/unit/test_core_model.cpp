#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "aoigame/core_model.hpp"
#include "aoigame/game.hpp"

using namespace aoigame;

namespace {

// f(n) = (n-1)(1-pg)^(n-2) maximized on a dense grid, independent of the
// closed-form argmax used by the library.
struct GridMax {
  double argmax = 0.0;
  double value = -1.0;
};

GridMax grid_maximize(double pg) {
  GridMax g;
  for (double n = 1.0; n <= 200.0; n += 1e-4) {
    const double f = (n - 1.0) * std::pow(1.0 - pg, n - 2.0);
    if (f > g.value) {
      g.value = f;
      g.argmax = n;
    }
  }
  return g;
}

}  // namespace

TEST(DeriveParams, MatchesReferenceValuesAtFivePercent) {
  const NodeParams p = derive_params(1.0, 0.05);
  EXPECT_NEAR(p.alpha, 2.302585, 1e-6);
  EXPECT_DOUBLE_EQ(p.alpha, -std::log(0.1));
  EXPECT_DOUBLE_EQ(p.p_min, 0.05);
  EXPECT_NEAR(worst_case_roster_size(0.05), 20.4957, 1e-4);
  EXPECT_NEAR(rho2_threshold(p.alpha, 0.05), 0.8270, 5e-4);
  EXPECT_DOUBLE_EQ(p.rho2, rho2_threshold(p.alpha, 0.05) + kRho2Margin);
}

TEST(DeriveParams, ThresholdAgreesWithGridMaximization) {
  for (double pg : {0.01, 0.05, 0.1, 0.2, 0.3, 0.45}) {
    const GridMax g = grid_maximize(pg);
    const double alpha = -std::log(2.0 * pg);
    const double expected = std::max(0.0, std::log(g.value / (alpha + 1.0)));
    EXPECT_NEAR(rho2_threshold(alpha, pg), expected, 1e-7) << "pg=" << pg;
    if (g.argmax > 1.5 && g.argmax < 199.0) {
      EXPECT_NEAR(worst_case_roster_size(pg), g.argmax, 2e-4) << "pg=" << pg;
    }
  }
}

TEST(DeriveParams, QuarterGivesLnTwo) {
  EXPECT_NEAR(derive_params(1.0, 0.25).alpha, 0.693147, 1e-6);
}

TEST(DeriveParams, RejectsOutOfDomainInputs) {
  EXPECT_THROW(derive_params(1.0, 0.6), std::domain_error);
  EXPECT_THROW(derive_params(1.0, 0.5), std::domain_error);
  EXPECT_THROW(derive_params(1.0, 0.0), std::domain_error);
  EXPECT_THROW(derive_params(0.0, 0.05), std::invalid_argument);
  EXPECT_THROW(derive_params(-2.0, 0.05), std::invalid_argument);
}

TEST(DeriveParams, AlphaIsCostIndependentAndEqualsCostTimesRho1) {
  for (double c : {0.1, 1.0, 3.5, 40.0}) {
    const NodeParams p = derive_params(c, 0.05);
    EXPECT_NEAR(p.alpha, -std::log(0.1), 1e-12);
    EXPECT_NEAR(p.alpha, c * p.rho1, 1e-12);
  }
}

TEST(DeriveParams, PminSitsAtTheLowerBoundOfTheMaximizer) {
  for (double pg : {0.001, 0.05, 0.2, 0.4999}) {
    const NodeParams p = derive_params(1.0, pg);
    EXPECT_LE(p.p_min, std::exp(-p.alpha) / 2.0 + 1e-15);
    EXPECT_NEAR(p.p_min, std::exp(-p.alpha) / 2.0, 1e-14);
  }
}

TEST(DeriveParams, ContractionBoundBelowOneForAllRosterSizes) {
  for (double pg : {0.01, 0.05, 0.2, 0.45}) {
    const NodeParams p = derive_params(1.0, pg);
    for (std::size_t n = 1; n <= 200; ++n) {
      std::vector<NodeParams> nodes(n, p);
      EXPECT_LT(contraction_bound(n, nodes, pg), 1.0) << "pg=" << pg << " n=" << n;
    }
  }
}

TEST(NodeParams, MakeRejectsInvalidFields) {
  EXPECT_THROW(NodeParams::make(1.0, 0.0, 1.0, 0.05), std::invalid_argument);
  EXPECT_THROW(NodeParams::make(1.0, 1.0, -1.0, 0.05), std::invalid_argument);
  EXPECT_THROW(NodeParams::make(1.0, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(NodeParams::make(0.0, 1.0, 1.0, 0.05), std::invalid_argument);
  EXPECT_DOUBLE_EQ(NodeParams::make(2.0, 1.5, 1.0, 0.05).alpha, 3.0);
}

TEST(ProbVector, RejectsEntriesOutsideUnitInterval) {
  EXPECT_THROW(ProbVector({0.5, 1.2}), std::invalid_argument);
  EXPECT_THROW(ProbVector({-0.1}), std::invalid_argument);
  EXPECT_THROW(ProbVector({std::nan("")}), std::invalid_argument);
  ProbVector p({0.2, 0.3});
  EXPECT_THROW(p.set(0, 2.0), std::invalid_argument);
  EXPECT_THROW(p.at(5), std::out_of_range);
}

TEST(CheckProfile, RequiresEntriesInPminToOne) {
  std::vector<NodeParams> nodes(2, derive_params(1.0, 0.05));
  EXPECT_NO_THROW(check_profile(ProbVector({0.05, 0.99}), nodes));
  EXPECT_THROW(check_profile(ProbVector({0.04, 0.5}), nodes), std::invalid_argument);
  EXPECT_THROW(check_profile(ProbVector({0.5, 1.0}), nodes), std::invalid_argument);
  EXPECT_THROW(check_profile(ProbVector({0.5}), nodes), std::invalid_argument);
}

// Node indices are 0-based; the first node of (0.3, 0.2, 0.1) sees 0.3 * 0.8 * 0.9.
TEST(SuccessProbability, ClosedFormExamples) {
  EXPECT_DOUBLE_EQ(success_probability(ProbVector({0.5}), 0), 0.5);
  EXPECT_DOUBLE_EQ(success_probability(ProbVector({0.5, 0.5}), 1), 0.25);
  EXPECT_NEAR(success_probability(ProbVector({0.3, 0.2, 0.1}), 0), 0.216, 1e-15);
  EXPECT_NEAR(success_probability(ProbVector({0.3, 0.2, 0.1}), 1), 0.2 * 0.7 * 0.9, 1e-15);
  EXPECT_THROW(success_probability(ProbVector({0.5}), 1), std::out_of_range);
}

TEST(SuccessProbability, IncreasingInOwnDecreasingInOthers) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 6;
    std::vector<double> v(n);
    for (auto& x : v) x = u(gen);
    const ProbVector P(v);
    const std::size_t l = trial % n;
    const double base = success_probability(P, l);
    for (std::size_t k = 0; k < n; ++k) {
      ProbVector Q = P;
      Q.set(k, P[k] + 0.01);
      if (k == l) {
        EXPECT_GT(success_probability(Q, l), base);
      } else {
        EXPECT_LT(success_probability(Q, l), base);
      }
    }
  }
}

TEST(BFactor, ClosedFormExamples) {
  EXPECT_NEAR(b_factor(ProbVector({0.4}), 0, 1.0), std::exp(1.0), 1e-15);
  EXPECT_DOUBLE_EQ(b_factor(ProbVector({0.5, 0.5}), 1, 0.0), 2.0);
  EXPECT_NEAR(b_factor(ProbVector({0.3, 0.2, 0.1}), 0, 1.0), 3.77539, 5e-6);
}

TEST(BFactor, AtLeastOneForNonnegativeRho2) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 0.999), r(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + trial % 8);
    for (auto& x : v) x = u(gen);
    const ProbVector P(v);
    EXPECT_GE(b_factor(P, 0, r(gen)), 1.0);
  }
}

TEST(BFactor, RejectsCertainTransmitterAmongOthers) {
  EXPECT_THROW(b_factor(ProbVector({0.3, 1.0}), 0, 1.0), std::domain_error);
  EXPECT_DOUBLE_EQ(inverse_b_factor(ProbVector({0.3, 1.0}), 0, 1.0), 0.0);
}

TEST(Schedule, ReciprocalAndTableValues) {
  const Schedule r = Schedule::reciprocal();
  EXPECT_DOUBLE_EQ(r.kappa(1), 1.0);
  EXPECT_DOUBLE_EQ(r.kappa(4), 0.25);
  EXPECT_THROW(r.kappa(0), std::invalid_argument);
  for (std::size_t t = 1; t < 100000; t += 997) {
    EXPECT_GT(r.kappa(t), 0.0);
    EXPECT_LE(r.kappa(t), 1.0);
  }
  const Schedule t = Schedule::from_table({1.0, 0.5, 0.2});
  EXPECT_DOUBLE_EQ(t.kappa(2), 0.5);
  EXPECT_DOUBLE_EQ(t.kappa(50), 0.2);
  EXPECT_THROW(Schedule::constant(1.5), std::invalid_argument);
  EXPECT_THROW(Schedule::from_table({0.5, 0.0}), std::invalid_argument);
}

TEST(GameConfig, RejectsRosterThatEmptiesUnderChurn) {
  GameConfig g = make_uniform_config(3);
  ChurnEvent ev;
  ev.frame = 5;
  ev.removed = 3;
  g.churn_events.push_back(ev);
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g.churn_events[0].removed = 2;
  EXPECT_NO_THROW(g.validate());
  g.frame_length = 0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
}
