// Local learning rule: each node nudges its transmission probability by
// the frame's stochastic subgradient, clamped below at p_min.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "aoigame/channel.hpp"
#include "aoigame/core_model.hpp"
#include "aoigame/rng.hpp"

namespace aoigame {

/// v = e^(-rho1 C_av) - 1 / ((1 + Delta_av) e^rho2) - p.
inline double subgradient(const FrameObservation& obs, double p, const NodeParams& params) {
  return std::exp(-params.rho1 * obs.avg_cost) - 1.0 / ((1.0 + obs.avg_age) * std::exp(params.rho2)) - p;
}

/// max{p_min, p + kappa v}.
inline double learning_update(double p, double v, double kappa, double p_min) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("learning_update: kappa must lie in (0,1]");
  return std::max(p_min, p + kappa * v);
}

/// Conditional mean of the subgradient in the large-frame limit:
/// e^(-alpha p_l) - p_l / b_l - p_l.
inline double expected_drift(const ProbVector& P, std::size_t l, const NodeParams& params) {
  const double p = P.at(l);
  return std::exp(-params.alpha * p) - p / b_factor(P, l, params.rho2) - p;
}

/// Closed-form large-frame observation at profile P (no sampling).
inline FrameObservation expected_observation(const ProbVector& P, std::size_t l, const NodeParams& params) {
  FrameObservation o;
  o.avg_cost = expected_cost(P.at(l), params.cost_per_transmission);
  o.avg_age = expected_age(P, l);
  return o;
}

enum class LearningMode { stochastic, expected };

namespace detail {

/// Shared frame loop for the collision channel and the round-robin
/// baseline. `observe(P, nodes, frame, record)` fills observations,
/// collisions and subgradients of the record.
template <class ObserveFrame>
Trajectory run_frames(const GameConfig& config, std::size_t frames, ObserveFrame&& observe) {
  config.validate();
  if (frames < 1) throw std::invalid_argument("run_learning: frames must be >= 1");

  std::vector<NodeParams> roster = config.nodes;
  std::vector<double> probs;
  if (config.initial_probabilities) {
    probs = *config.initial_probabilities;
  } else {
    for (std::size_t l = 0; l < roster.size(); ++l)
      probs.push_back(Stream(config.seed, StreamTag::initial_probability, 1, l)
                          .uniform_open(roster[l].p_min, 1.0));
  }
  ProbVector P(std::move(probs));
  check_profile(P, roster);
  std::vector<std::size_t> clock(roster.size(), 1);

  Trajectory traj;
  traj.records.reserve(frames);
  std::size_t next_event = 0;
  for (std::size_t t = 1; t <= frames; ++t) {
    bool changed = false;
    while (next_event < config.churn_events.size() && config.churn_events[next_event].frame == t) {
      const auto& ev = config.churn_events[next_event++];
      if (ev.removed >= roster.size()) throw std::invalid_argument("run_learning: empty roster");
      roster.resize(roster.size() - ev.removed);
      P.truncate(roster.size());
      clock.resize(roster.size());
      for (const auto& np : ev.added) {
        const std::size_t l = roster.size();
        roster.push_back(np);
        P.push_back(Stream(config.seed, StreamTag::initial_probability, t, l).uniform_open(np.p_min, 1.0));
        clock.push_back(1);
      }
      changed = true;
    }
    if (roster.empty()) throw std::invalid_argument("run_learning: empty roster");
    const auto& sched = config.schedule;
    const bool periodic = sched.reinit_period > 0 && t > 1 && (t - 1) % sched.reinit_period == 0;
    if ((changed && sched.reinit_on_churn) || periodic) std::fill(clock.begin(), clock.end(), 1);

    FrameRecord rec;
    rec.frame = t;
    rec.probabilities = P;
    observe(P, std::span<const NodeParams>(roster), t, rec);

    std::vector<double> next(roster.size());
    rec.kappas.resize(roster.size());
    for (std::size_t l = 0; l < roster.size(); ++l) {
      const double kappa = sched.kappa(clock[l]++);
      rec.kappas[l] = kappa;
      next[l] = learning_update(P[l], rec.subgradients[l], kappa, roster[l].p_min);
    }
    P = ProbVector(std::move(next));
    traj.records.push_back(std::move(rec));
  }
  traj.final_probabilities = std::move(P);
  return traj;
}

}  // namespace detail

/// Runs the learning rule for `frames` frames. In stochastic mode every
/// frame is simulated on the collision channel; in expected mode the frame
/// statistics are replaced by their closed-form limits. Churn events
/// change the roster between frames; joining nodes start from a uniform
/// draw on (p_min, 1) and their own clock at 1.
inline Trajectory run_learning(const GameConfig& config, std::size_t frames, LearningMode mode) {
  return detail::run_frames(config, frames, [&](const ProbVector& P, std::span<const NodeParams> nodes,
                                                std::size_t t, FrameRecord& rec) {
    rec.subgradients.resize(nodes.size());
    if (mode == LearningMode::stochastic) {
      FrameResult fr = simulate_frame(P, nodes, config.frame_length, config.seed, t);
      rec.collisions = fr.collisions;
      rec.observations = std::move(fr.observations);
      for (std::size_t l = 0; l < nodes.size(); ++l)
        rec.subgradients[l] = subgradient(rec.observations[l], P[l], nodes[l]);
    } else {
      rec.observations.resize(nodes.size());
      for (std::size_t l = 0; l < nodes.size(); ++l) {
        rec.observations[l] = expected_observation(P, l, nodes[l]);
        rec.subgradients[l] = expected_drift(P, l, nodes[l]);
      }
    }
  });
}

}  // namespace aoigame
