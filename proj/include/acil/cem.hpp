// Copyright 2026 The ACIL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ACIL_CEM_HPP_
#define ACIL_CEM_HPP_

#include <functional>
#include <optional>
#include <vector>

#include "acil/common.hpp"
#include "acil/constraint.hpp"
#include "acil/dtw.hpp"
#include "acil/dynamics.hpp"
#include "acil/trajectory.hpp"

namespace acil {

struct CemConfig {
  int population = 32;
  int elites = 6;
  int iterations = 3;
  double momentum = 0.1;  // weight kept on the previous distribution
  int horizon = 10;
  double init_std = 0.3;
  int max_rejection = 10;
  int particles = 1;       // model rollouts averaged per candidate
  int steps_per_plan = 1;  // actions executed before re-planning
  int threads = 1;
  // Test hook: place the expert's own action segment at candidate 0 of
  // iteration 0.
  bool inject_expert_candidate = false;

  void validate() const;
};

struct ErcConfig {
  double beta = 0.05;  // expert blend weight
  int horizon = 5;     // steps receiving the blend (h <= horizon)
};

// Independent Gaussian per (step, action dim).
struct CemDistribution {
  Matrix mean;  // H x d_a
  Matrix var;   // H x d_a
};

// Static per-dimension action bounds used for the variance cap. When no
// box-like bounds exist the cap falls back to w = init std.
struct ActionBounds {
  bool valid = false;
  Vector lower;
  Vector upper;
  double fallback_w = 0.0;
};

ActionBounds static_action_bounds(const ConstraintSpec& spec,
                                  double action_bound, double init_std);

// Momentum-blended distribution update, then the variance of every
// coordinate is capped at w/2 where w is the distance from the blended
// mean to the nearest static bound.
CemDistribution cem_update(const CemDistribution& current,
                           const Matrix& elite_mean, const Matrix& elite_var,
                           double alpha, const ActionBounds& bounds);

// Draws an H-step action sequence; every step is re-drawn until it is
// feasible at `s_ref` (up to `max_tries`), then projected as a fallback.
// Draws are clamped to the native action range first.
Matrix sample_feasible_sequence(const CemDistribution& dist,
                                const ConstraintSpec& spec,
                                const Vector& s_ref, int max_tries,
                                double action_bound, Rng& rng,
                                int* fallback_count = nullptr);

// Blends the expert action segment into the first `erc.horizon + 1` steps:
//   a_h = beta * project(a^e_h, s_h) + (1 - beta) * a^sampled_h
// Rows past the expert segment or past the blend horizon pass through
// bitwise; beta = 0 is an exact identity.
Matrix erc_blend(const Matrix& sampled, const Matrix& expert_actions,
                 const ErcConfig& erc, const ConstraintSpec& spec,
                 const Matrix& predicted_states);

struct PlanDiagnostics {
  std::vector<std::vector<double>> iteration_costs;
  std::vector<CemDistribution> distributions;  // after each update
  int rejection_fallbacks = 0;
};

struct CandidateEval {
  double cost = 0.0;
  Matrix actions;  // executed actions (post blend + projection)
  Matrix states;   // predicted states, raw units
  WarpingPath path;
};

using CandidateEvaluator = std::function<CandidateEval(
    const Matrix& sampled, Rng& rng, int iteration, int candidate)>;

struct CemResult {
  CandidateEval best;
  int best_iteration = 0;
  int best_candidate = 0;
  CemDistribution final_distribution;
};

// Generic CEM loop over action sequences: sample -> evaluate -> elite
// update, repeated `iterations` times. The returned best is the lowest
// cost over every evaluated candidate, ties broken by (iteration,
// candidate index). Elite statistics are computed from the raw sampled
// sequences. Starts from `init` when given, else from a zero-mean
// distribution at the initial std. Deterministic for a fixed seed and
// independent of `threads`.
CemResult cem_optimize(const CandidateEvaluator& evaluate, int action_dim,
                       const CemConfig& cem, const ConstraintSpec& spec,
                       const Vector& s_ref, double action_bound,
                       std::uint64_t seed, PlanDiagnostics* diag = nullptr,
                       const Matrix* injected_candidate = nullptr,
                       const CemDistribution* init = nullptr);

struct PlanResult {
  Vector first_action;
  Matrix best_actions;  // horizon x d_a
  Matrix best_states;   // (horizon+1) x d_s
  double best_cost = 0.0;
  int advancement = 0;  // 0 or 1
};

// One receding-horizon planning step: candidates are sampled under the
// constraint, blended with projected expert actions, projected per step
// against their predicted states, rolled out through the model, and
// scored by DTW against the normalized expert segment starting at t_pg
// (final segment state excluded when the segment has >= 2 states). The
// planner owns the sampling distribution across steps of one episode:
// after each plan the mean shifts left by the executed step count and the
// variance resets.
class CemPlanner {
 public:
  CemPlanner(const ForwardModel& model, ConstraintSpec spec, CemConfig cem,
             ErcConfig erc, double action_bound);

  void start_episode(const Trajectory& expert, std::uint64_t seed);
  PlanResult plan_step(const Vector& current_state, int t_pg,
                       PlanDiagnostics* diag = nullptr);

  const CemDistribution& distribution() const { return dist_; }
  const NormalizationStats& stats() const { return stats_; }

 private:
  const ForwardModel& model_;
  ConstraintSpec spec_;
  CemConfig cem_;
  ErcConfig erc_;
  double action_bound_;

  const Trajectory* expert_ = nullptr;
  NormalizationStats stats_;
  std::uint64_t episode_seed_ = 0;
  int step_index_ = 0;
  CemDistribution dist_;
};

}  // namespace acil

#endif  // ACIL_CEM_HPP_
