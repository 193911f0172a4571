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

#ifndef ACIL_IMITATION_HPP_
#define ACIL_IMITATION_HPP_

#include <functional>
#include <string>
#include <vector>

#include "acil/constraint.hpp"
#include "acil/dynamics.hpp"
#include "acil/env.hpp"
#include "acil/mlp.hpp"
#include "acil/trajectory.hpp"

namespace acil {

struct BcConfig {
  int epochs = 300;
  int batch_size = 64;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  int hidden = 64;
  std::uint64_t seed = 0;
};

// Deterministic state-to-action network trained by mean squared error.
// Inputs are standardized with dataset statistics stored alongside the
// parameters in the checkpoint.
class PolicyNet {
 public:
  PolicyNet(int state_dim, int action_dim, int hidden, std::uint64_t seed);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }

  Vector act(const Vector& state) const;

  // Mean over pairs of the squared error, plus its exact flat-parameter
  // gradient.
  std::pair<double, Vector> mse_loss_and_grad(const Matrix& states,
                                              const Matrix& actions) const;
  double mse(const Matrix& states, const Matrix& actions) const;

  void train(const Matrix& states, const Matrix& actions, const BcConfig& cfg);

  Vector flat_params() const { return net_.flat_params(); }
  void set_flat_params(const Vector& p) { net_.set_flat_params(p); }
  void set_standardizer(Standardizer s) { in_std_ = std::move(s); }

  void save(const std::string& path) const;
  static PolicyNet load(const std::string& path);

 private:
  int state_dim_, action_dim_;
  Mlp net_;
  Standardizer in_std_;
};

// Behavior cloning over every (state, action) pair of the dataset.
PolicyNet train_bc(const Dataset& data, const BcConfig& cfg);

struct EvalConfig {
  int episodes = 50;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  bool normalized = false;       // report DTW on normalized states
  bool use_expert_starts = false;  // episode i starts at demo (i mod N)
  int max_steps = -1;            // -1: the environment's own limit
};

struct EvalReport {
  double return_mean = 0.0;
  double return_std = 0.0;
  double dtw_mean = 0.0;
  double dtw_std = 0.0;
  double success_rate = 0.0;
  int episodes = 0;
  std::vector<std::uint64_t> seeds;
  bool normalized = false;
};

using PolicyFn = std::function<Vector(const Vector&)>;

// Rolls the policy out with project(policy(s), s, spec) applied at every
// step. Per episode, the DTW distance is measured against the expert
// trajectory whose initial state is nearest to the rollout's. Returns and
// DTW costs aggregate as mean +- std across seeds (per-seed means);
// success rate pools all episodes. When given, `rollouts` collects every
// evaluation trajectory in order.
EvalReport evaluate_policy(const PolicyFn& policy, const Environment& env,
                           const ConstraintSpec& spec,
                           const Dataset& expert_data, const EvalConfig& cfg,
                           std::vector<Trajectory>* rollouts = nullptr);

// Open-loop baseline: each episode replays the recorded actions of the
// demo whose start is nearest to the episode's initial state, with every
// action projected at the state actually reached.
EvalReport evaluate_replay(const Environment& env, const ConstraintSpec& spec,
                           const Dataset& expert_data, const EvalConfig& cfg,
                           std::vector<Trajectory>* rollouts = nullptr);

std::string eval_report_summary(const EvalReport& report);
void write_eval_csv(const std::vector<std::pair<std::string, EvalReport>>& rows,
                    const std::string& path);

}  // namespace acil

#endif  // ACIL_IMITATION_HPP_
