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

#ifndef ACIL_DYNAMICS_HPP_
#define ACIL_DYNAMICS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "acil/common.hpp"
#include "acil/mlp.hpp"
#include "acil/trajectory.hpp"

namespace acil {

// Diagonal Gaussian over the absolute next state.
struct GaussianPrediction {
  Vector mean;
  Vector log_var;
};

// Forward-model interface the planner consumes; the learned ensemble and
// test oracles both implement it.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;
  virtual int num_members() const = 0;
  virtual GaussianPrediction predict(int member, const Vector& state,
                                     const Vector& action) const = 0;
};

struct Standardizer {
  Vector mean;
  Vector std;

  static Standardizer identity(int dim) {
    return {Vector::Zero(dim), Vector::Ones(dim)};
  }
  Vector apply(const Vector& x) const {
    return (x - mean).cwiseQuotient(std);
  }
  Vector invert(const Vector& x) const { return x.cwiseProduct(std) + mean; }
};

// Growing set of (s, a, s') transitions; seeded with expert data, then
// augmented with surrogate rollouts.
class ReplayBuffer {
 public:
  ReplayBuffer(int state_dim, int action_dim);

  void add(const Vector& s, const Vector& a, const Vector& s_next);
  void add_trajectory(const Trajectory& traj);
  void add_dataset(const Dataset& data);

  int size() const { return static_cast<int>(states_.size()); }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  const Vector& state(int i) const { return states_[i]; }
  const Vector& action(int i) const { return actions_[i]; }
  const Vector& next_state(int i) const { return next_states_[i]; }

 private:
  int state_dim_, action_dim_;
  std::vector<Vector> states_, actions_, next_states_;
};

struct EnsembleConfig {
  int members = 5;
  int hidden = 64;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 256;
  // Per-batch gradient norm cap; the inverse-variance NLL term produces
  // occasional gradient spikes once the variance head tightens.
  double grad_clip = 10.0;
  double log_var_min = -10.0;
  double log_var_max = 2.0;
};

// Per-sample Gaussian negative log-likelihood with constants dropped:
//   sum_d (mean_d - target_d)^2 * exp(-log_var_d) + log_var_d
double gaussian_nll(const Vector& mean, const Vector& log_var,
                    const Vector& target);

// Ensemble of probabilistic networks predicting a Gaussian over the next
// state. Internally each member predicts the standardized state delta;
// the interface converts back to absolute units.
class EnsembleModel : public ForwardModel {
 public:
  EnsembleModel(int state_dim, int action_dim, EnsembleConfig config,
                std::uint64_t seed);

  int num_members() const override { return config_.members; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  const EnsembleConfig& config() const { return config_; }

  GaussianPrediction predict(int member, const Vector& state,
                             const Vector& action) const override;

  // Summed batch NLL in standardized-delta units and its exact gradient
  // with respect to the member's flat parameters.
  std::pair<double, Vector> nll_loss_and_grad(
      int member, const std::vector<int>& indices,
      const ReplayBuffer& buffer) const;

  // Refreshes the standardizers from the buffer, then trains each member
  // on an independent bootstrap resample by mini-batch gradient descent
  // with momentum. Deterministic for a fixed seed.
  void train(const ReplayBuffer& buffer, int epochs, std::uint64_t seed);

  // Mean held-out NLL per sample over the given indices, averaged over
  // members.
  double evaluate_nll(const std::vector<int>& indices,
                      const ReplayBuffer& buffer) const;

  Vector member_params(int member) const;
  void set_member_params(int member, const Vector& params);
  void set_standardizers(Standardizer input, Standardizer delta);

  // Bounds on the reported (absolute-unit) log variance for a dimension:
  // the configured clamp interval shifted by 2*log(delta std).
  std::pair<double, double> log_var_bounds(int dim) const;

  void save(const std::string& path) const;
  static EnsembleModel load(const std::string& path);

 private:
  int state_dim_, action_dim_;
  EnsembleConfig config_;
  std::vector<Mlp> members_;
  Standardizer in_std_;
  Standardizer delta_std_;
};

// TS-infinity rollout of one particle: every step samples from the SAME
// member's Gaussian. `actions` has one row per step; returns H+1 states
// (row 0 is `s0`). When given, `member_log` records the member used at
// each step.
Matrix propagate_ts(const ForwardModel& model, const Vector& s0,
                    const Matrix& actions, int member, Rng& rng,
                    std::vector<int>* member_log = nullptr);

// Multiple particles with a fixed member assignment per particle.
std::vector<Matrix> propagate_ts_particles(const ForwardModel& model,
                                           const Vector& s0,
                                           const Matrix& actions,
                                           const std::vector<int>& assignment,
                                           std::uint64_t seed);

}  // namespace acil

#endif  // ACIL_DYNAMICS_HPP_
