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

#include "acil/dynamics.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "acil/env.hpp"
#include "test_util.hpp"

namespace acil {
namespace {

TEST(GaussianNll, Examples) {
  Vector one = Vector::Ones(1);
  Vector zero = Vector::Zero(1);
  // mean == target, unit variance -> 0.
  EXPECT_DOUBLE_EQ(gaussian_nll(zero, zero, zero), 0.0);
  // 1-D, error 1, unit variance -> 1.
  EXPECT_DOUBLE_EQ(gaussian_nll(one, zero, zero), 1.0);
  // 1-D, no error, variance e -> log-det term alone = 1.
  EXPECT_DOUBLE_EQ(gaussian_nll(zero, one, zero), 1.0);
}

// Builds a buffer of random transitions from the free integrator.
ReplayBuffer integrator_buffer(int n, std::uint64_t seed) {
  FreeIntegrator env;
  ReplayBuffer buffer(4, 2);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    Vector s(4);
    s << rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-1, 1),
        rng.uniform(-1, 1);
    Vector a(2);
    a << rng.uniform(-1, 1), rng.uniform(-1, 1);
    buffer.add(s, a, env.step(s, a).next_state);
  }
  return buffer;
}

TEST(Ensemble, ZeroWeightMemberPredictsCurrentState) {
  EnsembleConfig cfg;
  cfg.members = 1;
  cfg.hidden = 8;
  EnsembleModel model(2, 1, cfg, 0);
  model.set_member_params(0, Vector::Zero(model.member_params(0).size()));

  Vector s(2), a(1);
  s << 0.3, -0.8;
  a << 0.5;
  GaussianPrediction p = model.predict(0, s, a);
  EXPECT_EQ(p.mean, s);  // delta head is identically zero

  // The log variance is a constant of the (zero) biases, independent of
  // the input.
  Vector s2(2), a2(1);
  s2 << -1.0, 2.0;
  a2 << -0.2;
  GaussianPrediction q = model.predict(0, s2, a2);
  EXPECT_EQ(p.log_var, q.log_var);
}

TEST(Ensemble, PredictIsDeterministic) {
  EnsembleModel model(4, 2, {}, 3);
  Vector s = Vector::Constant(4, 0.2), a = Vector::Constant(2, -0.4);
  GaussianPrediction p = model.predict(2, s, a);
  GaussianPrediction q = model.predict(2, s, a);
  EXPECT_EQ(p.mean, q.mean);
  EXPECT_EQ(p.log_var, q.log_var);
}

TEST(Ensemble, NonFiniteInputThrows) {
  EnsembleModel model(2, 1, {}, 0);
  Vector s(2), a(1);
  s << std::numeric_limits<double>::quiet_NaN(), 0.0;
  a << 0.0;
  EXPECT_THROW(model.predict(0, s, a), InputError);
}

TEST(Ensemble, AnalyticGradientMatchesFiniteDifferences) {
  EnsembleConfig cfg;
  cfg.members = 1;
  cfg.hidden = 8;
  EnsembleModel model(2, 1, cfg, 7);

  ReplayBuffer buffer(2, 1);
  Rng rng(5);
  for (int i = 0; i < 4; ++i) {
    Vector s(2), a(1), sn(2);
    s << rng.uniform(-1, 1), rng.uniform(-1, 1);
    a << rng.uniform(-1, 1);
    sn << s[0] + rng.uniform(-0.3, 0.3), s[1] + rng.uniform(-0.3, 0.3);
    buffer.add(s, a, sn);
  }
  std::vector<int> batch = {0, 1, 2, 3};
  auto [loss, grad] = model.nll_loss_and_grad(0, batch, buffer);

  Vector params = model.member_params(0);
  const double h = 1e-5;
  for (int k = 0; k < 20; ++k) {
    int coord = rng.uniform_int(static_cast<int>(params.size()));
    Vector plus = params, minus = params;
    plus[coord] += h;
    minus[coord] -= h;
    model.set_member_params(0, plus);
    double loss_plus = model.nll_loss_and_grad(0, batch, buffer).first;
    model.set_member_params(0, minus);
    double loss_minus = model.nll_loss_and_grad(0, batch, buffer).first;
    model.set_member_params(0, params);
    double numeric = (loss_plus - loss_minus) / (2 * h);
    double denom = std::max({std::abs(numeric), std::abs(grad[coord]), 1e-8});
    EXPECT_LT(std::abs(numeric - grad[coord]) / denom, 1e-4)
        << "coordinate " << coord;
  }
}

TEST(Ensemble, TrainingImprovesHeldOutNll) {
  ReplayBuffer train = integrator_buffer(800, 1);
  ReplayBuffer held = integrator_buffer(200, 2);
  std::vector<int> held_idx(held.size());
  for (int i = 0; i < held.size(); ++i) held_idx[i] = i;

  EnsembleConfig cfg;
  cfg.members = 2;
  cfg.hidden = 32;
  EnsembleModel model(4, 2, cfg, 9);
  // Standardizers come from the training buffer in both measurements.
  EnsembleModel before = model;
  before.train(train, 0, 10);
  double nll_before = before.evaluate_nll(held_idx, held);
  model.train(train, 30, 10);
  double nll_after = model.evaluate_nll(held_idx, held);
  EXPECT_LT(nll_after, nll_before);
}

TEST(Ensemble, TrainingMonotonicityOverSeeds) {
  for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
    ReplayBuffer buffer = integrator_buffer(512, seed);
    std::vector<int> all(buffer.size());
    for (int i = 0; i < buffer.size(); ++i) all[i] = i;
    EnsembleConfig cfg;
    cfg.members = 2;
    cfg.hidden = 32;
    EnsembleModel model(4, 2, cfg, seed);
    EnsembleModel init = model;
    init.train(buffer, 0, seed);  // standardizers only
    double before = init.evaluate_nll(all, buffer);
    model.train(buffer, 20, seed);
    double after = model.evaluate_nll(all, buffer);
    EXPECT_LT(after, before) << "seed " << seed;
  }
}

TEST(Ensemble, LogVarianceClampRespected) {
  ReplayBuffer buffer = integrator_buffer(400, 4);
  EnsembleConfig cfg;
  cfg.members = 3;
  cfg.hidden = 16;
  EnsembleModel model(4, 2, cfg, 5);
  model.train(buffer, 10, 6);
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    Vector s(4);
    s << rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-2, 2),
        rng.uniform(-2, 2);
    Vector a(2);
    a << rng.uniform(-1, 1), rng.uniform(-1, 1);
    GaussianPrediction p = model.predict(i % 3, s, a);
    for (int d = 0; d < 4; ++d) {
      auto [lo, hi] = model.log_var_bounds(d);
      EXPECT_GE(p.log_var[d], lo - 1e-12);
      EXPECT_LE(p.log_var[d], hi + 1e-12);
    }
  }
}

TEST(Ensemble, TrainDeterminism) {
  ReplayBuffer buffer = integrator_buffer(256, 3);
  EnsembleConfig cfg;
  cfg.members = 2;
  cfg.hidden = 16;
  EnsembleModel a(4, 2, cfg, 77);
  EnsembleModel b(4, 2, cfg, 77);
  a.train(buffer, 5, 13);
  b.train(buffer, 5, 13);
  for (int m = 0; m < cfg.members; ++m)
    EXPECT_EQ(a.member_params(m), b.member_params(m));
}

TEST(Ensemble, BootstrapMakesMembersDiffer) {
  ReplayBuffer buffer = integrator_buffer(256, 3);
  EnsembleConfig cfg;
  cfg.members = 2;
  cfg.hidden = 16;
  EnsembleModel model(4, 2, cfg, 1);
  model.train(buffer, 5, 2);
  EXPECT_NE(model.member_params(0), model.member_params(1));
}

TEST(Ensemble, CheckpointRoundTrip) {
  ReplayBuffer buffer = integrator_buffer(128, 6);
  EnsembleConfig cfg;
  cfg.members = 2;
  cfg.hidden = 16;
  EnsembleModel model(4, 2, cfg, 21);
  model.train(buffer, 3, 22);

  std::string path = testing::temp_dir("dyn_ckpt") + "/model.jsonl";
  model.save(path);
  EnsembleModel back = EnsembleModel::load(path);
  for (int m = 0; m < cfg.members; ++m)
    EXPECT_EQ(model.member_params(m), back.member_params(m));
  Vector s = Vector::Constant(4, 0.37), a = Vector::Constant(2, -0.21);
  GaussianPrediction p = model.predict(1, s, a);
  GaussianPrediction q = back.predict(1, s, a);
  EXPECT_EQ(p.mean, q.mean);
  EXPECT_EQ(p.log_var, q.log_var);
}

TEST(PropagateTs, DeterministicChainWithZeroVariance) {
  testing::AdditiveModel model;
  Vector s0 = Vector::Zero(1);
  Matrix actions(2, 1);
  actions << 1.0, 1.0;
  Rng rng(0);
  Matrix states = propagate_ts(model, s0, actions, 0, rng);
  ASSERT_EQ(states.rows(), 3);
  EXPECT_DOUBLE_EQ(states(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(states(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(states(2, 0), 2.0);
}

TEST(PropagateTs, ZeroHorizonReturnsInitialState) {
  testing::AdditiveModel model;
  Vector s0 = Vector::Constant(3, 0.5);
  Matrix actions(0, 3);
  Rng rng(0);
  Matrix states = propagate_ts(model, s0, actions, 0, rng);
  ASSERT_EQ(states.rows(), 1);
  EXPECT_EQ(Vector(states.row(0)), s0);
}

TEST(PropagateTs, SeededDeterminismAndMemberConstancy) {
  EnsembleModel model(4, 2, {}, 40);
  Vector s0 = Vector::Constant(4, 0.1);
  Matrix actions = Matrix::Constant(5, 2, 0.2);

  std::vector<int> log1, log2;
  Rng r1(9), r2(9);
  Matrix a = propagate_ts(model, s0, actions, 3, r1, &log1);
  Matrix b = propagate_ts(model, s0, actions, 3, r2, &log2);
  EXPECT_EQ(a, b);
  ASSERT_EQ(log1.size(), 5u);
  for (int member : log1) EXPECT_EQ(member, 3);  // TS-infinity
  EXPECT_EQ(log1, log2);
}

TEST(PropagateTs, ParticleAssignmentValidated) {
  EnsembleModel model(4, 2, {}, 40);
  Vector s0 = Vector::Zero(4);
  Matrix actions = Matrix::Zero(2, 2);
  EXPECT_THROW(propagate_ts_particles(model, s0, actions, {7}, 0), InputError);
  auto rollouts = propagate_ts_particles(model, s0, actions, {0, 4, 2}, 0);
  EXPECT_EQ(rollouts.size(), 3u);
}

}  // namespace
}  // namespace acil
