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

#ifndef ACIL_TESTS_TEST_UTIL_HPP_
#define ACIL_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "acil/dynamics.hpp"
#include "acil/env.hpp"

namespace acil::testing {

// Exact-dynamics model: the mean is the true environment transition and
// the variance is zero (log variance -inf underflows to exactly 0 std).
class OracleModel : public ForwardModel {
 public:
  explicit OracleModel(const Environment& env, int members = 1)
      : env_(env), members_(members) {}

  int num_members() const override { return members_; }

  GaussianPrediction predict(int member, const Vector& state,
                             const Vector& action) const override {
    (void)member;
    GaussianPrediction pred;
    pred.mean = env_.step(state, action).next_state;
    pred.log_var = Vector::Constant(state.size(), -1e9);
    return pred;
  }

 private:
  const Environment& env_;
  int members_;
};

// s' = s + a with zero variance; for deterministic chain checks.
class AdditiveModel : public ForwardModel {
 public:
  explicit AdditiveModel(int members = 1) : members_(members) {}
  int num_members() const override { return members_; }
  GaussianPrediction predict(int member, const Vector& state,
                             const Vector& action) const override {
    (void)member;
    return {state + action, Vector::Constant(state.size(), -1e9)};
  }

 private:
  int members_;
};

inline Matrix random_sequence(Rng& rng, int rows, int cols, double scale = 2.0) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-scale, scale);
  return m;
}

// An expert trajectory on the free integrator that ends at rest: a push
// phase, one braking action that zeroes the velocity, and a final no-op,
// so the last two states are identical.
inline Trajectory braked_expert(const Environment& env, const Vector& s0,
                                int push_steps) {
  std::vector<Vector> states{s0};
  std::vector<Vector> actions;
  Vector s = s0;
  for (int t = 0; t < push_steps; ++t) {
    Vector a(2);
    a << 0.2, 0.1;
    actions.push_back(a);
    s = env.step(s, a).next_state;
    states.push_back(s);
  }
  Vector brake = -s.tail(2) / 0.1;  // v' = v + a*dt = 0
  actions.push_back(brake);
  s = env.step(s, brake).next_state;
  states.push_back(s);
  Vector zero = Vector::Zero(2);
  actions.push_back(zero);
  s = env.step(s, zero).next_state;
  states.push_back(s);

  Trajectory traj;
  traj.states.resize(static_cast<int>(states.size()), 4);
  traj.actions.resize(static_cast<int>(actions.size()), 2);
  for (size_t i = 0; i < states.size(); ++i) traj.states.row(i) = states[i];
  for (size_t i = 0; i < actions.size(); ++i) traj.actions.row(i) = actions[i];
  return traj;
}

inline std::string temp_dir(const std::string& name) {
  auto path = std::filesystem::temp_directory_path() / "acil_tests" / name;
  std::filesystem::create_directories(path);
  return path.string();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace acil::testing

#endif  // ACIL_TESTS_TEST_UTIL_HPP_
