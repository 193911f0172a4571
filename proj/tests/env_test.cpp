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

#include "acil/env.hpp"

#include <gtest/gtest.h>

#include "acil/trajectory.hpp"
#include "test_util.hpp"

namespace acil {
namespace {

Vector state4(double px, double py, double vx, double vy) {
  Vector s(4);
  s << px, py, vx, vy;
  return s;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

TEST(Env, PointMassUpdateRule) {
  FreeIntegrator env;
  StepResult r = env.step(state4(0, 0, 0, 0), vec2(1, 0));
  EXPECT_NEAR(r.next_state[0], 0.01, 1e-15);
  EXPECT_DOUBLE_EQ(r.next_state[1], 0.0);
  EXPECT_DOUBLE_EQ(r.next_state[2], 0.1);
  EXPECT_DOUBLE_EQ(r.next_state[3], 0.0);

  // Drift only.
  r = env.step(state4(0, 0, 0.5, 0), vec2(0, 0));
  EXPECT_DOUBLE_EQ(r.next_state[0], 0.05);
  EXPECT_DOUBLE_EQ(r.next_state[2], 0.5);
}

TEST(Env, WallCollisionZeroesVelocityAndClampsPosition) {
  PointMassMaze env(PointMassMaze::default_grid());
  // Cell (7,1) is free, column 8 is wall; drive right into it.
  Vector s = state4(7.995, 1.5, 0.5, 0.0);
  StepResult r = env.step(s, vec2(1, 0));
  EXPECT_DOUBLE_EQ(r.next_state[2], 0.0);          // vx zeroed
  EXPECT_NEAR(r.next_state[0], 8.0, 1e-6);         // clamped to the face
  EXPECT_LT(r.next_state[0], 8.0);                 // still inside the cell
  EXPECT_DOUBLE_EQ(r.next_state[1], 1.5);

  // Same along y: row 0 above is wall.
  s = state4(1.5, 1.005, 0.0, -0.5);
  r = env.step(s, vec2(0, -1));
  EXPECT_DOUBLE_EQ(r.next_state[3], 0.0);
  EXPECT_NEAR(r.next_state[1], 1.0, 1e-6);
  EXPECT_GT(r.next_state[1], 1.0);
}

TEST(Env, StepIsPure) {
  PointMassMaze env(PointMassMaze::default_grid());
  Vector s = state4(1.3, 1.7, 0.2, -0.1);
  StepResult a = env.step(s, vec2(0.3, -0.2));
  StepResult b = env.step(s, vec2(0.3, -0.2));
  EXPECT_EQ(a.next_state, b.next_state);
  EXPECT_EQ(a.reward, b.reward);
  EXPECT_EQ(a.done, b.done);
}

TEST(Env, GoalRewardAndTermination) {
  PointMassMaze env(PointMassMaze::default_grid());
  // Goal cell is (1, 3) in the default grid; step into it.
  Vector s = state4(2.05, 3.5, -0.5, 0.0);
  StepResult r = env.step(s, vec2(0, 0));
  ASSERT_TRUE(env.at_goal(r.next_state));
  EXPECT_DOUBLE_EQ(r.reward, 1.0);
  EXPECT_TRUE(r.done);
}

TEST(Env, PdControllerFormula) {
  // k_p (w - p) - k_d v, clamped per dimension to [-1, 1].
  Vector w = vec2(1, 0), zero = vec2(0, 0);
  Vector a = pd_waypoint_action(w, vec2(0, 0), zero, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(a[0], 1.0);
  EXPECT_DOUBLE_EQ(a[1], 0.0);

  a = pd_waypoint_action(w, w, zero, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(a[0], 0.0);
  EXPECT_DOUBLE_EQ(a[1], 0.0);

  a = pd_waypoint_action(w, vec2(0, 0), vec2(3, 0), 2.0, 1.0);
  EXPECT_DOUBLE_EQ(a[0], -1.0);
  EXPECT_DOUBLE_EQ(a[1], 0.0);
}

TEST(Env, ExpertDatasetCardinality) {
  FreeIntegrator env;
  Dataset data = generate_expert_dataset(env, 2, 5, 3);
  ASSERT_EQ(data.size(), 2);
  for (const auto& t : data.trajectories) {
    EXPECT_LE(t.length(), 5);
    EXPECT_EQ(t.num_states(), t.length() + 1);
    EXPECT_TRUE(t.valid());
  }
}

TEST(Env, ExpertDatasetDeterminism) {
  PointMassMaze env(PointMassMaze::default_grid());
  Dataset a = generate_expert_dataset(env, 3, 200, 17);
  Dataset b = generate_expert_dataset(env, 3, 200, 17);
  std::string dir = testing::temp_dir("env_determinism");
  write_dataset(a, dir + "/a.jsonl");
  write_dataset(b, dir + "/b.jsonl");
  EXPECT_EQ(testing::read_file(dir + "/a.jsonl"),
            testing::read_file(dir + "/b.jsonl"));
}

// The scripted expert must solve the maze from every sampled start.
TEST(Env, MazeExpertAlwaysReachesGoal) {
  PointMassMaze env(PointMassMaze::default_grid());
  Dataset data = generate_expert_dataset(env, 100, 400, 42);
  for (const auto& t : data.trajectories) {
    EXPECT_LT(t.length(), 400);
    EXPECT_TRUE(env.at_goal(t.states.row(t.num_states() - 1)));
  }
}

TEST(Env, InitialStateSeeded) {
  PointMassMaze env(PointMassMaze::default_grid());
  Rng r1(5), r2(5);
  EXPECT_EQ(env.sample_initial_state(r1), env.sample_initial_state(r2));
}

TEST(Env, DatasetRoundTrip) {
  PointMassMaze env(PointMassMaze::default_grid());
  Dataset data = generate_expert_dataset(env, 2, 150, 11);
  data.constraint_text = "box:0.1";
  std::string dir = testing::temp_dir("env_roundtrip");
  write_dataset(data, dir + "/d.jsonl");
  Dataset back = read_dataset(dir + "/d.jsonl");
  ASSERT_EQ(back.size(), data.size());
  EXPECT_EQ(back.env_name, data.env_name);
  EXPECT_EQ(back.constraint_text, data.constraint_text);
  EXPECT_EQ(back.seed, data.seed);
  for (int i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back.trajectories[i].states, data.trajectories[i].states);
    EXPECT_EQ(back.trajectories[i].actions, data.trajectories[i].actions);
  }
}

TEST(Env, UnknownEnvironmentName) {
  EXPECT_THROW(make_environment("no_such_env"), ConfigError);
}

}  // namespace
}  // namespace acil
