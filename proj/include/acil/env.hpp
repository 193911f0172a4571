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

#ifndef ACIL_ENV_HPP_
#define ACIL_ENV_HPP_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "acil/common.hpp"
#include "acil/trajectory.hpp"

namespace acil {

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool done = false;
};

// Deterministic desk-scale environment. The transition is a pure function
// of (state, action); only initial-state sampling consumes randomness.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const std::string& name() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  // Native action range: the action space is [-bound, bound]^d_a.
  virtual double action_bound() const { return 1.0; }
  virtual int max_episode_steps() const = 0;

  virtual Vector sample_initial_state(Rng& rng) const = 0;
  virtual StepResult step(const Vector& state, const Vector& action) const = 0;
  virtual bool at_goal(const Vector& state) const { return false; }

  // Scripted unconstrained expert for dataset generation.
  virtual Vector expert_action(const Vector& state) const = 0;
};

// Waypoint-following PD controller, clamped per dimension to [-1, 1]:
//   a = clamp(k_p (w - p) - k_d v)
Vector pd_waypoint_action(const Vector& waypoint, const Vector& position,
                          const Vector& velocity, double k_p, double k_d,
                          double bound = 1.0);

// Point mass in a grid maze. State (px, py, vx, vy) with positions in
// cells and velocities in cells/step-unit; 2-D acceleration actions.
//   v' = v + a*dt,  p' = p + v'*dt,  dt = 0.1
// Hitting a wall zeroes the blocked axis' velocity and clamps the position
// to the wall face. Reward 1 in the goal cell, 0 elsewhere; episodes end at
// the goal or at the step limit.
class PointMassMaze : public Environment {
 public:
  // Rows of '#' (wall), '.' (free), 'S' (start cell), 'G' (goal cell).
  explicit PointMassMaze(std::vector<std::string> grid, int max_steps = 400,
                         double expert_kp = 3.0, double expert_kd = 3.0);
  static std::vector<std::string> default_grid();

  const std::string& name() const override { return name_; }
  int state_dim() const override { return 4; }
  int action_dim() const override { return 2; }
  int max_episode_steps() const override { return max_steps_; }

  Vector sample_initial_state(Rng& rng) const override;
  StepResult step(const Vector& state, const Vector& action) const override;
  bool at_goal(const Vector& state) const override;
  Vector expert_action(const Vector& state) const override;

  const std::vector<Vector>& waypoints() const { return waypoints_; }

 private:
  bool blocked(double x, double y) const;

  std::string name_ = "point_mass_maze";
  std::vector<std::string> grid_;
  int max_steps_;
  double expert_kp_;
  double expert_kd_;
  int start_row_ = -1, start_col_ = -1;
  int goal_row_ = -1, goal_col_ = -1;
  std::vector<Vector> waypoints_;  // BFS path through cell centers
};

// Wall-free double integrator with the same update rule; no reward and no
// terminal state. The scripted expert drives toward a fixed goal point.
class FreeIntegrator : public Environment {
 public:
  explicit FreeIntegrator(int max_steps = 100,
                          Eigen::Vector2d goal = {2.0, 1.0},
                          double expert_kp = 2.0, double expert_kd = 3.0);

  const std::string& name() const override { return name_; }
  int state_dim() const override { return 4; }
  int action_dim() const override { return 2; }
  int max_episode_steps() const override { return max_steps_; }

  Vector sample_initial_state(Rng& rng) const override;
  StepResult step(const Vector& state, const Vector& action) const override;
  Vector expert_action(const Vector& state) const override;

 private:
  std::string name_ = "free_integrator";
  int max_steps_;
  Eigen::Vector2d goal_;
  double expert_kp_;
  double expert_kd_;
};

std::unique_ptr<Environment> make_environment(const std::string& name,
                                              int max_steps = -1);

// Rolls out `count` episodes under the scripted expert with no constraint
// enforcement. Per-trajectory randomness is derived from `seed`, so the
// result is byte-identical for a fixed seed.
Dataset generate_expert_dataset(const Environment& env, int count,
                                int max_steps, std::uint64_t seed);

// Single rollout of an arbitrary policy from a given initial state.
Trajectory rollout(const Environment& env,
                   const std::function<Vector(const Vector&)>& policy,
                   const Vector& initial_state, int max_steps);

}  // namespace acil

#endif  // ACIL_ENV_HPP_
