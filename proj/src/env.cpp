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

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

namespace acil {

namespace {

constexpr double kDt = 0.1;
// Resting offset from a wall face; keeps the clamped position inside the
// open cell under floor().
constexpr double kWallInset = 1e-9;

}  // namespace

Vector pd_waypoint_action(const Vector& waypoint, const Vector& position,
                          const Vector& velocity, double k_p, double k_d,
                          double bound) {
  Vector a = k_p * (waypoint - position) - k_d * velocity;
  return a.cwiseMax(-bound).cwiseMin(bound);
}

PointMassMaze::PointMassMaze(std::vector<std::string> grid, int max_steps,
                             double expert_kp, double expert_kd)
    : grid_(std::move(grid)),
      max_steps_(max_steps),
      expert_kp_(expert_kp),
      expert_kd_(expert_kd) {
  if (grid_.empty()) throw ConfigError("maze: empty grid");
  for (size_t r = 0; r < grid_.size(); ++r) {
    if (grid_[r].size() != grid_[0].size())
      throw ConfigError("maze: ragged grid rows");
    for (size_t c = 0; c < grid_[r].size(); ++c) {
      if (grid_[r][c] == 'S') {
        start_row_ = static_cast<int>(r);
        start_col_ = static_cast<int>(c);
      } else if (grid_[r][c] == 'G') {
        goal_row_ = static_cast<int>(r);
        goal_col_ = static_cast<int>(c);
      }
    }
  }
  if (start_row_ < 0 || goal_row_ < 0)
    throw ConfigError("maze: grid needs one 'S' and one 'G' cell");

  // BFS from start to goal over free cells; waypoints are cell centers.
  const int rows = static_cast<int>(grid_.size());
  const int cols = static_cast<int>(grid_[0].size());
  std::vector<int> prev(rows * cols, -1);
  std::vector<bool> seen(rows * cols, false);
  auto id = [cols](int r, int c) { return r * cols + c; };
  std::deque<std::pair<int, int>> queue{{start_row_, start_col_}};
  seen[id(start_row_, start_col_)] = true;
  while (!queue.empty()) {
    auto [r, c] = queue.front();
    queue.pop_front();
    if (r == goal_row_ && c == goal_col_) break;
    const int dr[] = {0, 0, -1, 1};
    const int dc[] = {-1, 1, 0, 0};
    for (int k = 0; k < 4; ++k) {
      int nr = r + dr[k], nc = c + dc[k];
      if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
      if (grid_[nr][nc] == '#' || seen[id(nr, nc)]) continue;
      seen[id(nr, nc)] = true;
      prev[id(nr, nc)] = id(r, c);
      queue.emplace_back(nr, nc);
    }
  }
  if (!seen[id(goal_row_, goal_col_)])
    throw ConfigError("maze: no path from start to goal");
  std::vector<std::pair<int, int>> cells;
  for (int cur = id(goal_row_, goal_col_); cur != -1; cur = prev[cur])
    cells.emplace_back(cur / cols, cur % cols);
  std::reverse(cells.begin(), cells.end());
  for (auto [r, c] : cells) {
    Vector w(2);
    w << c + 0.5, r + 0.5;
    waypoints_.push_back(w);
  }
}

std::vector<std::string> PointMassMaze::default_grid() {
  // S-shaped course with a dead-end pocket past each turn: overshooting a
  // turn at speed is costly, a timely turn is not.
  return {
      "#########",
      "#S......#",
      "#####.###",
      "#G....###",
      "#####.###",
      "#####.###",
      "#########",
  };
}

bool PointMassMaze::blocked(double x, double y) const {
  int c = static_cast<int>(std::floor(x));
  int r = static_cast<int>(std::floor(y));
  if (r < 0 || r >= static_cast<int>(grid_.size()) || c < 0 ||
      c >= static_cast<int>(grid_[0].size()))
    return true;
  return grid_[r][c] == '#';
}

Vector PointMassMaze::sample_initial_state(Rng& rng) const {
  Vector s(4);
  s << start_col_ + 0.5 + rng.uniform(-0.25, 0.25),
      start_row_ + 0.5 + rng.uniform(-0.25, 0.25), 0.0, 0.0;
  return s;
}

StepResult PointMassMaze::step(const Vector& state,
                               const Vector& action) const {
  if (!state.allFinite() || !action.allFinite())
    throw InputError("maze step: non-finite state or action");
  double vx = state[2] + action[0] * kDt;
  double vy = state[3] + action[1] * kDt;
  double px = state[0];
  double py = state[1];

  // Resolve each axis separately: clamp to the wall face and zero the
  // blocked velocity component.
  double nx = px + vx * kDt;
  if (blocked(nx, py)) {
    nx = vx > 0.0 ? std::floor(nx) - kWallInset : std::floor(nx) + 1.0 + kWallInset;
    vx = 0.0;
  }
  double ny = py + vy * kDt;
  if (blocked(nx, ny)) {
    ny = vy > 0.0 ? std::floor(ny) - kWallInset : std::floor(ny) + 1.0 + kWallInset;
    vy = 0.0;
  }

  StepResult out;
  out.next_state = Vector(4);
  out.next_state << nx, ny, vx, vy;
  out.done = at_goal(out.next_state);
  out.reward = out.done ? 1.0 : 0.0;
  return out;
}

bool PointMassMaze::at_goal(const Vector& state) const {
  return static_cast<int>(std::floor(state[0])) == goal_col_ &&
         static_cast<int>(std::floor(state[1])) == goal_row_;
}

Vector PointMassMaze::expert_action(const Vector& state) const {
  // Pure pursuit over the BFS path: aim at the successor of the nearest
  // waypoint, so the action is a pure function of the state.
  Vector p = state.head(2);
  Vector v = state.tail(2);
  int nearest = 0;
  double best = (waypoints_[0] - p).squaredNorm();
  for (size_t i = 1; i < waypoints_.size(); ++i) {
    double d = (waypoints_[i] - p).squaredNorm();
    if (d < best) {
      best = d;
      nearest = static_cast<int>(i);
    }
  }
  int target = std::min(nearest + 1, static_cast<int>(waypoints_.size()) - 1);
  return pd_waypoint_action(waypoints_[target], p, v, expert_kp_, expert_kd_);
}

FreeIntegrator::FreeIntegrator(int max_steps, Eigen::Vector2d goal,
                               double expert_kp, double expert_kd)
    : max_steps_(max_steps),
      goal_(std::move(goal)),
      expert_kp_(expert_kp),
      expert_kd_(expert_kd) {}

Vector FreeIntegrator::sample_initial_state(Rng& rng) const {
  Vector s(4);
  s << rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.0, 0.0;
  return s;
}

StepResult FreeIntegrator::step(const Vector& state,
                                const Vector& action) const {
  if (!state.allFinite() || !action.allFinite())
    throw InputError("free integrator step: non-finite state or action");
  StepResult out;
  out.next_state = Vector(4);
  double vx = state[2] + action[0] * kDt;
  double vy = state[3] + action[1] * kDt;
  out.next_state << state[0] + vx * kDt, state[1] + vy * kDt, vx, vy;
  return out;
}

Vector FreeIntegrator::expert_action(const Vector& state) const {
  return pd_waypoint_action(goal_, state.head(2), state.tail(2), expert_kp_,
                            expert_kd_);
}

std::unique_ptr<Environment> make_environment(const std::string& name,
                                              int max_steps) {
  if (name == "point_mass_maze")
    return std::make_unique<PointMassMaze>(PointMassMaze::default_grid(),
                                           max_steps > 0 ? max_steps : 400);
  if (name == "free_integrator")
    return std::make_unique<FreeIntegrator>(max_steps > 0 ? max_steps : 100);
  throw ConfigError("env.name: unknown environment '" + name + "'");
}

Trajectory rollout(const Environment& env,
                   const std::function<Vector(const Vector&)>& policy,
                   const Vector& initial_state, int max_steps) {
  std::vector<Vector> states{initial_state};
  std::vector<Vector> actions;
  Vector s = initial_state;
  for (int t = 0; t < max_steps; ++t) {
    Vector a = policy(s);
    StepResult r = env.step(s, a);
    actions.push_back(a);
    states.push_back(r.next_state);
    s = r.next_state;
    if (r.done) break;
  }
  Trajectory traj;
  traj.states.resize(static_cast<int>(states.size()), env.state_dim());
  traj.actions.resize(static_cast<int>(actions.size()), env.action_dim());
  for (size_t i = 0; i < states.size(); ++i) traj.states.row(i) = states[i];
  for (size_t i = 0; i < actions.size(); ++i) traj.actions.row(i) = actions[i];
  return traj;
}

Dataset generate_expert_dataset(const Environment& env, int count,
                                int max_steps, std::uint64_t seed) {
  if (count < 1) throw InputError("expert dataset: count must be >= 1");
  Dataset data;
  data.env_name = env.name();
  data.state_dim = env.state_dim();
  data.action_dim = env.action_dim();
  data.seed = seed;
  data.constraint_text = "none";
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, "expert/traj", static_cast<std::uint64_t>(i)));
    Vector s0 = env.sample_initial_state(rng);
    data.trajectories.push_back(rollout(
        env, [&env](const Vector& s) { return env.expert_action(s); }, s0,
        max_steps));
  }
  return data;
}

}  // namespace acil
