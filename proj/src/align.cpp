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

#include "acil/align.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "acil/dtw.hpp"

namespace acil {

void AlignmentConfig::validate() const {
  if (episodes < 1) throw ConfigError("align.episodes: must be >= 1");
  if (max_length_factor <= 0.0)
    throw ConfigError("align.max_length_factor: must be positive");
  if (retrain_epochs < 0)
    throw ConfigError("align.retrain_epochs: must be >= 0");
  cem.validate();
}

bool SurrogateDataset::complete() const {
  for (const auto& slot : slots)
    if (!slot.filled) return false;
  return !slots.empty();
}

Dataset SurrogateDataset::to_dataset(const Dataset& expert_data,
                                     const std::string& constraint_text) const {
  Dataset out;
  out.env_name = expert_data.env_name;
  out.state_dim = expert_data.state_dim;
  out.action_dim = expert_data.action_dim;
  out.seed = expert_data.seed;
  out.constraint_text = constraint_text;
  for (const auto& slot : slots) {
    if (!slot.filled)
      throw InputError("surrogate dataset: unfilled slot, need episodes >= "
                       "number of expert trajectories");
    out.trajectories.push_back(slot.trajectory);
  }
  return out;
}

void write_metrics_csv(const std::vector<EpisodeMetrics>& metrics,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << "episode,trajectory_index,surrogate_length,dtw_cost,wall_time_s\n";
  char buf[128];
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g,%.6f\n", m.episode,
                  m.trajectory_index, m.surrogate_length, m.dtw_cost,
                  m.wall_time_s);
    out << buf;
  }
}

Trajectory align_trajectory(const Trajectory& expert, const Environment& env,
                            const ForwardModel& model,
                            const ConstraintSpec& spec,
                            const AlignmentConfig& cfg,
                            std::uint64_t episode_seed,
                            std::vector<AlignStepTrace>* trace) {
  if (!expert.valid()) throw InputError("align: invalid expert trajectory");
  const int last_state = expert.num_states() - 1;
  const int max_length = std::max(
      1, static_cast<int>(std::lround(cfg.max_length_factor * expert.length())));

  CemPlanner planner(model, spec, cfg.cem, cfg.erc, env.action_bound());
  planner.start_episode(expert, episode_seed);

  std::vector<Vector> states;
  std::vector<Vector> actions;
  Vector s = expert.states.row(0);
  states.push_back(s);
  int t_pg = 0;
  bool done = false;

  while (!done && t_pg < last_state &&
         static_cast<int>(actions.size()) < max_length) {
    PlanResult plan = planner.plan_step(s, t_pg);
    const int executable = std::min(
        cfg.cem.steps_per_plan, max_length - static_cast<int>(actions.size()));
    for (int k = 0; k < executable && !done; ++k) {
      Vector a = k == 0 ? plan.first_action
                        : project(plan.best_actions.row(k), s, spec);
      StepResult step = env.step(s, a);
      if (!step.next_state.allFinite())
        throw InputError("align: environment produced a non-finite state");
      actions.push_back(a);
      states.push_back(step.next_state);
      s = step.next_state;
      done = step.done;
    }
    t_pg += plan.advancement;
    if (trace != nullptr) trace->push_back({t_pg, plan.advancement});
  }

  Trajectory surrogate;
  surrogate.states.resize(static_cast<int>(states.size()), env.state_dim());
  surrogate.actions.resize(static_cast<int>(actions.size()), env.action_dim());
  for (size_t i = 0; i < states.size(); ++i) surrogate.states.row(i) = states[i];
  for (size_t i = 0; i < actions.size(); ++i)
    surrogate.actions.row(i) = actions[i];
  return surrogate;
}

SurrogateDataset generate_surrogate_dataset(
    const Dataset& expert_data, const Environment& env,
    const ConstraintSpec& spec, const AlignmentConfig& cfg,
    const EnsembleConfig& dyn_cfg, std::vector<EpisodeMetrics>* metrics,
    EnsembleModel* trained_model) {
  cfg.validate();
  if (expert_data.trajectories.empty())
    throw InputError("align: empty expert dataset");

  const int n = expert_data.size();
  SurrogateDataset result;
  result.slots.resize(n);

  ReplayBuffer buffer(env.state_dim(), env.action_dim());
  buffer.add_dataset(expert_data);

  EnsembleModel model(env.state_dim(), env.action_dim(), dyn_cfg,
                      derive_seed(cfg.seed, "align/model"));

  for (int episode = 0; episode < cfg.episodes; ++episode) {
    auto start = std::chrono::steady_clock::now();
    const int index = episode % n;  // round-robin trajectory selection
    const Trajectory& expert = expert_data.trajectories[index];

    model.train(buffer, cfg.retrain_epochs,
                derive_seed(cfg.seed, "align/train",
                            static_cast<std::uint64_t>(episode)));

    Trajectory surrogate = align_trajectory(
        expert, env, model, spec, cfg,
        derive_seed(cfg.seed, "align/episode",
                    static_cast<std::uint64_t>(episode)));

    buffer.add_trajectory(surrogate);

    // Keep-best on the raw full-sequence DTW cost, so stored costs are
    // comparable across episodes.
    double cost = dtw_distance(surrogate.states, expert.states).cost;
    auto& slot = result.slots[index];
    if (cost < slot.dtw_cost) {
      slot.trajectory = surrogate;
      slot.dtw_cost = cost;
      slot.filled = true;
    }

    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (metrics != nullptr)
      metrics->push_back(
          {episode, index, surrogate.length(), cost, wall, slot.dtw_cost});
    log_info("align episode " + std::to_string(episode) + " traj " +
             std::to_string(index) + " length " +
             std::to_string(surrogate.length()) + " dtw " +
             std::to_string(cost));
  }

  if (trained_model != nullptr) *trained_model = model;
  return result;
}

}  // namespace acil
