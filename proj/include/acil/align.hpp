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

#ifndef ACIL_ALIGN_HPP_
#define ACIL_ALIGN_HPP_

#include <limits>
#include <vector>

#include "acil/cem.hpp"
#include "acil/constraint.hpp"
#include "acil/dynamics.hpp"
#include "acil/env.hpp"
#include "acil/trajectory.hpp"

namespace acil {

struct AlignmentConfig {
  int episodes = 1;                 // outer-loop episode count M
  double max_length_factor = 3.0;   // surrogate length cap, x expert length
  CemConfig cem;
  ErcConfig erc;
  int retrain_epochs = 50;          // ensemble epochs per episode
  std::uint64_t seed = 0;

  void validate() const;
};

// Per expert-trajectory slot: the best surrogate found so far and its
// full-sequence DTW cost to the expert (raw, unnormalized states). The
// stored cost never increases.
struct SurrogateSlot {
  Trajectory trajectory;
  double dtw_cost = std::numeric_limits<double>::infinity();
  bool filled = false;
};

struct SurrogateDataset {
  std::vector<SurrogateSlot> slots;

  bool complete() const;
  // Flattens the filled slots into a serializable dataset.
  Dataset to_dataset(const Dataset& expert_data,
                     const std::string& constraint_text) const;
};

struct EpisodeMetrics {
  int episode = 0;
  int trajectory_index = 0;
  int surrogate_length = 0;
  double dtw_cost = 0.0;
  double wall_time_s = 0.0;
  // Slot cost after the keep-best decision; carried for assertions, not
  // written to the CSV.
  double stored_cost = 0.0;
};

void write_metrics_csv(const std::vector<EpisodeMetrics>& metrics,
                       const std::string& path);

// Per-step instrumentation for tests.
struct AlignStepTrace {
  int t_pg = 0;
  int advancement = 0;
};

// One alignment episode: starts the surrogate at the expert's initial
// state, plans with receding-horizon CEM, executes the first action(s) of
// each plan in the true environment, and advances the progression index
// by the warping-path advancement. Ends when the progression reaches the
// final expert state, the environment signals terminal, or the length cap
// is hit. Every recorded action is feasible at its recorded state.
Trajectory align_trajectory(const Trajectory& expert, const Environment& env,
                            const ForwardModel& model,
                            const ConstraintSpec& spec,
                            const AlignmentConfig& cfg,
                            std::uint64_t episode_seed,
                            std::vector<AlignStepTrace>* trace = nullptr);

// Full surrogate-generation loop: the replay buffer starts from the
// expert data; each episode retrains the ensemble on the buffer, aligns
// the round-robin-selected expert trajectory, appends the surrogate to
// the buffer, and keeps it only if its full-sequence DTW cost strictly
// improves on the stored slot.
SurrogateDataset generate_surrogate_dataset(
    const Dataset& expert_data, const Environment& env,
    const ConstraintSpec& spec, const AlignmentConfig& cfg,
    const EnsembleConfig& dyn_cfg,
    std::vector<EpisodeMetrics>* metrics = nullptr,
    EnsembleModel* trained_model = nullptr);

}  // namespace acil

#endif  // ACIL_ALIGN_HPP_
