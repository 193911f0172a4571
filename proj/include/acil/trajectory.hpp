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

#ifndef ACIL_TRAJECTORY_HPP_
#define ACIL_TRAJECTORY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "acil/common.hpp"

namespace acil {

// One demonstration: a state sequence (rows of `states`, length L+1) and
// the actions that produced it (rows of `actions`, length L).
struct Trajectory {
  Matrix states;   // (L+1) x d_s
  Matrix actions;  // L x d_a

  int length() const { return static_cast<int>(actions.rows()); }
  int num_states() const { return static_cast<int>(states.rows()); }

  // |states| == |actions| + 1, all entries finite.
  bool valid() const;
};

// A homogeneous collection of trajectories plus the metadata needed to
// reproduce or reinterpret it.
struct Dataset {
  std::string env_name;
  int state_dim = 0;
  int action_dim = 0;
  std::uint64_t seed = 0;
  std::string constraint_text;  // canonical text form, e.g. "box:0.1"
  std::vector<Trajectory> trajectories;

  int size() const { return static_cast<int>(trajectories.size()); }
  // Total number of (s, a, s') transitions.
  int num_transitions() const;
};

// Newline-delimited records: one header record, then one record per
// trajectory with `states` and `actions` arrays. Reals are written with
// 17 significant digits so parse(serialize(x)) == x bit-for-bit.
void write_dataset(const Dataset& data, const std::string& path);
Dataset read_dataset(const std::string& path);

// Plot-ready per-trajectory CSV (t, s_0, ..., s_{d_s-1}); one file per
// trajectory named <prefix>_<index>.csv.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace acil

#endif  // ACIL_TRAJECTORY_HPP_
