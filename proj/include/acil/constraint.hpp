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

#ifndef ACIL_CONSTRAINT_HPP_
#define ACIL_CONSTRAINT_HPP_

#include <string>
#include <vector>

#include "acil/common.hpp"

namespace acil {

enum class ConstraintFamily {
  kUnconstrained,
  kBox,             // |a_i| <= b_i per dimension
  kL2Groups,        // sum of a_i^2 over an index group <= cap
  kWeightedAbsSum,  // sum_i |s[map_i] * a_i| <= cap
  kPositivePartSum  // sum_i max(s[map_i] * a_i, 0) <= cap
};

struct L2Group {
  std::vector<int> indices;
  double cap = 0.0;  // bound on the squared norm
};

// Declarative description of the feasible action set C(s). State-dependent
// families read per-dimension weights out of the current state via
// `state_index_map` (action dim i weighted by s[state_index_map[i]]).
struct ConstraintSpec {
  ConstraintFamily family = ConstraintFamily::kUnconstrained;
  Vector box_half_width;             // kBox
  std::vector<L2Group> groups;       // kL2Groups
  std::vector<int> state_index_map;  // kWeightedAbsSum / kPositivePartSum
  double cap = 0.0;                  // kWeightedAbsSum / kPositivePartSum

  static ConstraintSpec unconstrained();
  static ConstraintSpec box(const Vector& half_width);
  static ConstraintSpec box_uniform(int action_dim, double half_width);
  static ConstraintSpec l2_groups(std::vector<L2Group> groups);
  static ConstraintSpec weighted_abs_sum(std::vector<int> state_index_map,
                                         double cap);
  static ConstraintSpec positive_part_sum(std::vector<int> state_index_map,
                                          double cap);

  bool state_dependent() const {
    return family == ConstraintFamily::kWeightedAbsSum ||
           family == ConstraintFamily::kPositivePartSum;
  }
  // Throws ConfigError on bad caps, overlapping groups, or out-of-range
  // state indices.
  void validate(int state_dim, int action_dim) const;
};

// Closed-set membership test with a 1e-9 relative slack on cap
// satisfaction, so exact projections onto the boundary always pass.
bool is_feasible(const Vector& action, const Vector& state,
                 const ConstraintSpec& spec);

// Nearest-point L2 projection for Box and L2Groups; exact weighted
// soft-thresholding for WeightedAbsSum; radial shrink toward 0 (bisection)
// for PositivePartSum. Feasible inputs are returned unchanged, which makes
// the map exactly idempotent.
Vector project(const Vector& action, const Vector& state,
               const ConstraintSpec& spec);

// Canonical text forms:
//   none
//   box:0.1            (uniform)    box:0.1,0.2        (per dim)
//   l2:[0,1,2]:0.5     groups separated by ';'
//   wabs:v:0.5         'v'/'w' = trailing velocity block of the state
//   wabs:[2,3]:0.5     explicit state index map
//   ppsum:w:10
// Parsing resolves symbolic maps against (state_dim, action_dim) and
// validates the result.
ConstraintSpec parse_constraint(const std::string& text, int state_dim,
                                int action_dim);
std::string format_constraint(const ConstraintSpec& spec, int state_dim,
                              int action_dim);

}  // namespace acil

#endif  // ACIL_CONSTRAINT_HPP_
