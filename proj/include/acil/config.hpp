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

#ifndef ACIL_CONFIG_HPP_
#define ACIL_CONFIG_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "acil/align.hpp"
#include "acil/dynamics.hpp"
#include "acil/imitation.hpp"

namespace acil {

// Flat `key = value` text with dotted sections and '#' comments. Typed
// getters throw ConfigError naming the offending field; unknown keys are
// rejected after parsing.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_text(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback);
  int get_int(const std::string& key, int fallback);
  double get_real(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback);
  std::vector<std::uint64_t> get_seed_list(
      const std::string& key, const std::vector<std::uint64_t>& fallback);

  // Throws if any parsed key was never consumed by a getter.
  void reject_unknown_keys() const;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

// Everything one run needs: environment, constraint, stage
// hyperparameters, seeds, and artifact paths (resolved against --out).
struct RunConfig {
  std::uint64_t seed = 0;
  std::string env_name = "point_mass_maze";
  int env_max_steps = -1;

  std::string constraint_text = "none";

  int expert_count = 6;
  int expert_max_steps = 200;

  EnsembleConfig dynamics;
  AlignmentConfig align;
  BcConfig bc;
  std::string bc_input = "surrogate";  // or "expert"
  EvalConfig eval;

  struct Paths {
    std::string expert = "expert.jsonl";
    std::string surrogate = "surrogate.jsonl";
    std::string metrics = "align_metrics.csv";
    std::string model = "dynamics.jsonl";
    std::string policy = "policy.jsonl";
    std::string eval = "eval.csv";
    std::string compare = "compare.csv";
  } paths;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text);
  std::string to_text() const;
};

}  // namespace acil

#endif  // ACIL_CONFIG_HPP_
