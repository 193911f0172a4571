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

#ifndef ACIL_COMMON_HPP_
#define ACIL_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace acil {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Raised for malformed configuration: bad field values, dimension
// mismatches, unknown names. Maps to exit code 2 at the CLI.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised for invalid runtime inputs (empty sequences, non-finite values).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

// Global verbosity, initialized from the ACIL_LOG environment variable
// ("quiet" | "info" | "debug", default "info").
LogLevel log_level();
void set_log_level(LogLevel level);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

// Deterministic 64-bit generator (splitmix64). All randomness in the
// project flows through this type so runs are bit-reproducible across
// processes for a fixed master seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer on [0, n), n >= 1.
  int uniform_int(int n);

  // Standard normal via Box-Muller (one draw per call, no cached spare).
  double normal();
  Vector normal_vector(int n);

 private:
  std::uint64_t state_;
};

// Derives an independent child seed from a parent seed and a component
// name: the name is FNV-1a hashed and mixed into the stream. Stages and
// inner loops derive their streams as
//   derive_seed(master, "expert-gen") -> derive_seed(stage, "traj", i) ...
// so any stage is reproducible in isolation.
std::uint64_t hash_name(std::string_view name);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view name);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view name,
                          std::uint64_t index);

}  // namespace acil

#endif  // ACIL_COMMON_HPP_
