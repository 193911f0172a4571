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

#include "acil/common.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numbers>

namespace acil {

namespace {

LogLevel g_log_level = [] {
  const char* env = std::getenv("ACIL_LOG");
  if (env == nullptr) return LogLevel::kInfo;
  std::string v(env);
  if (v == "quiet") return LogLevel::kQuiet;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}();

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

LogLevel log_level() { return g_log_level; }
void set_log_level(LogLevel level) { g_log_level = level; }

void log_info(const std::string& msg) {
  if (g_log_level >= LogLevel::kInfo) std::cerr << "[acil] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (g_log_level >= LogLevel::kDebug) std::cerr << "[acil] " << msg << "\n";
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
  // 53 random mantissa bits -> [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int n) {
  return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

double Rng::normal() {
  // Box-Muller; u1 shifted away from 0 so log() is finite.
  double u1 = uniform();
  double u2 = uniform();
  u1 = std::max(u1, 0x1.0p-53);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

Vector Rng::normal_vector(int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

std::uint64_t hash_name(std::string_view name) {
  // FNV-1a.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : name) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view name) {
  std::uint64_t state = parent ^ hash_name(name);
  return splitmix64(state);
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view name,
                          std::uint64_t index) {
  std::uint64_t state = derive_seed(parent, name) ^
                        (0x9E3779B97F4A7C15ULL * (index + 1));
  return splitmix64(state);
}

}  // namespace acil
