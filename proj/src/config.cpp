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

#include "acil/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace acil {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

KeyValueConfig KeyValueConfig::from_text(const std::string& text) {
  KeyValueConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    if (cfg.values_.count(key) > 0)
      throw ConfigError("config field '" + key + "': duplicated");
    cfg.values_[key] = value;
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + key + "': expected an integer, got '" +
                      it->second + "'");
  }
}

double KeyValueConfig::get_real(const std::string& key, double fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + key + "': expected a real, got '" +
                      it->second + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "1" || it->second == "true") return true;
  if (it->second == "0" || it->second == "false") return false;
  throw ConfigError("config field '" + key + "': expected a boolean, got '" +
                    it->second + "'");
}

std::uint64_t KeyValueConfig::get_seed(const std::string& key,
                                       std::uint64_t fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    std::uint64_t v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + key + "': expected a seed, got '" +
                      it->second + "'");
  }
}

std::vector<std::uint64_t> KeyValueConfig::get_seed_list(
    const std::string& key, const std::vector<std::uint64_t>& fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::uint64_t> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    try {
      out.push_back(std::stoull(tok));
    } catch (const std::exception&) {
      throw ConfigError("config field '" + key + "': bad seed '" + tok + "'");
    }
  }
  if (out.empty())
    throw ConfigError("config field '" + key + "': empty seed list");
  return out;
}

void KeyValueConfig::reject_unknown_keys() const {
  for (const auto& [key, value] : values_)
    if (consumed_.count(key) == 0)
      throw ConfigError("config field '" + key + "': unknown key");
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

RunConfig RunConfig::from_text(const std::string& text) {
  KeyValueConfig kv = KeyValueConfig::from_text(text);
  RunConfig cfg;

  cfg.seed = kv.get_seed("seed", cfg.seed);
  cfg.env_name = kv.get_string("env.name", cfg.env_name);
  cfg.env_max_steps = kv.get_int("env.max_steps", cfg.env_max_steps);
  cfg.constraint_text = kv.get_string("constraint", cfg.constraint_text);

  cfg.expert_count = kv.get_int("expert.count", cfg.expert_count);
  cfg.expert_max_steps = kv.get_int("expert.max_steps", cfg.expert_max_steps);

  cfg.dynamics.members = kv.get_int("dynamics.members", cfg.dynamics.members);
  cfg.dynamics.hidden = kv.get_int("dynamics.hidden", cfg.dynamics.hidden);
  cfg.dynamics.learning_rate =
      kv.get_real("dynamics.learning_rate", cfg.dynamics.learning_rate);
  cfg.dynamics.momentum =
      kv.get_real("dynamics.momentum", cfg.dynamics.momentum);
  cfg.dynamics.batch_size =
      kv.get_int("dynamics.batch_size", cfg.dynamics.batch_size);
  cfg.dynamics.grad_clip =
      kv.get_real("dynamics.grad_clip", cfg.dynamics.grad_clip);
  cfg.dynamics.log_var_min =
      kv.get_real("dynamics.log_var_min", cfg.dynamics.log_var_min);
  cfg.dynamics.log_var_max =
      kv.get_real("dynamics.log_var_max", cfg.dynamics.log_var_max);

  cfg.align.episodes = kv.get_int("align.episodes", cfg.align.episodes);
  cfg.align.max_length_factor =
      kv.get_real("align.max_length_factor", cfg.align.max_length_factor);
  cfg.align.retrain_epochs =
      kv.get_int("align.retrain_epochs", cfg.align.retrain_epochs);

  cfg.align.cem.population =
      kv.get_int("cem.population", cfg.align.cem.population);
  cfg.align.cem.elites = kv.get_int("cem.elites", cfg.align.cem.elites);
  cfg.align.cem.iterations =
      kv.get_int("cem.iterations", cfg.align.cem.iterations);
  cfg.align.cem.momentum = kv.get_real("cem.momentum", cfg.align.cem.momentum);
  cfg.align.cem.horizon = kv.get_int("cem.horizon", cfg.align.cem.horizon);
  cfg.align.cem.init_std = kv.get_real("cem.init_std", cfg.align.cem.init_std);
  cfg.align.cem.max_rejection =
      kv.get_int("cem.max_rejection", cfg.align.cem.max_rejection);
  cfg.align.cem.particles =
      kv.get_int("cem.particles", cfg.align.cem.particles);
  cfg.align.cem.steps_per_plan =
      kv.get_int("cem.steps_per_plan", cfg.align.cem.steps_per_plan);

  cfg.align.erc.beta = kv.get_real("erc.beta", cfg.align.erc.beta);
  cfg.align.erc.horizon = kv.get_int("erc.horizon", cfg.align.erc.horizon);

  cfg.bc.epochs = kv.get_int("bc.epochs", cfg.bc.epochs);
  cfg.bc.batch_size = kv.get_int("bc.batch_size", cfg.bc.batch_size);
  cfg.bc.learning_rate =
      kv.get_real("bc.learning_rate", cfg.bc.learning_rate);
  cfg.bc.momentum = kv.get_real("bc.momentum", cfg.bc.momentum);
  cfg.bc.hidden = kv.get_int("bc.hidden", cfg.bc.hidden);
  cfg.bc_input = kv.get_string("bc.input", cfg.bc_input);

  cfg.eval.episodes = kv.get_int("eval.episodes", cfg.eval.episodes);
  cfg.eval.seeds = kv.get_seed_list("eval.seeds", cfg.eval.seeds);
  cfg.eval.use_expert_starts =
      kv.get_bool("eval.use_expert_starts", cfg.eval.use_expert_starts);
  cfg.eval.max_steps = kv.get_int("eval.max_steps", cfg.eval.max_steps);

  cfg.paths.expert = kv.get_string("paths.expert", cfg.paths.expert);
  cfg.paths.surrogate = kv.get_string("paths.surrogate", cfg.paths.surrogate);
  cfg.paths.metrics = kv.get_string("paths.metrics", cfg.paths.metrics);
  cfg.paths.model = kv.get_string("paths.model", cfg.paths.model);
  cfg.paths.policy = kv.get_string("paths.policy", cfg.paths.policy);
  cfg.paths.eval = kv.get_string("paths.eval", cfg.paths.eval);
  cfg.paths.compare = kv.get_string("paths.compare", cfg.paths.compare);

  kv.reject_unknown_keys();

  if (cfg.expert_count < 1)
    throw ConfigError("config field 'expert.count': must be >= 1");
  if (cfg.expert_max_steps < 1)
    throw ConfigError("config field 'expert.max_steps': must be >= 1");
  if (cfg.bc_input != "surrogate" && cfg.bc_input != "expert")
    throw ConfigError("config field 'bc.input': must be 'surrogate' or "
                      "'expert'");
  cfg.align.validate();
  return cfg;
}

std::string RunConfig::to_text() const {
  std::string out;
  auto put = [&out](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };
  put("seed", std::to_string(seed));
  put("env.name", env_name);
  put("env.max_steps", std::to_string(env_max_steps));
  put("constraint", constraint_text);
  put("expert.count", std::to_string(expert_count));
  put("expert.max_steps", std::to_string(expert_max_steps));
  put("dynamics.members", std::to_string(dynamics.members));
  put("dynamics.hidden", std::to_string(dynamics.hidden));
  put("dynamics.learning_rate", format_real(dynamics.learning_rate));
  put("dynamics.momentum", format_real(dynamics.momentum));
  put("dynamics.batch_size", std::to_string(dynamics.batch_size));
  put("dynamics.grad_clip", format_real(dynamics.grad_clip));
  put("dynamics.log_var_min", format_real(dynamics.log_var_min));
  put("dynamics.log_var_max", format_real(dynamics.log_var_max));
  put("align.episodes", std::to_string(align.episodes));
  put("align.max_length_factor", format_real(align.max_length_factor));
  put("align.retrain_epochs", std::to_string(align.retrain_epochs));
  put("cem.population", std::to_string(align.cem.population));
  put("cem.elites", std::to_string(align.cem.elites));
  put("cem.iterations", std::to_string(align.cem.iterations));
  put("cem.momentum", format_real(align.cem.momentum));
  put("cem.horizon", std::to_string(align.cem.horizon));
  put("cem.init_std", format_real(align.cem.init_std));
  put("cem.max_rejection", std::to_string(align.cem.max_rejection));
  put("cem.particles", std::to_string(align.cem.particles));
  put("cem.steps_per_plan", std::to_string(align.cem.steps_per_plan));
  put("erc.beta", format_real(align.erc.beta));
  put("erc.horizon", std::to_string(align.erc.horizon));
  put("bc.epochs", std::to_string(bc.epochs));
  put("bc.batch_size", std::to_string(bc.batch_size));
  put("bc.learning_rate", format_real(bc.learning_rate));
  put("bc.momentum", format_real(bc.momentum));
  put("bc.hidden", std::to_string(bc.hidden));
  put("bc.input", bc_input);
  put("eval.episodes", std::to_string(eval.episodes));
  std::string seeds;
  for (size_t i = 0; i < eval.seeds.size(); ++i) {
    if (i > 0) seeds += ",";
    seeds += std::to_string(eval.seeds[i]);
  }
  put("eval.seeds", seeds);
  put("eval.use_expert_starts", eval.use_expert_starts ? "1" : "0");
  put("eval.max_steps", std::to_string(eval.max_steps));
  put("paths.expert", paths.expert);
  put("paths.surrogate", paths.surrogate);
  put("paths.metrics", paths.metrics);
  put("paths.model", paths.model);
  put("paths.policy", paths.policy);
  put("paths.eval", paths.eval);
  put("paths.compare", paths.compare);
  return out;
}

}  // namespace acil
