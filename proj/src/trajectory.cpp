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

#include "acil/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace acil {

namespace {

// Writes reals with 17 significant digits so a strtod round trip is exact.
void append_real(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_matrix(std::string& out, const Matrix& m) {
  out += "[";
  for (int r = 0; r < m.rows(); ++r) {
    if (r > 0) out += ",";
    out += "[";
    for (int c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ",";
      append_real(out, m(r, c));
    }
    out += "]";
  }
  out += "]";
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array())
    throw InputError("dataset: '" + what + "' is not an array");
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return Matrix(0, 0);
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw InputError("dataset: ragged rows in '" + what + "'");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

bool Trajectory::valid() const {
  return states.rows() == actions.rows() + 1 && states.allFinite() &&
         actions.allFinite();
}

int Dataset::num_transitions() const {
  int n = 0;
  for (const auto& t : trajectories) n += t.length();
  return n;
}

void write_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  nlohmann::json header{{"env", data.env_name},
                        {"d_s", data.state_dim},
                        {"d_a", data.action_dim},
                        {"seed", data.seed},
                        {"constraint", data.constraint_text}};
  out << header.dump() << "\n";
  for (const auto& traj : data.trajectories) {
    std::string line = "{\"states\":";
    append_matrix(line, traj.states);
    line += ",\"actions\":";
    append_matrix(line, traj.actions);
    line += "}";
    out << line << "\n";
  }
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset file '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw InputError("dataset '" + path + "': missing header record");
  Dataset data;
  try {
    auto header = nlohmann::json::parse(line);
    data.env_name = header.at("env").get<std::string>();
    data.state_dim = header.at("d_s").get<int>();
    data.action_dim = header.at("d_a").get<int>();
    data.seed = header.at("seed").get<std::uint64_t>();
    data.constraint_text = header.at("constraint").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("dataset '" + path + "': bad header: " + e.what());
  }
  int index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("dataset '" + path + "': bad record " +
                       std::to_string(index) + ": " + e.what());
    }
    Trajectory traj;
    traj.states = matrix_from_json(rec.at("states"), "states");
    traj.actions = matrix_from_json(rec.at("actions"), "actions");
    if (traj.actions.rows() == 0)
      traj.actions.resize(0, data.action_dim);
    if (!traj.valid())
      throw InputError("dataset '" + path + "': invalid trajectory " +
                       std::to_string(index));
    data.trajectories.push_back(std::move(traj));
    ++index;
  }
  if (data.trajectories.empty())
    throw InputError("dataset '" + path + "': no trajectories");
  return data;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << "t";
  for (int c = 0; c < traj.states.cols(); ++c) out << ",s" << c;
  out << "\n";
  for (int r = 0; r < traj.states.rows(); ++r) {
    std::string line = std::to_string(r);
    for (int c = 0; c < traj.states.cols(); ++c) {
      line += ",";
      append_real(line, traj.states(r, c));
    }
    out << line << "\n";
  }
}

}  // namespace acil
