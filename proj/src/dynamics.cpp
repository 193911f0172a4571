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

#include "acil/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace acil {

namespace {

double softplus(double x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

// Smoothly bounds a raw log-variance into (lo, hi).
double clamp_log_var(double raw, double lo, double hi) {
  double z = hi - softplus(hi - raw);
  return lo + softplus(z - lo);
}

double clamp_log_var_grad(double raw, double lo, double hi) {
  double z = hi - softplus(hi - raw);
  return sigmoid(hi - raw) * sigmoid(z - lo);
}

void append_real(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_vector(std::string& out, const Vector& v) {
  out += "[";
  for (int i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    append_real(out, v[i]);
  }
  out += "]";
}

Vector vector_from_json(const nlohmann::json& j) {
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

ReplayBuffer::ReplayBuffer(int state_dim, int action_dim)
    : state_dim_(state_dim), action_dim_(action_dim) {}

void ReplayBuffer::add(const Vector& s, const Vector& a,
                       const Vector& s_next) {
  if (s.size() != state_dim_ || a.size() != action_dim_ ||
      s_next.size() != state_dim_)
    throw InputError("replay buffer: transition dimension mismatch");
  states_.push_back(s);
  actions_.push_back(a);
  next_states_.push_back(s_next);
}

void ReplayBuffer::add_trajectory(const Trajectory& traj) {
  for (int t = 0; t < traj.length(); ++t)
    add(traj.states.row(t), traj.actions.row(t), traj.states.row(t + 1));
}

void ReplayBuffer::add_dataset(const Dataset& data) {
  for (const auto& traj : data.trajectories) add_trajectory(traj);
}

double gaussian_nll(const Vector& mean, const Vector& log_var,
                    const Vector& target) {
  return ((mean - target).array().square() * (-log_var).array().exp() +
          log_var.array())
      .sum();
}

EnsembleModel::EnsembleModel(int state_dim, int action_dim,
                             EnsembleConfig config, std::uint64_t seed)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      config_(config),
      in_std_(Standardizer::identity(state_dim + action_dim)),
      delta_std_(Standardizer::identity(state_dim)) {
  if (config_.members < 1)
    throw ConfigError("dynamics.members: must be >= 1");
  for (int b = 0; b < config_.members; ++b) {
    Mlp net(state_dim + action_dim, config_.hidden, 2 * state_dim);
    Rng rng(derive_seed(seed, "dynamics/init", static_cast<std::uint64_t>(b)));
    net.init_random(rng);
    members_.push_back(std::move(net));
  }
}

GaussianPrediction EnsembleModel::predict(int member, const Vector& state,
                                          const Vector& action) const {
  if (!state.allFinite() || !action.allFinite())
    throw InputError("dynamics predict: non-finite input");
  if (state.size() != state_dim_ || action.size() != action_dim_)
    throw InputError("dynamics predict: dimension mismatch");
  Vector in(state_dim_ + action_dim_);
  in << state, action;
  Matrix out = members_[member].forward(in_std_.apply(in).transpose());

  GaussianPrediction pred;
  pred.mean = Vector(state_dim_);
  pred.log_var = Vector(state_dim_);
  for (int d = 0; d < state_dim_; ++d) {
    double mu_std = out(0, d);
    double lv = clamp_log_var(out(0, state_dim_ + d), config_.log_var_min,
                              config_.log_var_max);
    pred.mean[d] = state[d] + mu_std * delta_std_.std[d] + delta_std_.mean[d];
    pred.log_var[d] = lv + 2.0 * std::log(delta_std_.std[d]);
  }
  return pred;
}

std::pair<double, Vector> EnsembleModel::nll_loss_and_grad(
    int member, const std::vector<int>& indices,
    const ReplayBuffer& buffer) const {
  if (indices.empty()) throw InputError("nll_loss_and_grad: empty batch");
  const int n = static_cast<int>(indices.size());
  Matrix x(n, state_dim_ + action_dim_);
  Matrix target(n, state_dim_);
  for (int r = 0; r < n; ++r) {
    int i = indices[r];
    Vector in(state_dim_ + action_dim_);
    in << buffer.state(i), buffer.action(i);
    x.row(r) = in_std_.apply(in);
    target.row(r) =
        delta_std_.apply(buffer.next_state(i) - buffer.state(i));
  }

  Mlp::Cache cache;
  Matrix out = members_[member].forward(x, &cache);

  double loss = 0.0;
  Matrix dout = Matrix::Zero(n, 2 * state_dim_);
  for (int r = 0; r < n; ++r) {
    for (int d = 0; d < state_dim_; ++d) {
      double mu = out(r, d);
      double raw = out(r, state_dim_ + d);
      double lv = clamp_log_var(raw, config_.log_var_min, config_.log_var_max);
      double err = mu - target(r, d);
      double inv_var = std::exp(-lv);
      loss += err * err * inv_var + lv;
      dout(r, d) = 2.0 * err * inv_var;
      double dlv = 1.0 - err * err * inv_var;
      dout(r, state_dim_ + d) =
          dlv * clamp_log_var_grad(raw, config_.log_var_min,
                                   config_.log_var_max);
    }
  }
  return {loss, members_[member].backward(cache, dout)};
}

void EnsembleModel::train(const ReplayBuffer& buffer, int epochs,
                          std::uint64_t seed) {
  if (buffer.size() == 0) throw InputError("train: empty replay buffer");

  // Standardization stats from the full buffer, shared across members.
  const int n = buffer.size();
  Vector in_mean = Vector::Zero(state_dim_ + action_dim_);
  Vector delta_mean = Vector::Zero(state_dim_);
  for (int i = 0; i < n; ++i) {
    Vector in(state_dim_ + action_dim_);
    in << buffer.state(i), buffer.action(i);
    in_mean += in;
    delta_mean += buffer.next_state(i) - buffer.state(i);
  }
  in_mean /= n;
  delta_mean /= n;
  Vector in_var = Vector::Zero(state_dim_ + action_dim_);
  Vector delta_var = Vector::Zero(state_dim_);
  for (int i = 0; i < n; ++i) {
    Vector in(state_dim_ + action_dim_);
    in << buffer.state(i), buffer.action(i);
    in_var += (in - in_mean).cwiseAbs2();
    delta_var += (buffer.next_state(i) - buffer.state(i) - delta_mean)
                     .cwiseAbs2();
  }
  auto to_std = [n](const Vector& var) {
    return (var / n).cwiseSqrt().cwiseMax(1e-8).eval();
  };
  in_std_ = {in_mean, to_std(in_var)};
  delta_std_ = {delta_mean, to_std(delta_var)};

  const int batch = std::min(config_.batch_size, n);
  for (int b = 0; b < config_.members; ++b) {
    Rng rng(derive_seed(seed, "dynamics/train", static_cast<std::uint64_t>(b)));
    // Independent bootstrap resample per member.
    std::vector<int> sample(n);
    for (int i = 0; i < n; ++i) sample[i] = rng.uniform_int(n);

    Vector velocity = Vector::Zero(members_[b].param_count());
    for (int epoch = 0; epoch < epochs; ++epoch) {
      // Fisher-Yates shuffle.
      for (int i = n - 1; i > 0; --i)
        std::swap(sample[i], sample[rng.uniform_int(i + 1)]);
      for (int start = 0; start < n; start += batch) {
        int count = std::min(batch, n - start);
        std::vector<int> idx(sample.begin() + start,
                             sample.begin() + start + count);
        auto [loss, grad] = nll_loss_and_grad(b, idx, buffer);
        grad /= count;
        if (config_.grad_clip > 0.0) {
          double norm = grad.norm();
          if (norm > config_.grad_clip) grad *= config_.grad_clip / norm;
        }
        velocity = config_.momentum * velocity - config_.learning_rate * grad;
        members_[b].set_flat_params(members_[b].flat_params() + velocity);
      }
    }
  }
}

double EnsembleModel::evaluate_nll(const std::vector<int>& indices,
                                   const ReplayBuffer& buffer) const {
  if (indices.empty()) throw InputError("evaluate_nll: empty index set");
  double total = 0.0;
  for (int b = 0; b < config_.members; ++b) {
    Matrix x(indices.size(), state_dim_ + action_dim_);
    for (size_t r = 0; r < indices.size(); ++r) {
      Vector in(state_dim_ + action_dim_);
      in << buffer.state(indices[r]), buffer.action(indices[r]);
      x.row(static_cast<int>(r)) = in_std_.apply(in);
    }
    Matrix out = members_[b].forward(x);
    for (size_t r = 0; r < indices.size(); ++r) {
      int i = indices[r];
      Vector target = delta_std_.apply(buffer.next_state(i) - buffer.state(i));
      for (int d = 0; d < state_dim_; ++d) {
        double lv = clamp_log_var(out(static_cast<int>(r), state_dim_ + d),
                                  config_.log_var_min, config_.log_var_max);
        double err = out(static_cast<int>(r), d) - target[d];
        total += err * err * std::exp(-lv) + lv;
      }
    }
  }
  return total / (static_cast<double>(indices.size()) * config_.members);
}

Vector EnsembleModel::member_params(int member) const {
  return members_[member].flat_params();
}

void EnsembleModel::set_member_params(int member, const Vector& params) {
  members_[member].set_flat_params(params);
}

void EnsembleModel::set_standardizers(Standardizer input, Standardizer delta) {
  in_std_ = std::move(input);
  delta_std_ = std::move(delta);
}

std::pair<double, double> EnsembleModel::log_var_bounds(int dim) const {
  double shift = 2.0 * std::log(delta_std_.std[dim]);
  return {config_.log_var_min + shift, config_.log_var_max + shift};
}

void EnsembleModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  std::string header = "{\"d_s\":" + std::to_string(state_dim_) +
                       ",\"d_a\":" + std::to_string(action_dim_) +
                       ",\"members\":" + std::to_string(config_.members) +
                       ",\"hidden\":" + std::to_string(config_.hidden) +
                       ",\"log_var_min\":";
  append_real(header, config_.log_var_min);
  header += ",\"log_var_max\":";
  append_real(header, config_.log_var_max);
  header += ",\"in_mean\":";
  append_vector(header, in_std_.mean);
  header += ",\"in_std\":";
  append_vector(header, in_std_.std);
  header += ",\"delta_mean\":";
  append_vector(header, delta_std_.mean);
  header += ",\"delta_std\":";
  append_vector(header, delta_std_.std);
  header += "}";
  out << header << "\n";
  for (int b = 0; b < config_.members; ++b) {
    std::string line = "{\"params\":";
    append_vector(line, members_[b].flat_params());
    line += "}";
    out << line << "\n";
  }
}

EnsembleModel EnsembleModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw InputError("model '" + path + "': missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("model '" + path + "': bad header: " + e.what());
  }
  EnsembleConfig config;
  config.members = header.at("members").get<int>();
  config.hidden = header.at("hidden").get<int>();
  config.log_var_min = header.at("log_var_min").get<double>();
  config.log_var_max = header.at("log_var_max").get<double>();
  EnsembleModel model(header.at("d_s").get<int>(), header.at("d_a").get<int>(),
                      config, 0);
  model.set_standardizers({vector_from_json(header.at("in_mean")),
                           vector_from_json(header.at("in_std"))},
                          {vector_from_json(header.at("delta_mean")),
                           vector_from_json(header.at("delta_std"))});
  for (int b = 0; b < config.members; ++b) {
    if (!std::getline(in, line))
      throw InputError("model '" + path + "': missing member record");
    auto rec = nlohmann::json::parse(line);
    model.set_member_params(b, vector_from_json(rec.at("params")));
  }
  return model;
}

Matrix propagate_ts(const ForwardModel& model, const Vector& s0,
                    const Matrix& actions, int member, Rng& rng,
                    std::vector<int>* member_log) {
  if (member < 0 || member >= model.num_members())
    throw InputError("propagate_ts: member index out of range");
  const int horizon = static_cast<int>(actions.rows());
  Matrix states(horizon + 1, s0.size());
  states.row(0) = s0;
  Vector s = s0;
  for (int h = 0; h < horizon; ++h) {
    GaussianPrediction pred = model.predict(member, s, actions.row(h));
    if (member_log != nullptr) member_log->push_back(member);
    Vector noise = rng.normal_vector(static_cast<int>(s.size()));
    s = pred.mean +
        (0.5 * pred.log_var).array().exp().matrix().cwiseProduct(noise);
    states.row(h + 1) = s;
  }
  return states;
}

std::vector<Matrix> propagate_ts_particles(const ForwardModel& model,
                                           const Vector& s0,
                                           const Matrix& actions,
                                           const std::vector<int>& assignment,
                                           std::uint64_t seed) {
  std::vector<Matrix> rollouts;
  rollouts.reserve(assignment.size());
  for (size_t p = 0; p < assignment.size(); ++p) {
    Rng rng(derive_seed(seed, "particle", static_cast<std::uint64_t>(p)));
    rollouts.push_back(propagate_ts(model, s0, actions, assignment[p], rng));
  }
  return rollouts;
}

}  // namespace acil
