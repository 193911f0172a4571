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

#include "acil/imitation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "acil/dtw.hpp"

namespace acil {

namespace {

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
  for (size_t i = 0; i < j.size(); ++i)
    v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

Matrix standardize_rows(const Matrix& x, const Standardizer& s) {
  Matrix out(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) out.row(r) = s.apply(x.row(r));
  return out;
}

}  // namespace

PolicyNet::PolicyNet(int state_dim, int action_dim, int hidden,
                     std::uint64_t seed)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      net_(state_dim, hidden, action_dim),
      in_std_(Standardizer::identity(state_dim)) {
  Rng rng(derive_seed(seed, "policy/init"));
  net_.init_random(rng);
}

Vector PolicyNet::act(const Vector& state) const {
  return net_.forward(in_std_.apply(state).transpose()).row(0);
}

std::pair<double, Vector> PolicyNet::mse_loss_and_grad(
    const Matrix& states, const Matrix& actions) const {
  if (states.rows() == 0) throw InputError("bc loss: empty batch");
  Mlp::Cache cache;
  Matrix x = standardize_rows(states, in_std_);
  Matrix y = net_.forward(x, &cache);
  Matrix err = y - actions;
  const double n = static_cast<double>(states.rows());
  double loss = err.squaredNorm() / n;
  Matrix dy = (2.0 / n) * err;
  return {loss, net_.backward(cache, dy)};
}

double PolicyNet::mse(const Matrix& states, const Matrix& actions) const {
  Matrix y = net_.forward(standardize_rows(states, in_std_));
  return (y - actions).squaredNorm() / static_cast<double>(states.rows());
}

void PolicyNet::train(const Matrix& states, const Matrix& actions,
                      const BcConfig& cfg) {
  const int n = static_cast<int>(states.rows());
  if (n == 0) throw InputError("bc train: empty dataset");
  Rng rng(derive_seed(cfg.seed, "bc/train"));
  const int batch = std::min(cfg.batch_size, n);

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Vector velocity = Vector::Zero(net_.param_count());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(i + 1)]);
    for (int start = 0; start < n; start += batch) {
      int count = std::min(batch, n - start);
      Matrix bs(count, states.cols());
      Matrix ba(count, actions.cols());
      for (int r = 0; r < count; ++r) {
        bs.row(r) = states.row(order[start + r]);
        ba.row(r) = actions.row(order[start + r]);
      }
      auto [loss, grad] = mse_loss_and_grad(bs, ba);
      velocity = cfg.momentum * velocity - cfg.learning_rate * grad;
      net_.set_flat_params(net_.flat_params() + velocity);
    }
  }
}

void PolicyNet::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  std::string header = "{\"d_s\":" + std::to_string(state_dim_) +
                       ",\"d_a\":" + std::to_string(action_dim_) +
                       ",\"hidden\":" + std::to_string(net_.hidden_dim()) +
                       ",\"in_mean\":";
  append_vector(header, in_std_.mean);
  header += ",\"in_std\":";
  append_vector(header, in_std_.std);
  header += "}";
  out << header << "\n";
  std::string line = "{\"params\":";
  append_vector(line, net_.flat_params());
  line += "}";
  out << line << "\n";
}

PolicyNet PolicyNet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open policy file '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw InputError("policy '" + path + "': missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("policy '" + path + "': bad header: " + e.what());
  }
  PolicyNet policy(header.at("d_s").get<int>(), header.at("d_a").get<int>(),
                   header.at("hidden").get<int>(), 0);
  policy.set_standardizer({vector_from_json(header.at("in_mean")),
                           vector_from_json(header.at("in_std"))});
  if (!std::getline(in, line))
    throw InputError("policy '" + path + "': missing parameter record");
  auto rec = nlohmann::json::parse(line);
  policy.set_flat_params(vector_from_json(rec.at("params")));
  return policy;
}

PolicyNet train_bc(const Dataset& data, const BcConfig& cfg) {
  if (data.trajectories.empty()) throw InputError("train_bc: empty dataset");
  int total = 0;
  for (const auto& t : data.trajectories) total += t.length();
  if (total == 0) throw InputError("train_bc: dataset has no actions");

  Matrix states(total, data.state_dim);
  Matrix actions(total, data.action_dim);
  int row = 0;
  for (const auto& t : data.trajectories) {
    for (int i = 0; i < t.length(); ++i) {
      states.row(row) = t.states.row(i);
      actions.row(row) = t.actions.row(i);
      ++row;
    }
  }

  Standardizer in_std;
  in_std.mean = states.colwise().mean();
  Matrix centered = states.rowwise() - in_std.mean.transpose();
  in_std.std = (centered.array().square().colwise().sum() / total)
                   .sqrt()
                   .max(1e-8)
                   .matrix()
                   .transpose();

  PolicyNet policy(data.state_dim, data.action_dim, cfg.hidden, cfg.seed);
  policy.set_standardizer(in_std);
  policy.train(states, actions, cfg);
  return policy;
}

namespace {

// Index of the expert trajectory whose initial state is nearest.
int nearest_expert_index(const Vector& initial_state,
                         const Dataset& expert_data) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < expert_data.size(); ++i) {
    double d =
        (expert_data.trajectories[i].states.row(0).transpose() - initial_state)
            .norm();
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

// DTW against the nearest expert; raw states, or states normalized by
// that expert's own stats.
double dtw_to_nearest_expert(const Trajectory& rollout,
                             const Dataset& expert_data, bool normalized) {
  const Trajectory& expert =
      expert_data
          .trajectories[nearest_expert_index(rollout.states.row(0),
                                             expert_data)];
  if (!normalized) return dtw_distance(rollout.states, expert.states).cost;
  NormalizationStats stats = NormalizationStats::from_rows(expert.states);
  return dtw_distance(minmax_normalize(rollout.states, stats),
                      minmax_normalize(expert.states, stats))
      .cost;
}

EvalReport aggregate(
    const Environment& env, const Dataset& expert_data, const EvalConfig& cfg,
    const std::function<Trajectory(std::uint64_t seed, int episode)>& run,
    std::vector<Trajectory>* rollouts) {
  if (cfg.episodes < 1) throw InputError("eval: episodes must be >= 1");
  if (cfg.seeds.empty()) throw InputError("eval: need at least one seed");

  std::vector<double> seed_return_means, seed_dtw_means;
  int successes = 0;
  for (std::uint64_t seed : cfg.seeds) {
    double return_sum = 0.0, dtw_sum = 0.0;
    for (int e = 0; e < cfg.episodes; ++e) {
      Trajectory rollout = run(seed, e);
      if (rollouts != nullptr) rollouts->push_back(rollout);
      double ret = 0.0;
      for (int t = 0; t < rollout.length(); ++t)
        ret += env
                   .step(rollout.states.row(t), rollout.actions.row(t))
                   .reward;
      return_sum += ret;
      dtw_sum += dtw_to_nearest_expert(rollout, expert_data, cfg.normalized);
      if (env.at_goal(rollout.states.row(rollout.num_states() - 1)))
        ++successes;
    }
    seed_return_means.push_back(return_sum / cfg.episodes);
    seed_dtw_means.push_back(dtw_sum / cfg.episodes);
  }

  auto mean_std = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    if (v.size() > 1) {
      for (double x : v) var += (x - mean) * (x - mean);
      var /= static_cast<double>(v.size() - 1);
    }
    return std::pair<double, double>{mean, std::sqrt(var)};
  };

  EvalReport report;
  std::tie(report.return_mean, report.return_std) =
      mean_std(seed_return_means);
  std::tie(report.dtw_mean, report.dtw_std) = mean_std(seed_dtw_means);
  report.success_rate = static_cast<double>(successes) /
                        (static_cast<double>(cfg.episodes) * cfg.seeds.size());
  report.episodes = cfg.episodes;
  report.seeds = cfg.seeds;
  report.normalized = cfg.normalized;
  return report;
}

Vector episode_start(const Environment& env, const Dataset& expert_data,
                     const EvalConfig& cfg, std::uint64_t seed, int episode) {
  if (cfg.use_expert_starts)
    return expert_data.trajectories[episode % expert_data.size()].states.row(0);
  Rng rng(derive_seed(seed, "eval/episode",
                      static_cast<std::uint64_t>(episode)));
  return env.sample_initial_state(rng);
}

}  // namespace

EvalReport evaluate_policy(const PolicyFn& policy, const Environment& env,
                           const ConstraintSpec& spec,
                           const Dataset& expert_data, const EvalConfig& cfg,
                           std::vector<Trajectory>* rollouts) {
  const int max_steps =
      cfg.max_steps > 0 ? cfg.max_steps : env.max_episode_steps();
  return aggregate(
      env, expert_data, cfg,
      [&](std::uint64_t seed, int episode) {
        Vector s0 = episode_start(env, expert_data, cfg, seed, episode);
        return rollout(
            env, [&](const Vector& s) { return project(policy(s), s, spec); },
            s0, max_steps);
      },
      rollouts);
}

EvalReport evaluate_replay(const Environment& env, const ConstraintSpec& spec,
                           const Dataset& expert_data, const EvalConfig& cfg,
                           std::vector<Trajectory>* rollouts) {
  const int max_steps =
      cfg.max_steps > 0 ? cfg.max_steps : env.max_episode_steps();
  return aggregate(
      env, expert_data, cfg,
      [&](std::uint64_t seed, int episode) {
        Vector s = episode_start(env, expert_data, cfg, seed, episode);
        const Trajectory& demo =
            expert_data.trajectories[nearest_expert_index(s, expert_data)];
        std::vector<Vector> states, actions;
        states.push_back(s);
        for (int t = 0; t < demo.length() && t < max_steps; ++t) {
          Vector a = project(demo.actions.row(t), s, spec);
          StepResult step = env.step(s, a);
          actions.push_back(a);
          states.push_back(step.next_state);
          s = step.next_state;
          if (step.done) break;
        }
        Trajectory out;
        out.states.resize(static_cast<int>(states.size()), env.state_dim());
        out.actions.resize(static_cast<int>(actions.size()), env.action_dim());
        for (size_t i = 0; i < states.size(); ++i) out.states.row(i) = states[i];
        for (size_t i = 0; i < actions.size(); ++i)
          out.actions.row(i) = actions[i];
        return out;
      },
      rollouts);
}

std::string eval_report_summary(const EvalReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "return %.3f +- %.3f | d_dtw%s %.3f +- %.3f | success %.2f "
                "(%d episodes x %zu seeds)",
                report.return_mean, report.return_std,
                report.normalized ? " (normalized)" : "", report.dtw_mean,
                report.dtw_std, report.success_rate, report.episodes,
                report.seeds.size());
  return buf;
}

void write_eval_csv(const std::vector<std::pair<std::string, EvalReport>>& rows,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << "method,return_mean,return_std,dtw_mean,dtw_std,success_rate,"
         "episodes,seeds,normalized\n";
  for (const auto& [method, r] : rows) {
    std::string seeds;
    for (size_t i = 0; i < r.seeds.size(); ++i) {
      if (i > 0) seeds += ";";
      seeds += std::to_string(r.seeds[i]);
    }
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%s,%d\n",
                  method.c_str(), r.return_mean, r.return_std, r.dtw_mean,
                  r.dtw_std, r.success_rate, r.episodes, seeds.c_str(),
                  r.normalized ? 1 : 0);
    out << buf;
  }
}

}  // namespace acil
