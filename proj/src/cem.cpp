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

#include "acil/cem.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

namespace acil {

namespace {

void run_parallel(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::mutex error_mutex;
  int workers = std::min(threads, count);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

void CemConfig::validate() const {
  if (population < 1) throw ConfigError("cem.population: must be >= 1");
  if (elites < 1 || elites > population)
    throw ConfigError("cem.elites: must be in [1, population]");
  if (iterations < 1) throw ConfigError("cem.iterations: must be >= 1");
  if (horizon < 1) throw ConfigError("cem.horizon: must be >= 1");
  if (momentum < 0.0 || momentum > 1.0)
    throw ConfigError("cem.momentum: must be in [0, 1]");
  if (init_std <= 0.0) throw ConfigError("cem.init_std: must be positive");
  if (max_rejection < 1) throw ConfigError("cem.max_rejection: must be >= 1");
  if (particles < 1) throw ConfigError("cem.particles: must be >= 1");
  if (steps_per_plan < 1)
    throw ConfigError("cem.steps_per_plan: must be >= 1");
}

ActionBounds static_action_bounds(const ConstraintSpec& spec,
                                  double action_bound, double init_std) {
  ActionBounds b;
  b.fallback_w = init_std;
  if (spec.family == ConstraintFamily::kBox) {
    b.valid = true;
    Vector half =
        spec.box_half_width.cwiseMin(Vector::Constant(
            spec.box_half_width.size(), action_bound));
    b.lower = -half;
    b.upper = half;
  }
  return b;
}

CemDistribution cem_update(const CemDistribution& current,
                           const Matrix& elite_mean, const Matrix& elite_var,
                           double alpha, const ActionBounds& bounds) {
  CemDistribution next;
  next.mean = alpha * current.mean + (1.0 - alpha) * elite_mean;
  next.var = alpha * current.var + (1.0 - alpha) * elite_var;
  for (int h = 0; h < next.var.rows(); ++h) {
    for (int d = 0; d < next.var.cols(); ++d) {
      double w = bounds.fallback_w;
      if (bounds.valid) {
        w = std::min(next.mean(h, d) - bounds.lower[d],
                     bounds.upper[d] - next.mean(h, d));
        w = std::max(w, 0.0);
      }
      next.var(h, d) = std::min(next.var(h, d), 0.5 * w);
    }
  }
  return next;
}

Matrix sample_feasible_sequence(const CemDistribution& dist,
                                const ConstraintSpec& spec,
                                const Vector& s_ref, int max_tries,
                                double action_bound, Rng& rng,
                                int* fallback_count) {
  const int horizon = static_cast<int>(dist.mean.rows());
  const int dim = static_cast<int>(dist.mean.cols());
  Matrix out(horizon, dim);
  for (int h = 0; h < horizon; ++h) {
    Vector std_dev = dist.var.row(h).cwiseMax(0.0).cwiseSqrt();
    Vector action(dim);
    bool ok = false;
    for (int attempt = 0; attempt < max_tries && !ok; ++attempt) {
      action = dist.mean.row(h).transpose() +
               std_dev.cwiseProduct(rng.normal_vector(dim));
      action = action.cwiseMax(-action_bound).cwiseMin(action_bound);
      ok = is_feasible(action, s_ref, spec);
    }
    if (!ok) {
      action = project(action, s_ref, spec);
      if (fallback_count != nullptr) ++(*fallback_count);
    }
    out.row(h) = action;
  }
  return out;
}

Matrix erc_blend(const Matrix& sampled, const Matrix& expert_actions,
                 const ErcConfig& erc, const ConstraintSpec& spec,
                 const Matrix& predicted_states) {
  Matrix out = sampled;
  if (erc.beta == 0.0) return out;
  const int blend_rows = std::min<int>(
      {static_cast<int>(sampled.rows()), static_cast<int>(expert_actions.rows()),
       erc.horizon + 1});
  for (int h = 0; h < blend_rows; ++h) {
    Vector proj = project(expert_actions.row(h), predicted_states.row(h), spec);
    if (erc.beta == 1.0)
      out.row(h) = proj;
    else
      out.row(h) =
          erc.beta * proj.transpose() + (1.0 - erc.beta) * sampled.row(h);
  }
  return out;
}

CemResult cem_optimize(const CandidateEvaluator& evaluate, int action_dim,
                       const CemConfig& cem, const ConstraintSpec& spec,
                       const Vector& s_ref, double action_bound,
                       std::uint64_t seed, PlanDiagnostics* diag,
                       const Matrix* injected_candidate,
                       const CemDistribution* init) {
  cem.validate();
  if (action_dim < 1) throw InputError("cem_optimize: bad action dimension");
  ActionBounds bounds = static_action_bounds(spec, action_bound, cem.init_std);

  CemDistribution dist;
  if (init != nullptr) {
    dist = *init;
  } else {
    dist.mean = Matrix::Zero(cem.horizon, action_dim);
    dist.var =
        Matrix::Constant(cem.horizon, action_dim, cem.init_std * cem.init_std);
  }
  dist = cem_update(dist, dist.mean, dist.var, 1.0, bounds);

  CemResult result;
  bool have_best = false;
  std::vector<Matrix> sampled(cem.population);
  std::vector<CandidateEval> evals(cem.population);
  std::vector<int> fallbacks(cem.population, 0);

  for (int iter = 0; iter < cem.iterations; ++iter) {
    run_parallel(cem.population, cem.threads, [&](int c) {
      Rng rng(derive_seed(
          derive_seed(seed, "iter", static_cast<std::uint64_t>(iter)),
          "candidate", static_cast<std::uint64_t>(c)));
      int fb = 0;
      Matrix actions = sample_feasible_sequence(
          dist, spec, s_ref, cem.max_rejection, action_bound, rng, &fb);
      if (injected_candidate != nullptr && iter == 0 && c == 0)
        actions = *injected_candidate;
      fallbacks[c] = fb;
      sampled[c] = actions;
      evals[c] = evaluate(actions, rng, iter, c);
    });

    if (diag != nullptr) {
      std::vector<double> costs(cem.population);
      for (int c = 0; c < cem.population; ++c) costs[c] = evals[c].cost;
      diag->iteration_costs.push_back(std::move(costs));
      diag->rejection_fallbacks +=
          std::accumulate(fallbacks.begin(), fallbacks.end(), 0);
    }

    for (int c = 0; c < cem.population; ++c) {
      if (!have_best || evals[c].cost < result.best.cost) {
        have_best = true;
        result.best = evals[c];
        result.best_iteration = iter;
        result.best_candidate = c;
      }
    }

    // Elites: lowest costs, ties resolved by candidate index. Statistics
    // come from the raw sampled sequences the distribution generated.
    std::vector<int> order(cem.population);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (evals[a].cost != evals[b].cost) return evals[a].cost < evals[b].cost;
      return a < b;
    });
    Matrix elite_mean = Matrix::Zero(cem.horizon, action_dim);
    for (int e = 0; e < cem.elites; ++e) elite_mean += sampled[order[e]];
    elite_mean /= cem.elites;
    Matrix elite_var = Matrix::Zero(cem.horizon, action_dim);
    for (int e = 0; e < cem.elites; ++e)
      elite_var += (sampled[order[e]] - elite_mean).array().square().matrix();
    elite_var /= cem.elites;

    dist = cem_update(dist, elite_mean, elite_var, cem.momentum, bounds);
    if (diag != nullptr) diag->distributions.push_back(dist);
  }
  result.final_distribution = dist;
  return result;
}

CemPlanner::CemPlanner(const ForwardModel& model, ConstraintSpec spec,
                       CemConfig cem, ErcConfig erc, double action_bound)
    : model_(model),
      spec_(std::move(spec)),
      cem_(cem),
      erc_(erc),
      action_bound_(action_bound) {
  cem_.validate();
}

void CemPlanner::start_episode(const Trajectory& expert, std::uint64_t seed) {
  if (!expert.valid()) throw InputError("planner: invalid expert trajectory");
  expert_ = &expert;
  stats_ = NormalizationStats::from_rows(expert.states);
  episode_seed_ = seed;
  step_index_ = 0;
  const int dim = static_cast<int>(expert.actions.cols());
  dist_.mean = Matrix::Zero(cem_.horizon, dim);
  dist_.var =
      Matrix::Constant(cem_.horizon, dim, cem_.init_std * cem_.init_std);
  ActionBounds bounds =
      static_action_bounds(spec_, action_bound_, cem_.init_std);
  dist_ = cem_update(dist_, dist_.mean, dist_.var, 1.0, bounds);
}

PlanResult CemPlanner::plan_step(const Vector& current_state, int t_pg,
                                 PlanDiagnostics* diag) {
  if (expert_ == nullptr)
    throw InputError("planner: start_episode must be called first");
  const int last_state = expert_->num_states() - 1;
  if (t_pg < 0 || t_pg >= last_state)
    throw InputError("planner: t_pg out of range");

  // Expert segment sigma_{t_pg : min(t_pg+H, end)}, normalized by the
  // full-trajectory stats, with the final state excluded from matching
  // when the segment has at least two states.
  const int seg_end = std::min(t_pg + cem_.horizon, last_state);
  const int seg_len = seg_end - t_pg + 1;
  const int target_len = seg_len >= 2 ? seg_len - 1 : seg_len;
  Matrix target = minmax_normalize(
      expert_->states.middleRows(t_pg, target_len), stats_);

  // Expert actions available for the ERC blend.
  const int expert_len = expert_->length();
  const int erc_rows = std::max(0, std::min(cem_.horizon, expert_len - t_pg));
  Matrix expert_actions = expert_->actions.middleRows(t_pg, erc_rows);

  Matrix injected;
  const Matrix* injected_ptr = nullptr;
  if (cem_.inject_expert_candidate) {
    injected = Matrix::Zero(cem_.horizon, expert_->actions.cols());
    injected.topRows(erc_rows) = expert_actions;
    injected_ptr = &injected;
  }

  auto evaluate = [&](const Matrix& sampled, Rng& rng, int iteration,
                      int candidate) -> CandidateEval {
    CandidateEval eval;
    double cost_sum = 0.0;
    for (int p = 0; p < cem_.particles; ++p) {
      int member =
          (candidate * cem_.particles + p) % model_.num_members();
      Rng* noise = &rng;
      std::optional<Rng> particle_rng;
      if (p > 0) {
        particle_rng.emplace(derive_seed(
            derive_seed(episode_seed_, "step",
                        static_cast<std::uint64_t>(step_index_)),
            "noise",
            static_cast<std::uint64_t>(candidate) * 1000003ULL + p));
        noise = &*particle_rng;
      }

      // Fused rollout: blend, project at the predicted state, propagate.
      Matrix states(cem_.horizon + 1, current_state.size());
      Matrix actions(cem_.horizon, sampled.cols());
      states.row(0) = current_state;
      Vector s = current_state;
      for (int h = 0; h < cem_.horizon; ++h) {
        Vector a = sampled.row(h);
        if (erc_.beta > 0.0 && h < erc_rows && h <= erc_.horizon) {
          Vector proj = project(expert_actions.row(h), s, spec_);
          a = erc_.beta == 1.0
                  ? proj
                  : (erc_.beta * proj + (1.0 - erc_.beta) * a).eval();
        }
        a = project(a, s, spec_);
        actions.row(h) = a;
        GaussianPrediction pred = model_.predict(member, s, a);
        Vector z = noise->normal_vector(static_cast<int>(s.size()));
        s = pred.mean +
            (0.5 * pred.log_var).array().exp().matrix().cwiseProduct(z);
        states.row(h + 1) = s;
      }

      DtwResult dtw = dtw_distance(minmax_normalize(states, stats_), target);
      cost_sum += dtw.cost;
      if (p == 0) {
        eval.actions = std::move(actions);
        eval.states = std::move(states);
        eval.path = std::move(dtw.path);
      }
    }
    eval.cost = cost_sum / cem_.particles;
    return eval;
  };

  std::uint64_t step_seed = derive_seed(
      episode_seed_, "step", static_cast<std::uint64_t>(step_index_));
  CemResult cem_result = cem_optimize(
      evaluate, static_cast<int>(expert_->actions.cols()), cem_, spec_,
      current_state, action_bound_, step_seed, diag, injected_ptr, &dist_);

  PlanResult result;
  result.best_actions = cem_result.best.actions;
  result.best_states = cem_result.best.states;
  result.best_cost = cem_result.best.cost;
  result.advancement = progression_advancement(cem_result.best.path);
  result.first_action =
      project(cem_result.best.actions.row(0), current_state, spec_);

  // Warm start for the next step: keep the refined distribution, shift
  // the mean left by the executed step count, zero-fill the tail, and
  // reset the variance.
  const int shift = std::min(cem_.steps_per_plan, cem_.horizon);
  dist_ = cem_result.final_distribution;
  Matrix shifted = Matrix::Zero(dist_.mean.rows(), dist_.mean.cols());
  shifted.topRows(cem_.horizon - shift) = dist_.mean.bottomRows(cem_.horizon - shift);
  dist_.mean = shifted;
  dist_.var.setConstant(cem_.init_std * cem_.init_std);
  ActionBounds bounds =
      static_action_bounds(spec_, action_bound_, cem_.init_std);
  dist_ = cem_update(dist_, dist_.mean, dist_.var, 1.0, bounds);

  ++step_index_;
  return result;
}

}  // namespace acil
