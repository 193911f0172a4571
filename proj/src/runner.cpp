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

#include "acil/runner.hpp"

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "acil/align.hpp"
#include "acil/config.hpp"
#include "acil/constraint.hpp"
#include "acil/env.hpp"
#include "acil/imitation.hpp"

namespace acil {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed = -1;  // -1: keep the config's seed
  int threads = 1;
  bool normalized = false;
};

std::string resolve(const std::string& out_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(out_dir) / p).string();
}

void require_input(const std::string& field, const std::string& path) {
  if (!fs::exists(path))
    throw ConfigError("config field '" + field + "': file not found: " + path);
}

struct Run {
  RunConfig cfg;
  std::unique_ptr<Environment> env;
  ConstraintSpec spec;
  std::string out_dir;

  std::string path(const std::string& relative) const {
    return resolve(out_dir, relative);
  }
};

Run load_run(const CommonArgs& args) {
  if (args.config_path.empty())
    throw ConfigError("--config: a configuration file is required");
  Run run;
  run.cfg = RunConfig::from_file(args.config_path);
  if (args.seed >= 0) run.cfg.seed = static_cast<std::uint64_t>(args.seed);
  run.cfg.align.seed = run.cfg.seed;
  run.cfg.bc.seed = run.cfg.seed;
  run.cfg.align.cem.threads = args.threads;
  run.cfg.eval.normalized = args.normalized;
  run.env = make_environment(run.cfg.env_name, run.cfg.env_max_steps);
  run.spec = parse_constraint(run.cfg.constraint_text, run.env->state_dim(),
                              run.env->action_dim());
  run.out_dir = args.out_dir;
  fs::create_directories(args.out_dir);
  return run;
}

int cmd_expert_gen(const CommonArgs& args) {
  Run run = load_run(args);
  Dataset data = generate_expert_dataset(*run.env, run.cfg.expert_count,
                                         run.cfg.expert_max_steps,
                                         derive_seed(run.cfg.seed, "expert-gen"));
  write_dataset(data, run.path(run.cfg.paths.expert));
  log_info("wrote " + std::to_string(data.size()) + " expert trajectories (" +
           std::to_string(data.num_transitions()) + " transitions) to " +
           run.path(run.cfg.paths.expert));
  return 0;
}

int cmd_align(const CommonArgs& args) {
  Run run = load_run(args);
  require_input("paths.expert", run.path(run.cfg.paths.expert));
  Dataset expert = read_dataset(run.path(run.cfg.paths.expert));

  std::vector<EpisodeMetrics> metrics;
  EnsembleModel model(run.env->state_dim(), run.env->action_dim(),
                      run.cfg.dynamics, 0);
  SurrogateDataset surrogate =
      generate_surrogate_dataset(expert, *run.env, run.spec, run.cfg.align,
                                 run.cfg.dynamics, &metrics, &model);

  Dataset out = surrogate.to_dataset(expert, run.cfg.constraint_text);
  write_dataset(out, run.path(run.cfg.paths.surrogate));
  write_metrics_csv(metrics, run.path(run.cfg.paths.metrics));
  model.save(run.path(run.cfg.paths.model));
  log_info("wrote surrogate dataset to " + run.path(run.cfg.paths.surrogate));
  return 0;
}

int cmd_train_bc(const CommonArgs& args) {
  Run run = load_run(args);
  const std::string& input = run.cfg.bc_input == "expert"
                                 ? run.cfg.paths.expert
                                 : run.cfg.paths.surrogate;
  const std::string field =
      run.cfg.bc_input == "expert" ? "paths.expert" : "paths.surrogate";
  require_input(field, run.path(input));
  Dataset data = read_dataset(run.path(input));
  PolicyNet policy = train_bc(data, run.cfg.bc);
  policy.save(run.path(run.cfg.paths.policy));
  log_info("wrote policy checkpoint to " + run.path(run.cfg.paths.policy));
  return 0;
}

int cmd_eval(const CommonArgs& args) {
  Run run = load_run(args);
  require_input("paths.policy", run.path(run.cfg.paths.policy));
  require_input("paths.expert", run.path(run.cfg.paths.expert));
  PolicyNet policy = PolicyNet::load(run.path(run.cfg.paths.policy));
  Dataset expert = read_dataset(run.path(run.cfg.paths.expert));

  EvalReport report = evaluate_policy(
      [&policy](const Vector& s) { return policy.act(s); }, *run.env, run.spec,
      expert, run.cfg.eval);
  write_eval_csv({{"policy", report}}, run.path(run.cfg.paths.eval));
  std::cout << "policy: " << eval_report_summary(report) << "\n";
  return 0;
}

int cmd_compare(const CommonArgs& args) {
  Run run = load_run(args);

  // Expert demonstrations (generated if absent).
  std::string expert_path = run.path(run.cfg.paths.expert);
  if (!fs::exists(expert_path)) {
    Dataset data = generate_expert_dataset(
        *run.env, run.cfg.expert_count, run.cfg.expert_max_steps,
        derive_seed(run.cfg.seed, "expert-gen"));
    write_dataset(data, expert_path);
  }
  Dataset expert = read_dataset(expert_path);

  EvalConfig eval_cfg = run.cfg.eval;
  eval_cfg.use_expert_starts = true;  // replay needs a matching tape

  // (a) Open-loop projected replay of the demonstrations.
  EvalReport replay = evaluate_replay(*run.env, run.spec, expert, eval_cfg);
  log_info("replay_proj: " + eval_report_summary(replay));

  // (b) Behavior cloning on the raw expert data, projected at inference.
  BcConfig bc_raw_cfg = run.cfg.bc;
  bc_raw_cfg.seed = derive_seed(run.cfg.seed, "compare/bc-raw");
  PolicyNet bc_raw = train_bc(expert, bc_raw_cfg);
  EvalReport raw = evaluate_policy(
      [&bc_raw](const Vector& s) { return bc_raw.act(s); }, *run.env, run.spec,
      expert, eval_cfg);
  log_info("bc_raw: " + eval_report_summary(raw));

  // (c) Alignment followed by behavior cloning on the surrogates.
  std::vector<EpisodeMetrics> metrics;
  SurrogateDataset surrogate = generate_surrogate_dataset(
      expert, *run.env, run.spec, run.cfg.align, run.cfg.dynamics, &metrics);
  Dataset surrogate_data =
      surrogate.to_dataset(expert, run.cfg.constraint_text);
  write_dataset(surrogate_data, run.path(run.cfg.paths.surrogate));
  write_metrics_csv(metrics, run.path(run.cfg.paths.metrics));
  BcConfig bc_sur_cfg = run.cfg.bc;
  bc_sur_cfg.seed = derive_seed(run.cfg.seed, "compare/bc-sur");
  PolicyNet bc_sur = train_bc(surrogate_data, bc_sur_cfg);
  bc_sur.save(run.path(run.cfg.paths.policy));
  EvalReport aligned = evaluate_policy(
      [&bc_sur](const Vector& s) { return bc_sur.act(s); }, *run.env, run.spec,
      expert, eval_cfg);
  log_info("aligned_bc: " + eval_report_summary(aligned));

  std::vector<std::pair<std::string, EvalReport>> rows = {
      {"replay_proj", replay}, {"bc_raw", raw}, {"aligned_bc", aligned}};
  write_eval_csv(rows, run.path(run.cfg.paths.compare));
  for (const auto& [name, report] : rows)
    std::cout << name << ": " << eval_report_summary(report) << "\n";
  return 0;
}

int cmd_dump_traj(const CommonArgs& args, const std::string& input) {
  fs::create_directories(args.out_dir);
  if (!fs::exists(input))
    throw ConfigError("dump-traj: file not found: " + input);
  Dataset data = read_dataset(input);
  std::string stem = fs::path(input).stem().string();
  for (int i = 0; i < data.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%03d.csv", stem.c_str(), i);
    write_trajectory_csv(data.trajectories[i],
                         resolve(args.out_dir, name));
  }
  log_info("wrote " + std::to_string(data.size()) + " trajectory CSVs to " +
           args.out_dir);
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& argv) {
  CLI::App app{"Action-constrained imitation via DTW-aligned surrogate "
               "demonstrations"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string dump_input;

  auto add_common = [&args](CLI::App* cmd, bool with_normalized = false) {
    cmd->add_option("--config", args.config_path, "run configuration file");
    cmd->add_option("--seed", args.seed, "master seed (overrides the config)");
    cmd->add_option("--threads", args.threads, "worker threads (default 1)");
    cmd->add_option("--out", args.out_dir, "output directory (default .)");
    if (with_normalized)
      cmd->add_flag("--normalized", args.normalized,
                    "report DTW on normalized states");
  };

  CLI::App* expert_gen =
      app.add_subcommand("expert-gen", "generate expert demonstrations");
  add_common(expert_gen);
  CLI::App* align =
      app.add_subcommand("align", "generate surrogate demonstrations");
  add_common(align);
  CLI::App* train =
      app.add_subcommand("train-bc", "behavior-clone a dataset");
  add_common(train);
  CLI::App* eval = app.add_subcommand("eval", "evaluate a trained policy");
  add_common(eval, /*with_normalized=*/true);
  CLI::App* compare =
      app.add_subcommand("compare", "replay vs raw BC vs aligned BC");
  add_common(compare);
  CLI::App* dump = app.add_subcommand("dump-traj", "dataset to per-trajectory CSV");
  dump->add_option("input", dump_input, "dataset file")->required();
  dump->add_option("--out", args.out_dir, "output directory (default .)");

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (expert_gen->parsed()) return cmd_expert_gen(args);
    if (align->parsed()) return cmd_align(args);
    if (train->parsed()) return cmd_train_bc(args);
    if (eval->parsed()) return cmd_eval(args);
    if (compare->parsed()) return cmd_compare(args);
    if (dump->parsed()) return cmd_dump_traj(args, dump_input);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace acil
