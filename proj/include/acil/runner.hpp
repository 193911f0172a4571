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

#ifndef ACIL_RUNNER_HPP_
#define ACIL_RUNNER_HPP_

#include <string>
#include <vector>

namespace acil {

// Entry point behind the CLI binary. argv excludes the program name.
// Subcommands: expert-gen | align | train-bc | eval | compare | dump-traj.
// Exit status: 0 success, 2 configuration/validation errors, 1 runtime
// failures.
int run_command(const std::vector<std::string>& argv);

}  // namespace acil

#endif  // ACIL_RUNNER_HPP_
