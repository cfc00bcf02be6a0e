// Copyright 2026 The Hydra Rank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HYDRA_CLI_H_
#define HYDRA_CLI_H_

#include <ostream>

namespace hydra {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitValidationFailure = 2;
inline constexpr int kExitInternalError = 3;

// Runs one `hydra` command line. Results go to `out` (or --output), logs and
// the {"error", "message"} failure JSON to `err`. Returns the exit code.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hydra

#endif  // HYDRA_CLI_H_
