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

#ifndef HYDRA_TENSOR_CHECKPOINT_H_
#define HYDRA_TENSOR_CHECKPOINT_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "hydra/schedule_io.h"
#include "hydra/tensor/matrix.h"

namespace hydra::tensor {

inline constexpr std::string_view kCheckpointFormat = "hydra-checkpoint/1";

// Named arrays, sorted by name on disk:
//   {"format": "hydra-checkpoint/1",
//    "metadata": {...},
//    "arrays": [{"name": str, "rows": int, "cols": int, "data": [row-major]}]}
// Doubles are written with round-trip precision.
struct Checkpoint {
  Json metadata = Json::object();
  std::map<std::string, Matrix> arrays;

  const Matrix& at(const std::string& name) const;
};

Json CheckpointToJson(const Checkpoint& checkpoint);
Checkpoint CheckpointFromJson(const Json& json);

void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace hydra::tensor

#endif  // HYDRA_TENSOR_CHECKPOINT_H_
