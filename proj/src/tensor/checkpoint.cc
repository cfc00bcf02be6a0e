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

#include "hydra/tensor/checkpoint.h"

#include "hydra/error.h"

namespace hydra::tensor {

const Matrix& Checkpoint::at(const std::string& name) const {
  const auto it = arrays.find(name);
  if (it == arrays.end()) {
    throw Error(ErrorCode::kParse, "checkpoint has no array \"" + name + "\"");
  }
  return it->second;
}

Json CheckpointToJson(const Checkpoint& checkpoint) {
  Json json = Json::object();
  json["format"] = kCheckpointFormat;
  json["metadata"] = checkpoint.metadata;
  Json arrays = Json::array();
  for (const auto& [name, m] : checkpoint.arrays) {
    Json entry = Json::object();
    entry["name"] = name;
    entry["rows"] = m.rows();
    entry["cols"] = m.cols();
    entry["data"] = std::vector<double>(m.values().begin(), m.values().end());
    arrays.push_back(std::move(entry));
  }
  json["arrays"] = std::move(arrays);
  return json;
}

Checkpoint CheckpointFromJson(const Json& json) {
  if (!json.is_object() || !json.contains("format") ||
      json["format"] != kCheckpointFormat) {
    throw Error(ErrorCode::kParse, "not a " + std::string(kCheckpointFormat) +
                                       " checkpoint");
  }
  Checkpoint checkpoint;
  if (json.contains("metadata")) checkpoint.metadata = json["metadata"];
  for (const Json& entry : json.at("arrays")) {
    const auto rows = entry.at("rows").get<int64_t>();
    const auto cols = entry.at("cols").get<int64_t>();
    const auto& data = entry.at("data");
    if (static_cast<int64_t>(data.size()) != rows * cols) {
      throw Error(ErrorCode::kParse, "array \"" +
                                         entry.at("name").get<std::string>() +
                                         "\" has the wrong element count");
    }
    Matrix m(rows, cols);
    for (int64_t i = 0; i < m.size(); ++i) m[i] = data[static_cast<size_t>(i)].get<double>();
    checkpoint.arrays.emplace(entry.at("name").get<std::string>(), std::move(m));
  }
  return checkpoint;
}

void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path) {
  WriteTextFile(path, DumpJson(CheckpointToJson(checkpoint)));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return CheckpointFromJson(ReadJsonFile(path));
}

}  // namespace hydra::tensor
