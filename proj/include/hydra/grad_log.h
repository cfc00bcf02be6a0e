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

#ifndef HYDRA_GRAD_LOG_H_
#define HYDRA_GRAD_LOG_H_

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "hydra/core.h"

namespace hydra {

// L2 norm of one adapter parameter block's gradient at one training step.
struct GradLogRecord {
  int64_t step = 0;
  int64_t layer = 1;  // 1-based
  ComponentKind component = ComponentKind::kQ;
  double grad_norm = 0.0;

  bool operator==(const GradLogRecord&) const = default;
};

// {"step":0,"layer":1,"component":"Q","grad_norm":0.63}. Unknown keys are
// ignored. Throws Error(kMalformedRecord) naming `line_number` on bad JSON,
// missing keys, an unknown component, layer < 1, or a negative or non-finite
// norm.
GradLogRecord ParseGradLogLine(std::string_view line, int64_t line_number);

// Parses JSON-Lines, skipping blank lines. Line numbers are 1-based.
std::vector<GradLogRecord> ReadGradLog(std::istream& in);

std::string GradLogLine(const GradLogRecord& record);

}  // namespace hydra

#endif  // HYDRA_GRAD_LOG_H_
