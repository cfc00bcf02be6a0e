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

#include "hydra/metrics.h"

#include <cctype>
#include <sstream>
#include <vector>

#include "hydra/error.h"

namespace hydra {

std::string_view MetricName(int index) {
  static constexpr std::array<std::string_view, kNumMetrics> kNames = {
      "MME", "MMB", "VQA-T", "POPE", "GQA", "SQA-I"};
  return kNames.at(static_cast<size_t>(index));
}

double Scalarize(const MetricVector& metrics, const MetricWeights& weights) {
  double total = 0.0;
  for (int k = 0; k < kNumMetrics; ++k) total += weights[k] * metrics[k];
  return total;
}

MetricWeights EqualNormalizedWeights() {
  MetricWeights w{};
  for (int k = 0; k < kNumMetrics; ++k) {
    w[k] = 1.0 / (kNumMetrics * kReferenceMetrics[k]);
  }
  return w;
}

MetricWeights OneHotWeights(int index) {
  MetricWeights w{};
  w.at(static_cast<size_t>(index)) = 1.0;
  return w;
}

MetricWeights ParseScalarizer(std::string_view text) {
  std::string lower(text);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "equal") return EqualNormalizedWeights();
  for (int k = 0; k < kNumMetrics; ++k) {
    std::string name(MetricName(k));
    for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == name) return OneHotWeights(k);
  }
  std::vector<double> values;
  std::stringstream ss(lower);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      values.clear();
      break;
    }
  }
  if (values.size() != kNumMetrics) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown scalarizer \"" + std::string(text) + "\"");
  }
  MetricWeights w{};
  for (int k = 0; k < kNumMetrics; ++k) w[k] = values[static_cast<size_t>(k)];
  return w;
}

}  // namespace hydra
