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

#ifndef HYDRA_METRICS_H_
#define HYDRA_METRICS_H_

#include <array>
#include <string>
#include <string_view>

namespace hydra {

inline constexpr int kNumMetrics = 6;

// Slots, in order: MME, MMB, VQA-T, POPE, GQA, SQA-I.
using MetricVector = std::array<double, kNumMetrics>;

std::string_view MetricName(int index);

// Standard LoRA (rank 128) scores of the 1.4B model; the reference scale for
// the default scalarizer and the base of the synthetic oracle.
inline constexpr MetricVector kReferenceMetrics = {1147.00, 46.56, 40.28,
                                                   83.76,   55.28, 51.95};

using MetricWeights = std::array<double, kNumMetrics>;

// sum_k weights[k] * metrics[k].
double Scalarize(const MetricVector& metrics, const MetricWeights& weights);

// Equal weight after dividing each metric by its reference value:
// weights[k] = 1 / (6 * kReferenceMetrics[k]).
MetricWeights EqualNormalizedWeights();

MetricWeights OneHotWeights(int index);

// "equal", a metric name (case-insensitive: "mme", "mmb", "vqa-t", "pope",
// "gqa", "sqa-i"), or six comma-separated raw weights. Throws
// kInvalidArgument.
MetricWeights ParseScalarizer(std::string_view text);

}  // namespace hydra

#endif  // HYDRA_METRICS_H_
