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

#ifndef HYDRA_PARTITIONER_H_
#define HYDRA_PARTITIONER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hydra/profiler.h"
#include "hydra/schedule_io.h"

namespace hydra {

struct KMeansResult {
  // Cluster of each input value. Clusters are numbered by ascending centroid.
  std::vector<int> assignment;
  std::vector<double> centroids;
  int iterations = 0;
};

inline constexpr int kKMeansMaxIterations = 100;

// Lloyd's algorithm on scalars. Centroids start at k evenly spaced quantiles
// of the sorted values; assignment ties go to the lower centroid. A cluster
// left empty takes the point farthest from its own centroid. Stops at an
// assignment fixpoint or after kKMeansMaxIterations. `seed` is reserved for
// tie perturbation and does not affect the current algorithm.
// Throws kInvalidK when k == 0 or k > values.size().
KMeansResult KMeans1D(std::span<const double> values, int k, uint64_t seed = 42);

// Within-cluster sum of squares of an assignment.
double WithinClusterSumOfSquares(std::span<const double> values,
                                 std::span<const int> assignment, int k);

// Assignment to the nearest initial quantile centroid (the state Lloyd's
// iterations start from).
std::vector<int> InitialQuantileAssignment(std::span<const double> values, int k);

struct Stage {
  std::vector<int64_t> members;  // 1-based layer indices, ascending
  double centroid = 0.0;

  int64_t size() const { return static_cast<int64_t>(members.size()); }
  bool operator==(const Stage&) const = default;
};

// Stages ordered by ascending centroid; together they cover layers
// 1..num_layers() exactly once.
class StagePartition {
 public:
  StagePartition() = default;
  // Throws kInvalidArgument unless stages are non-empty, disjoint and cover
  // 1..N.
  explicit StagePartition(std::vector<Stage> stages);

  // Contiguous stages of the given sizes, centroids 1..t.
  static StagePartition Contiguous(std::span<const int64_t> sizes);

  const std::vector<Stage>& stages() const { return stages_; }
  int64_t num_stages() const { return static_cast<int64_t>(stages_.size()); }
  int64_t num_layers() const { return num_layers_; }
  std::vector<int64_t> sizes() const;
  // 0-based stage index of each layer (indexed by layer - 1).
  std::vector<int64_t> StageOfLayer() const;
  // Stable identifier derived from stage membership.
  std::string Id() const;

  bool operator==(const StagePartition&) const = default;

 private:
  std::vector<Stage> stages_;
  int64_t num_layers_ = 0;
};

// Groups layers by 1-D k-means on mean_norm. Input order does not matter.
StagePartition PartitionStages(std::span<const LayerGradProfile> profiles,
                               int64_t num_stages, uint64_t seed = 42);

// {"num_stages": t, "stages": [{"members": [...], "centroid": x}, ...]}
Json PartitionToJson(const StagePartition& partition);
StagePartition PartitionFromJson(const Json& json);

}  // namespace hydra

#endif  // HYDRA_PARTITIONER_H_
