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

#include "hydra/partitioner.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "hydra/error.h"

namespace hydra {
namespace {

std::vector<double> QuantileCentroids(std::span<const double> values, int k) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  std::vector<double> centroids(static_cast<size_t>(k));
  if (k == 1) {
    centroids[0] = sorted[(n - 1) / 2];
    return centroids;
  }
  for (int j = 0; j < k; ++j) {
    const double pos = static_cast<double>(j) * static_cast<double>(n - 1) /
                       static_cast<double>(k - 1);
    centroids[static_cast<size_t>(j)] = sorted[static_cast<size_t>(std::llround(pos))];
  }
  return centroids;
}

// Nearest centroid; on equal distance the lower centroid wins, and on equal
// centroids the lower index.
int Nearest(double x, const std::vector<double>& centroids) {
  int best = 0;
  double best_dist = std::abs(x - centroids[0]);
  for (size_t j = 1; j < centroids.size(); ++j) {
    const double dist = std::abs(x - centroids[j]);
    const double cj = centroids[j];
    const double cb = centroids[static_cast<size_t>(best)];
    if (dist < best_dist || (dist == best_dist && cj < cb)) {
      best = static_cast<int>(j);
      best_dist = dist;
    }
  }
  return best;
}

std::vector<int> Assign(std::span<const double> values,
                        const std::vector<double>& centroids) {
  std::vector<int> assignment(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    assignment[i] = Nearest(values[i], centroids);
  }
  return assignment;
}

// Gives every empty cluster the point farthest from its current centroid,
// taken from clusters that can spare one.
void RepairEmpty(std::span<const double> values, std::vector<int>& assignment,
                 std::vector<double>& centroids) {
  const int k = static_cast<int>(centroids.size());
  std::vector<int> counts(static_cast<size_t>(k), 0);
  for (int c : assignment) ++counts[static_cast<size_t>(c)];
  for (int j = 0; j < k; ++j) {
    if (counts[static_cast<size_t>(j)] > 0) continue;
    int pick = -1;
    double pick_dist = -1.0;
    for (size_t i = 0; i < values.size(); ++i) {
      const int c = assignment[i];
      if (counts[static_cast<size_t>(c)] < 2) continue;
      const double dist = std::abs(values[i] - centroids[static_cast<size_t>(c)]);
      if (dist > pick_dist) {
        pick = static_cast<int>(i);
        pick_dist = dist;
      }
    }
    --counts[static_cast<size_t>(assignment[static_cast<size_t>(pick)])];
    assignment[static_cast<size_t>(pick)] = j;
    counts[static_cast<size_t>(j)] = 1;
    centroids[static_cast<size_t>(j)] = values[static_cast<size_t>(pick)];
  }
}

std::vector<double> Means(std::span<const double> values,
                          const std::vector<int>& assignment, int k) {
  std::vector<std::vector<double>> members(static_cast<size_t>(k));
  for (size_t i = 0; i < values.size(); ++i) {
    members[static_cast<size_t>(assignment[i])].push_back(values[i]);
  }
  std::vector<double> means(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) {
    auto& m = members[static_cast<size_t>(j)];
    std::sort(m.begin(), m.end());
    means[static_cast<size_t>(j)] =
        std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
  }
  return means;
}

}  // namespace

std::vector<int> InitialQuantileAssignment(std::span<const double> values, int k) {
  if (k < 1 || static_cast<size_t>(k) > values.size()) {
    throw Error(ErrorCode::kInvalidK, "k must be in [1, number of values]");
  }
  return Assign(values, QuantileCentroids(values, k));
}

double WithinClusterSumOfSquares(std::span<const double> values,
                                 std::span<const int> assignment, int k) {
  std::vector<double> sum(static_cast<size_t>(k), 0.0);
  std::vector<int> count(static_cast<size_t>(k), 0);
  for (size_t i = 0; i < values.size(); ++i) {
    sum[static_cast<size_t>(assignment[i])] += values[i];
    ++count[static_cast<size_t>(assignment[i])];
  }
  double total = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const auto c = static_cast<size_t>(assignment[i]);
    const double mean = sum[c] / count[c];
    total += (values[i] - mean) * (values[i] - mean);
  }
  return total;
}

KMeansResult KMeans1D(std::span<const double> values, int k,
                      [[maybe_unused]] uint64_t seed) {
  if (k < 1 || static_cast<size_t>(k) > values.size()) {
    throw Error(ErrorCode::kInvalidK,
                "k = " + std::to_string(k) + " with " +
                    std::to_string(values.size()) + " values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "k-means input must be finite");
    }
  }
  std::vector<double> centroids = QuantileCentroids(values, k);
  std::vector<int> assignment = Assign(values, centroids);
  RepairEmpty(values, assignment, centroids);
  int iterations = 0;
  while (iterations < kKMeansMaxIterations) {
    ++iterations;
    centroids = Means(values, assignment, k);
    std::vector<int> next = Assign(values, centroids);
    RepairEmpty(values, next, centroids);
    if (next == assignment) break;
    assignment = std::move(next);
  }
  centroids = Means(values, assignment, k);

  // Renumber clusters by (centroid, smallest member index).
  std::vector<size_t> first_member(static_cast<size_t>(k), values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    auto& f = first_member[static_cast<size_t>(assignment[i])];
    f = std::min(f, i);
  }
  std::vector<int> order(static_cast<size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto ua = static_cast<size_t>(a);
    const auto ub = static_cast<size_t>(b);
    if (centroids[ua] != centroids[ub]) return centroids[ua] < centroids[ub];
    return first_member[ua] < first_member[ub];
  });
  std::vector<int> rank(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) rank[static_cast<size_t>(order[static_cast<size_t>(j)])] = j;
  KMeansResult result;
  result.iterations = iterations;
  for (int c : assignment) result.assignment.push_back(rank[static_cast<size_t>(c)]);
  for (int j = 0; j < k; ++j) {
    result.centroids.push_back(centroids[static_cast<size_t>(order[static_cast<size_t>(j)])]);
  }
  return result;
}

StagePartition::StagePartition(std::vector<Stage> stages)
    : stages_(std::move(stages)) {
  if (stages_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "partition needs at least one stage");
  }
  std::vector<int64_t> all;
  for (Stage& s : stages_) {
    if (s.members.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "stage with no layers");
    }
    if (!std::isfinite(s.centroid)) {
      throw Error(ErrorCode::kInvalidArgument, "stage centroid must be finite");
    }
    std::sort(s.members.begin(), s.members.end());
    all.insert(all.end(), s.members.begin(), s.members.end());
  }
  std::sort(all.begin(), all.end());
  for (size_t i = 0; i < all.size(); ++i) {
    if (all[i] != static_cast<int64_t>(i) + 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "stages must be disjoint and cover layers 1.." +
                      std::to_string(all.size()));
    }
  }
  num_layers_ = static_cast<int64_t>(all.size());
}

StagePartition StagePartition::Contiguous(std::span<const int64_t> sizes) {
  std::vector<Stage> stages;
  int64_t next = 1;
  for (size_t i = 0; i < sizes.size(); ++i) {
    Stage s;
    for (int64_t j = 0; j < sizes[i]; ++j) s.members.push_back(next++);
    s.centroid = static_cast<double>(i + 1);
    stages.push_back(std::move(s));
  }
  return StagePartition(std::move(stages));
}

std::vector<int64_t> StagePartition::sizes() const {
  std::vector<int64_t> out;
  for (const Stage& s : stages_) out.push_back(s.size());
  return out;
}

std::vector<int64_t> StagePartition::StageOfLayer() const {
  std::vector<int64_t> out(static_cast<size_t>(num_layers_), -1);
  for (size_t i = 0; i < stages_.size(); ++i) {
    for (int64_t m : stages_[i].members) out[static_cast<size_t>(m - 1)] = static_cast<int64_t>(i);
  }
  return out;
}

std::string StagePartition::Id() const {
  uint64_t hash = 1469598103934665603ULL;
  auto mix = [&](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      hash ^= (v >> (8 * i)) & 0xffU;
      hash *= 1099511628211ULL;
    }
  };
  for (const Stage& s : stages_) {
    mix(0xffffffffULL);
    for (int64_t m : s.members) mix(static_cast<uint64_t>(m));
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "p-%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

StagePartition PartitionStages(std::span<const LayerGradProfile> profiles,
                               int64_t num_stages, uint64_t seed) {
  std::vector<LayerGradProfile> sorted(profiles.begin(), profiles.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.layer < b.layer; });
  std::vector<double> norms;
  for (const LayerGradProfile& p : sorted) norms.push_back(p.mean_norm);
  if (num_stages < 1 || num_stages > static_cast<int64_t>(norms.size())) {
    throw Error(ErrorCode::kInvalidK,
                "num_stages = " + std::to_string(num_stages) + " with " +
                    std::to_string(norms.size()) + " layers");
  }
  const KMeansResult km = KMeans1D(norms, static_cast<int>(num_stages), seed);
  std::vector<Stage> stages(static_cast<size_t>(num_stages));
  for (size_t i = 0; i < sorted.size(); ++i) {
    stages[static_cast<size_t>(km.assignment[i])].members.push_back(sorted[i].layer);
  }
  for (size_t j = 0; j < stages.size(); ++j) stages[j].centroid = km.centroids[j];
  return StagePartition(std::move(stages));
}

Json PartitionToJson(const StagePartition& partition) {
  Json json = Json::object();
  json["num_stages"] = partition.num_stages();
  Json stages = Json::array();
  for (const Stage& s : partition.stages()) {
    Json entry = Json::object();
    entry["members"] = s.members;
    entry["centroid"] = s.centroid;
    stages.push_back(std::move(entry));
  }
  json["stages"] = std::move(stages);
  return json;
}

StagePartition PartitionFromJson(const Json& json) {
  if (!json.is_object() || !json.contains("stages") || !json["stages"].is_array()) {
    throw Error(ErrorCode::kParse, "partition JSON needs a \"stages\" array");
  }
  std::vector<Stage> stages;
  for (const Json& entry : json["stages"]) {
    Stage s;
    s.members = entry.at("members").get<std::vector<int64_t>>();
    s.centroid = entry.value("centroid", static_cast<double>(stages.size() + 1));
    stages.push_back(std::move(s));
  }
  if (json.contains("num_stages") &&
      json["num_stages"].get<int64_t>() != static_cast<int64_t>(stages.size())) {
    throw Error(ErrorCode::kParse, "num_stages disagrees with stages array");
  }
  try {
    return StagePartition(std::move(stages));
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

}  // namespace hydra
