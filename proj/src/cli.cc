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

#include "hydra/cli.h"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hydra/allocator.h"
#include "hydra/error.h"
#include "hydra/export.h"
#include "hydra/oracle.h"
#include "hydra/partitioner.h"
#include "hydra/perfmodel.h"
#include "hydra/presets.h"
#include "hydra/profiler.h"
#include "hydra/schedule_io.h"
#include "hydra/search.h"
#include "spdlog/sinks/ostream_sink.h"
#include "spdlog/spdlog.h"

namespace hydra {

namespace {

struct Options {
  uint64_t seed = 42;
  std::string output;
  std::string log_level = "warn";

  std::string preset = "toy-8";
  int64_t r_standard = 0;  // 0: preset value

  // profile
  std::string grad_log;
  std::string grad_log_out;
  int64_t steps = 200;
  int64_t batch = 16;
  double learning_rate = 1e-4;

  // partition
  std::string profile;
  int64_t stages = 3;

  // allocate / search
  std::string stages_file;
  std::string coarse_preset;
  int64_t delta_d = 2;
  std::string fine = "none";
  std::string report;

  // train-perf
  std::string dataset;
  int64_t synthetic_pairs = 0;
  std::string dataset_out;
  std::string checkpoint;

  // search
  std::string oracle = "synthetic";
  std::string scalarizer = "equal";
  int64_t iters = 3;
  int64_t search_batch = 8;
  int64_t pool = 64;
  std::string search_log;
  bool resume = false;
  bool random = false;
  std::string schedule_out;

  // export / validate
  std::string schedule;
  std::string format = "rank-pattern";
};

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidationFailed:
      return kExitValidationFailure;
    case ErrorCode::kNonTermination:
    case ErrorCode::kNonFinite:
    case ErrorCode::kTrainingDiverged:
    case ErrorCode::kOracleFailure:
      return kExitInternalError;
    default:
      return kExitInputError;
  }
}

void ReportError(std::ostream& err, std::string_view code, const std::string& message) {
  err << Json{{"error", code}, {"message", message}}.dump() << '\n';
}

class Runner {
 public:
  Runner(const Options& o, std::ostream& out) : o_(o), out_(out) {}

  void Emit(const std::string& text) {
    if (o_.output.empty()) {
      out_ << text;
    } else {
      WriteTextFile(o_.output, text);
    }
  }

  ModelPreset Preset() const {
    ModelPreset p = FindModelPreset(o_.preset);
    if (o_.r_standard > 0) p.r_standard = o_.r_standard;
    return p;
  }

  AllocatorParams Params() const {
    return AllocatorParams{Preset().r_standard, o_.delta_d, 10'000};
  }

  StagePartition Partition() const {
    if (!o_.coarse_preset.empty()) return FindCoarsePreset(o_.coarse_preset).partition;
    if (o_.stages_file.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "need --stages-file or --coarse-preset");
    }
    return PartitionFromJson(ReadJsonFile(o_.stages_file));
  }

  void Profile() {
    std::vector<LayerGradProfile> profiles;
    if (!o_.grad_log.empty()) {
      std::ifstream in(o_.grad_log);
      if (!in) throw Error(ErrorCode::kIo, "cannot read " + o_.grad_log);
      const auto records = ReadGradLog(in);
      profiles = IngestGradLog(records);
    } else {
      const ModelPreset preset = Preset();
      ToyTrainerConfig config;
      config.model = ToyConfigFor(preset, o_.seed);
      config.default_rank = preset.r_standard;
      config.steps = o_.steps;
      config.batch = o_.batch;
      config.learning_rate = o_.learning_rate;
      ToyProfileResult result = ProfileToyModel(config);
      if (!o_.grad_log_out.empty()) {
        std::string text;
        for (const auto& r : result.grad_log) text += GradLogLine(r) + "\n";
        WriteTextFile(o_.grad_log_out, text);
      }
      spdlog::info("toy training: first loss {:.4f}, last loss {:.4f}",
                   result.losses.front(), result.losses.back());
      profiles = std::move(result.profiles);
    }
    Emit(DumpJson(ProfilesToJson(profiles)));
  }

  void PartitionCmd() {
    if (o_.profile.empty()) throw Error(ErrorCode::kInvalidArgument, "need --profile");
    const auto profiles = ProfilesFromJson(ReadJsonFile(o_.profile));
    Emit(DumpJson(PartitionToJson(PartitionStages(profiles, o_.stages, o_.seed))));
  }

  void Allocate() {
    const ModelPreset preset = Preset();
    const AllocatorParams params = Params();
    StagePartition partition;
    CoarseAllocation coarse;
    if (!o_.coarse_preset.empty()) {
      CoarsePreset cp = FindCoarsePreset(o_.coarse_preset);
      partition = cp.partition;
      coarse = cp.allocation;
    } else {
      partition = Partition();
      coarse = AllocateCoarse(partition, params, preset.shape.num_layers());
    }
    if (partition.num_layers() != preset.shape.num_layers()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "partition covers " + std::to_string(partition.num_layers()) +
                      " layers, preset " + preset.name + " has " +
                      std::to_string(preset.shape.num_layers()));
    }
    if (!o_.report.empty()) {
      WriteTextFile(o_.report, DumpJson(AllocationReportJson(
                                   coarse, partition, params, preset.shape.num_layers())));
    }
    const RankSchedule schedule =
        RefineFine(coarse, partition, FineSetting::Parse(o_.fine), params.delta_d);
    const ValidationReport report =
        Validate(schedule, preset.shape, Budget(preset.shape, preset.r_standard));
    if (!report.admissible()) {
      throw Error(ErrorCode::kValidationFailed,
                  "allocated schedule is inadmissible: " +
                      report.violations.front().message);
    }
    Emit(DumpJson(ScheduleToJson(schedule)));
  }

  void TrainPerf() {
    const ModelPreset preset = Preset();
    std::vector<PerfExample> data;
    if (!o_.dataset.empty()) {
      data = DatasetFromJson(ReadJsonFile(o_.dataset));
    } else if (o_.synthetic_pairs > 0) {
      const StagePartition partition = Partition();
      SyntheticOracle oracle(preset.shape, preset.r_standard, {.seed = o_.seed});
      for (auto& s : ProposeCandidates(partition, preset.shape, Params(),
                                       o_.synthetic_pairs, o_.seed)) {
        MetricVector m = oracle.Evaluate(s);
        data.push_back({std::move(s), m});
      }
    } else {
      throw Error(ErrorCode::kInvalidArgument, "need --dataset or --synthetic-pairs");
    }
    if (!o_.dataset_out.empty()) WriteTextFile(o_.dataset_out, DumpJson(DatasetToJson(data)));
    PerfTrainOptions opts;
    opts.seed = o_.seed;
    PerfTrainResult result = TrainPerfModel(data, preset.r_standard, opts);
    if (!o_.checkpoint.empty()) {
      tensor::SaveCheckpoint(result.model.ToCheckpoint(), o_.checkpoint);
    }
    if (!o_.report.empty()) WriteTextFile(o_.report, TrainReportCsv(result.report));
    const auto& r = result.report;
    Emit(DumpJson(Json{{"examples", data.size()},
                       {"train", r.train_indices.size()},
                       {"val", r.val_indices.size()},
                       {"epochs", r.epochs.size()},
                       {"best_epoch", r.best_epoch},
                       {"best_val_loss", r.best_val_loss},
                       {"mean_baseline_val_loss", r.mean_baseline_val_loss}}));
  }

  void Search() {
    const ModelPreset preset = Preset();
    const AllocatorParams params = Params();
    std::unique_ptr<Oracle> oracle;
    std::optional<StagePartition> partition;
    if (o_.oracle == "synthetic") {
      oracle = std::make_unique<SyntheticOracle>(preset.shape, preset.r_standard,
                                                 SyntheticOracleOptions{.seed = o_.seed});
    } else if (o_.oracle == "toy") {
      ToyTrainerConfig config;
      config.model = ToyConfigFor(preset, o_.seed);
      config.default_rank = preset.r_standard;
      config.steps = o_.steps;
      config.batch = o_.batch;
      config.learning_rate = o_.learning_rate;
      oracle = std::make_unique<ToyTrainerOracle>(config);
    } else if (o_.oracle == "replay") {
      if (o_.dataset.empty()) throw Error(ErrorCode::kInvalidArgument, "replay needs --dataset");
      const auto data = DatasetFromJson(ReadJsonFile(o_.dataset));
      oracle = std::make_unique<ReplayOracle>(data);
      if (o_.stages_file.empty() && o_.coarse_preset.empty()) {
        const std::vector<int64_t> all = {preset.shape.num_layers()};
        partition = StagePartition::Contiguous(all);
      }
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown oracle \"" + o_.oracle + "\"");
    }
    if (!partition) partition = Partition();

    SearchOptions opts;
    opts.max_iters = o_.iters;
    opts.batch = o_.search_batch;
    opts.pool_size = o_.pool;
    opts.seed = o_.seed;
    opts.weights = ParseScalarizer(o_.scalarizer);
    opts.guided = !o_.random;
    opts.resume = o_.resume;
    if (!o_.search_log.empty()) {
      opts.log_path = o_.search_log;
    } else if (const char* dir = std::getenv("HYDRA_CACHE_DIR"); dir != nullptr && *dir) {
      opts.log_path = std::filesystem::path(dir) / "search.jsonl";
    }
    SearchResult result = RunSearch(*oracle, *partition, preset.shape, params, opts);
    if (!o_.schedule_out.empty()) {
      WriteTextFile(o_.schedule_out, DumpJson(ScheduleToJson(result.best)));
    }
    Emit(DumpJson(SearchSummaryJson(result)));
  }

  void Export() {
    if (o_.schedule.empty()) throw Error(ErrorCode::kInvalidArgument, "need --schedule");
    const RankSchedule schedule = ScheduleFromJson(ReadJsonFile(o_.schedule));
    if (o_.format == "rank-pattern") {
      Emit(DumpJson(RankPatternJson(schedule)));
    } else if (o_.format == "schedule") {
      Emit(DumpJson(ScheduleToJson(schedule)));
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown format \"" + o_.format + "\"");
    }
  }

  int ValidateCmd() {
    if (o_.schedule.empty()) throw Error(ErrorCode::kInvalidArgument, "need --schedule");
    const ModelPreset preset = Preset();
    const RankSchedule schedule = ScheduleFromJson(ReadJsonFile(o_.schedule));
    const ValidationReport report =
        Validate(schedule, preset.shape, Budget(preset.shape, preset.r_standard));
    Json violations = Json::array();
    for (const auto& v : report.violations) violations.push_back(v.message);
    Emit(DumpJson(Json{{"admissible", report.admissible()},
                       {"param_count", report.param_count},
                       {"param_cap", report.param_cap},
                       {"violations", violations}}));
    return report.admissible() ? kExitOk : kExitValidationFailure;
  }

 private:
  const Options& o_;
  std::ostream& out_;
};

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Hierarchical and dynamic LoRA rank scheduling", "hydra"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; command-line flags win");
  app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app.add_option("--output,-o", o.output, "Write the result here instead of stdout");
  app.add_option("--log-level", o.log_level, "trace|debug|info|warn|error|off")
      ->capture_default_str();

  auto add_preset = [&](CLI::App* sub) {
    sub->add_option("--preset", o.preset, "Model preset")->capture_default_str();
    sub->add_option("--r-standard", o.r_standard, "Override the preset's standard rank");
  };
  auto add_toy = [&](CLI::App* sub) {
    sub->add_option("--steps", o.steps, "Toy training steps")->capture_default_str();
    sub->add_option("--batch", o.batch, "Toy training batch size")->capture_default_str();
    sub->add_option("--lr", o.learning_rate, "Toy peak learning rate")->capture_default_str();
  };
  auto add_partition = [&](CLI::App* sub) {
    sub->add_option("--stages-file", o.stages_file, "Stage partition JSON");
    sub->add_option("--coarse-preset", o.coarse_preset, "Shipped coarse allocation");
    sub->add_option("--delta-d", o.delta_d, "Rank step between stages")->capture_default_str();
  };

  auto* profile = app.add_subcommand("profile", "Average gradient norms per layer");
  add_preset(profile);
  add_toy(profile);
  profile->add_option("--grad-log", o.grad_log, "Ingest this JSONL gradient log instead of training");
  profile->add_option("--grad-log-out", o.grad_log_out, "Also write the raw toy gradient log");

  auto* partition = app.add_subcommand("partition", "Group layers into stages by k-means");
  partition->add_option("--profile", o.profile, "Profile JSON")->required();
  partition->add_option("--stages", o.stages, "Number of stages")->capture_default_str();

  auto* allocate = app.add_subcommand("allocate", "Coarse allocation plus fine setting");
  add_preset(allocate);
  add_partition(allocate);
  allocate->add_option("--fine", o.fine, "none|setting1..setting5|custom:...")->capture_default_str();
  allocate->add_option("--report", o.report, "Write the allocation trace JSON here");

  auto* train = app.add_subcommand("train-perf", "Train the performance model");
  add_preset(train);
  add_partition(train);
  train->add_option("--dataset", o.dataset, "Dataset JSON");
  train->add_option("--synthetic-pairs", o.synthetic_pairs, "Build a synthetic-oracle dataset of this size");
  train->add_option("--dataset-out", o.dataset_out, "Write the dataset used");
  train->add_option("--checkpoint", o.checkpoint, "Write the model checkpoint");
  train->add_option("--report", o.report, "Write the loss curve CSV");

  auto* search = app.add_subcommand("search", "Performance-model guided schedule search");
  add_preset(search);
  add_partition(search);
  add_toy(search);
  search->add_option("--oracle", o.oracle, "synthetic|toy|replay")->capture_default_str();
  search->add_option("--dataset", o.dataset, "Replay table (dataset JSON)");
  search->add_option("--scalarizer", o.scalarizer, "equal, a metric name, or 6 weights")
      ->capture_default_str();
  search->add_option("--iters", o.iters, "Iterations")->capture_default_str();
  search->add_option("--eval-batch", o.search_batch, "Oracle evaluations per iteration")
      ->capture_default_str();
  search->add_option("--pool", o.pool, "Proposals per iteration")->capture_default_str();
  search->add_option("--log", o.search_log, "JSONL evaluation log (default $HYDRA_CACHE_DIR/search.jsonl)");
  search->add_flag("--resume", o.resume, "Reuse scores from an existing log");
  search->add_flag("--random", o.random, "Random baseline: skip the performance model");
  search->add_option("--schedule-out", o.schedule_out, "Write the best schedule JSON");

  auto* exp = app.add_subcommand("export", "Convert a schedule for adapter libraries");
  exp->add_option("--schedule", o.schedule, "Schedule JSON")->required();
  exp->add_option("--format", o.format, "rank-pattern|schedule")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Check a schedule against a budget");
  add_preset(validate);
  validate->add_option("--schedule", o.schedule, "Schedule JSON")->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    ReportError(err, "usage", e.what());
    return kExitInputError;
  }

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto logger = std::make_shared<spdlog::logger>("hydra", sink);
  logger->set_pattern("[%l] %v");
  const auto level = spdlog::level::from_str(o.log_level);
  logger->set_level(level);
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> logger;
    ~Restore() { spdlog::set_default_logger(logger); }
  } restore{previous};

  Runner runner(o, out);
  try {
    if (profile->parsed()) runner.Profile();
    if (partition->parsed()) runner.PartitionCmd();
    if (allocate->parsed()) runner.Allocate();
    if (train->parsed()) runner.TrainPerf();
    if (search->parsed()) runner.Search();
    if (exp->parsed()) runner.Export();
    if (validate->parsed()) return runner.ValidateCmd();
  } catch (const Error& e) {
    ReportError(err, ErrorCodeName(e.code()), e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    ReportError(err, "internal", e.what());
    return kExitInternalError;
  }
  return kExitOk;
}

}  // namespace hydra
