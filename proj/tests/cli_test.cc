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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "hydra/export.h"
#include "hydra/partitioner.h"
#include "hydra/presets.h"
#include "hydra/schedule_io.h"

namespace hydra {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Hydra(std::vector<std::string> args) {
  args.insert(args.begin(), "hydra");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hydra_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, AllocateFromStagesFile) {
  WriteTextFile(Path("stages.json"),
                DumpJson(PartitionToJson(StagePartition::Contiguous(std::vector<int64_t>{2, 2, 2}))));
  const CliRun r = Hydra({"allocate", "--preset", "toy-6", "--stages-file", Path("stages.json"),
                        "--report", Path("report.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const RankSchedule s = ScheduleFromJson(Json::parse(r.out));
  EXPECT_EQ(s.layers[0][ComponentKind::kQ], 14);
  EXPECT_EQ(s.layers[2][ComponentKind::kQ], 16);
  EXPECT_EQ(s.layers[5][ComponentKind::kQ], 18);
  const Json report = ReadJsonFile(Path("report.json"));
  EXPECT_EQ(report["stage_ranks"], Json::parse("[14,16,18]"));
}

TEST_F(CliTest, AllocateCoarsePresetWithFineSetting) {
  const CliRun r = Hydra({"allocate", "--preset", "mobilellama-1.4b", "--coarse-preset",
                        "paper-config4", "--fine", "setting1", "-o", Path("s.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  const RankSchedule s = ScheduleFromJson(ReadJsonFile(Path("s.json")));
  EXPECT_EQ(s.layers[9].values(), (std::array<int64_t, 7>{124, 124, 126, 126, 128, 126, 126}));
}

TEST_F(CliTest, ValidateExitCodes) {
  WriteTextFile(Path("ok.json"), DumpJson(ScheduleToJson(RankSchedule::Uniform(24, 128))));
  CliRun r = Hydra({"validate", "--preset", "mobilellama-1.4b", "--schedule", Path("ok.json")});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  Json j = Json::parse(r.out);
  EXPECT_TRUE(j["admissible"].get<bool>());
  EXPECT_EQ(j["param_count"], j["param_cap"]);

  WriteTextFile(Path("big.json"), DumpJson(ScheduleToJson(RankSchedule::Uniform(24, 129))));
  r = Hydra({"validate", "--preset", "mobilellama-1.4b", "--schedule", Path("big.json")});
  EXPECT_EQ(r.code, kExitValidationFailure);
  j = Json::parse(r.out);
  EXPECT_FALSE(j["admissible"].get<bool>());
  EXPECT_FALSE(j["violations"].empty());
}

TEST_F(CliTest, InputErrors) {
  CliRun r = Hydra({"allocate", "--preset", "gpt-9", "--coarse-preset", "paper-config4"});
  EXPECT_EQ(r.code, kExitInputError);
  EXPECT_TRUE(Json::parse(r.err).contains("error"));
  r = Hydra({"export", "--schedule", Path("missing.json")});
  EXPECT_EQ(r.code, kExitInputError);
  EXPECT_TRUE(Json::parse(r.err).contains("message"));
  WriteTextFile(Path("bad.json"), "{not json");
  r = Hydra({"export", "--schedule", Path("bad.json")});
  EXPECT_EQ(r.code, kExitInputError);
  r = Hydra({"frobnicate"});
  EXPECT_EQ(r.code, kExitInputError);
  EXPECT_EQ(Json::parse(r.err)["error"], "usage");
  r = Hydra({});
  EXPECT_EQ(r.code, kExitInputError);
}

TEST_F(CliTest, ExportMatchesLibrary) {
  const RankSchedule s = AblationConfigSchedule(4);
  WriteTextFile(Path("s.json"), DumpJson(ScheduleToJson(s)));
  const CliRun r = Hydra({"export", "--schedule", Path("s.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, DumpJson(RankPatternJson(s)));
  const CliRun again = Hydra({"export", "--schedule", Path("s.json"), "--format", "schedule"});
  EXPECT_EQ(ScheduleFromJson(Json::parse(again.out)), s);
}

TEST_F(CliTest, ExportGoldenConfig4Setting1) {
  CliRun r = Hydra({"allocate", "--preset", "mobilellama-1.4b", "--coarse-preset",
                    "paper-config4", "--fine", "setting1", "-o", Path("s.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = Hydra({"export", "--schedule", Path("s.json"), "--format", "rank-pattern"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, ReadTextFile(std::string(HYDRA_TEST_DATA_DIR) +
                                "/config4_setting1_rank_pattern.json"));
}

TEST_F(CliTest, Help) {
  const CliRun r = Hydra({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  for (const char* sub : {"profile", "partition", "allocate", "train-perf", "search", "export",
                          "validate"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST_F(CliTest, TomlConfigAndFlagPrecedence) {
  WriteTextFile(Path("c.toml"),
                "[allocate]\npreset = \"mobilellama-1.4b\"\ncoarse-preset = \"paper-config4\"\n"
                "fine = \"setting1\"\n");
  CliRun r = Hydra({"--config", Path("c.toml"), "allocate"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(ScheduleFromJson(Json::parse(r.out)).provenance.setting, "setting1");
  r = Hydra({"--config", Path("c.toml"), "allocate", "--fine", "none"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(ScheduleFromJson(Json::parse(r.out)).IsCoarse());
}

TEST_F(CliTest, SearchWritesLogUnderCacheDir) {
  ::setenv("HYDRA_CACHE_DIR", dir_.c_str(), 1);
  const CliRun r = Hydra({"search", "--oracle", "replay", "--preset", "mobilellama-1.4b",
                        "--dataset", std::string(HYDRA_TEST_DATA_DIR) + "/stage_configs_replay.json",
                        "--scalarizer", "mmb", "--schedule-out", Path("best.json")});
  ::unsetenv("HYDRA_CACHE_DIR");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "search.jsonl"));
  const Json summary = Json::parse(r.out);
  EXPECT_EQ(summary["best_metrics"][1], 47.77);
  EXPECT_EQ(ScheduleFromJson(ReadJsonFile(Path("best.json"))).layers,
            AblationConfigSchedule(4).layers);
}

TEST_F(CliTest, ProfilePartitionFromGradLog) {
  CliRun r = Hydra({"profile", "--grad-log", std::string(HYDRA_TEST_DATA_DIR) +
                                               "/component_norms_grad_log.jsonl", "-o", Path("p.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = Hydra({"partition", "--profile", Path("p.json"), "--stages", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(PartitionFromJson(Json::parse(r.out)).sizes(), (std::vector<int64_t>{8, 4, 12}));
}

}  // namespace
}  // namespace hydra
