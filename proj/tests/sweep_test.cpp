// Copyright 2026 The mcdrop Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "mcdrop/jsonl.hpp"
#include "mcdrop/sweep.hpp"

namespace mcdrop {
namespace {

namespace fs = std::filesystem;

SweepManifest tiny_sweep() {
  SweepManifest m;
  m.sweep_id = "tiny";
  m.models = parse_model_specs("enc:encoder:1:2:8:12,dec:decoder:1:2:8:12");
  m.passes = 3;
  m.corpus.per_domain = 20;
  m.training.epochs = 1;
  m.training.learning_rate = 1e-3;
  m.reset_cells();
  return m;
}

TEST(ModelSpec, ParsesAndFormatsRoundTrip) {
  const auto s = parse_model_spec("m1:decoder:4:2:32:64");
  EXPECT_EQ(s.name, "m1");
  EXPECT_EQ(s.config.family, Family::kDecoder);
  EXPECT_EQ(s.config.layers, 4u);
  EXPECT_EQ(s.config.heads, 2u);
  EXPECT_EQ(s.config.d_model, 32u);
  EXPECT_EQ(s.config.d_ffn, 64u);
  EXPECT_EQ(s.config.pooling, Pooling::kLastToken);
  EXPECT_EQ(parse_model_spec(format_model_spec(s)), s);
  EXPECT_EQ(parse_model_spec("m2:encoder:2:2:16:32:mean").config.pooling, Pooling::kMean);
  EXPECT_THROW(parse_model_spec("m:encoder:2:2:16"), std::invalid_argument);
  EXPECT_THROW(parse_model_spec("a/b:encoder:2:2:16:32"), std::invalid_argument);
  EXPECT_THROW(parse_model_spec("m:encoder:x:2:16:32"), std::invalid_argument);
  EXPECT_THROW(parse_dropout_list("baseline,nonsense"), std::invalid_argument);
}

TEST(Manifest, SerializationRoundTrip) {
  auto m = tiny_sweep();
  m.cells[3].status = CellStatus::kFailed;
  m.cells[3].error = "out of memory";
  m.cells[1].status = CellStatus::kEvaluated;
  m.cells[1].checkpoint_digest = "abc";
  const auto back = parse_manifest(serialize_manifest(m));
  EXPECT_EQ(back.sweep_id, m.sweep_id);
  EXPECT_EQ(back.models, m.models);
  EXPECT_EQ(back.dropout_configs, m.dropout_configs);
  EXPECT_EQ(back.cells, m.cells);
  EXPECT_EQ(back.seeds, m.seeds);
  EXPECT_EQ(back.corpus, m.corpus);
  EXPECT_EQ(back.passes, 3u);
  EXPECT_EQ(back.training.learning_rate, m.training.learning_rate);
  EXPECT_EQ(serialize_manifest(back), serialize_manifest(m));
}

TEST(Manifest, DamageIsReportedWithLocation) {
  const auto text = serialize_manifest(tiny_sweep());
  EXPECT_THROW(parse_manifest(""), ParseError);
  EXPECT_THROW(parse_manifest(text + "{not json\n"), ParseError);
  auto m = tiny_sweep();
  m.cells.pop_back();
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(Manifest, CellSeedsAreDistinctAndStable) {
  const auto m = full_grid_manifest();
  std::set<std::uint64_t> seeds;
  for (const auto& c : m.cells) seeds.insert(c.mc_seed);
  EXPECT_EQ(seeds.size(), m.cells.size());
  EXPECT_EQ(cell_seed(0, "a", "b"), cell_seed(0, "a", "b"));
  EXPECT_NE(cell_seed(0, "ab", ""), cell_seed(0, "a", "b"));
  EXPECT_NE(cell_seed(1, "a", "b"), cell_seed(0, "a", "b"));
}

TEST(Manifest, FullGridIsNineteenModelsByFiveConfigs) {
  const auto m = full_grid_manifest();
  EXPECT_EQ(m.models.size(), 19u);
  EXPECT_EQ(m.cell_count(), 95u);
  std::size_t decoders = 0;
  for (const auto& s : m.models) decoders += s.config.family == Family::kDecoder;
  EXPECT_EQ(decoders, 5u);
  EXPECT_NO_THROW(m.validate());
  const auto desk = desk_scale_manifest();
  EXPECT_EQ(desk.cell_count(), 10u);
  for (const auto& s : desk.models) EXPECT_EQ(s.config.layers, 4u);
}

TEST(Sweep, TwoModelsFiveConfigsTrainsTwiceAndEvaluatesTenCells) {
  testing::TempDir dir("sweep");
  SweepOptions opts;
  opts.generated_at = "fixed";
  const auto r = run_sweep(tiny_sweep(), dir.path(), opts);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.training_runs, 2u);
  EXPECT_EQ(r.cells_evaluated, 10u);
  EXPECT_EQ(r.cells_failed, 0u);
  for (const auto& c : r.manifest.cells) {
    EXPECT_EQ(c.status, CellStatus::kEvaluated) << c.model << "/" << c.config;
    EXPECT_TRUE(fs::exists(r.directory / c.matrix));
  }
  // Every config of one model evaluates the same trained checkpoint.
  EXPECT_EQ(r.manifest.cells[0].checkpoint_digest, r.manifest.cells[4].checkpoint_digest);
  EXPECT_NE(r.manifest.cells[0].checkpoint_digest, r.manifest.cells[5].checkpoint_digest);
  EXPECT_EQ(r.bundle.summaries.size(), 10u);
  EXPECT_EQ(r.bundle.comparisons.size(), 8u);
  EXPECT_TRUE(report::audit_bundle(r.directory).ok);
  const auto matrix = load_prediction_matrix(r.directory / r.manifest.cells[2].matrix).matrix;
  EXPECT_EQ(matrix.passes, 3u);
  EXPECT_EQ(matrix.base_seed, r.manifest.cells[2].mc_seed);
}

TEST(Sweep, InterruptedSweepResumesWithoutRedoingCells) {
  testing::TempDir dir("resume");
  SweepOptions opts;
  opts.generated_at = "fixed";
  opts.max_cells = 3;
  const auto first = run_sweep(tiny_sweep(), dir.path(), opts);
  EXPECT_FALSE(first.complete);
  EXPECT_EQ(first.cells_evaluated, 3u);
  const auto dir_path = first.directory;
  const auto kept = read_file(dir_path / first.manifest.cells[0].matrix);

  opts.max_cells = 0;
  const auto second = resume_sweep(dir_path, opts);
  EXPECT_TRUE(second.complete);
  EXPECT_EQ(second.cells_skipped, 3u);
  EXPECT_EQ(second.cells_evaluated, 7u);
  // The first model's checkpoint is reused, only the second is trained.
  EXPECT_EQ(second.training_runs, 1u);
  EXPECT_EQ(read_file(dir_path / first.manifest.cells[0].matrix), kept);

  // A single uninterrupted run produces identical matrices.
  testing::TempDir fresh("fresh");
  const auto whole = run_sweep(tiny_sweep(), fresh.path(), opts);
  for (const auto& c : whole.manifest.cells) {
    EXPECT_EQ(read_file(whole.directory / c.matrix), read_file(dir_path / c.matrix)) << c.matrix;
  }
  const auto again = run_sweep(tiny_sweep(), fresh.path(), opts);
  EXPECT_EQ(again.cells_skipped, 10u);
  EXPECT_EQ(again.cells_evaluated, 0u);
  EXPECT_EQ(again.training_runs, 0u);
}

TEST(Sweep, DifferentPlanUnderSameIdIsRefused) {
  testing::TempDir dir("plan");
  auto m = tiny_sweep();
  m.dropout_configs = {presets::deterministic()};
  m.models.pop_back();
  m.reset_cells();
  run_sweep(m, dir.path());
  m.passes = 4;
  m.reset_cells();
  EXPECT_THROW(run_sweep(m, dir.path()), std::invalid_argument);
}

TEST(Sweep, UnreadableCorpusFailsBeforeTraining) {
  testing::TempDir dir("corpus");
  auto m = tiny_sweep();
  m.corpus.ingest_path = (dir.path() / "missing.jsonl").string();
  EXPECT_THROW(run_sweep(m, dir.path()), std::runtime_error);
  EXPECT_FALSE(fs::exists(dir.path() / m.sweep_id / "manifest.jsonl"));
}

}  // namespace
}  // namespace mcdrop
