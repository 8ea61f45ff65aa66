// Copyright 2026 The Restoragent Authors.
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

#include <fstream>
#include <thread>

#include "restoragent/bank.h"
#include "restoragent/error.h"
#include "restoragent/rng.h"
#include "test_util.h"

namespace restoragent::bank {
namespace {

Insight MakeInsight(RestorationTask task, const std::string& tool, int verdict) {
  Insight in;
  in.degradation_info = "dense haze, low contrast";
  in.tool_id = tool;
  in.subjective_eval = "haze visibly reduced.";
  in.verdict = verdict;
  in.task = task;
  in.timestamp = 1700000000;
  in.objective_delta = 0.1234567890123;
  return in;
}

TEST(InsightBankTest, FirstAppendGetsIdOne) {
  InsightBank bank;
  EXPECT_EQ(bank.Append(MakeInsight(RestorationTask::kDehaze, "dcp", 1)), 1u);
  EXPECT_EQ(bank.size(), 1u);
}

TEST(InsightBankTest, IdsAreSequential) {
  InsightBank bank;
  for (std::uint64_t i = 1; i <= 5; ++i) {
    EXPECT_EQ(bank.Append(MakeInsight(RestorationTask::kDehaze, "dcp", 1)), i);
  }
  const auto all = bank.Snapshot();
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].insight_id, i + 1);
}

TEST(InsightBankTest, ReloadIsFieldIdentical) {
  testing::TempDir dir;
  std::vector<Insight> written;
  {
    InsightBank bank(dir / "bank.jsonl");
    Insight a = MakeInsight(RestorationTask::kDehaze, "dcp_dehaze", 1);
    a.subjective_eval = "unicode \xc3\xa9 and \"quotes\"\nnew line";
    a.objective_delta = -1.0 / 3.0;
    bank.Append(a);
    bank.Append(MakeInsight(RestorationTask::kDenoise, "bilateral_denoise", 0));
    written = bank.Snapshot();
  }
  InsightBank reloaded(dir / "bank.jsonl");
  EXPECT_EQ(reloaded.Snapshot(), written);
  // Appends continue the id sequence after a reload.
  EXPECT_EQ(reloaded.Append(MakeInsight(RestorationTask::kDeblur, "u", 1)), 3u);
  EXPECT_EQ(ReadBankFile(dir / "bank.jsonl").size(), 3u);
}

TEST(InsightBankTest, CorruptFileIsStorageError) {
  testing::TempDir dir;
  {
    std::ofstream f(dir / "bad.jsonl");
    f << "{\"not\": \"an insight\"}\n";
  }
  try {
    InsightBank bank(dir / "bad.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStorage);
  }
}

TEST(InsightBankTest, RejectsNonBinaryVerdict) {
  InsightBank bank;
  EXPECT_THROW(bank.Append(MakeInsight(RestorationTask::kDehaze, "dcp", 2)), Error);
}

TEST(InsightBankTest, ConcurrentAppendsSerialize) {
  InsightBank bank;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i) {
        bank.Append(MakeInsight(RestorationTask::kDehaze, "dcp", 1));
      }
    });
  }
  for (auto& th : threads) th.join();
  const auto all = bank.Snapshot();
  ASSERT_EQ(all.size(), 200u);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].insight_id, i + 1);
}

TEST(FilterByTaskTest, Cases) {
  InsightBank bank;
  EXPECT_TRUE(bank.FilterByTask(RestorationTask::kDehaze).empty());
  for (auto t : {RestorationTask::kDehaze, RestorationTask::kDenoise,
                 RestorationTask::kDehaze, RestorationTask::kDenoise,
                 RestorationTask::kDehaze}) {
    bank.Append(MakeInsight(t, "tool", 1));
  }
  const auto hazy = bank.FilterByTask(RestorationTask::kDehaze);
  ASSERT_EQ(hazy.size(), 3u);
  EXPECT_EQ(hazy[0].insight_id, 1u);
  EXPECT_EQ(hazy[1].insight_id, 3u);
  EXPECT_EQ(hazy[2].insight_id, 5u);
  EXPECT_TRUE(bank.FilterByTask(RestorationTask::kDesnow).empty());
}

TEST(ChunkTest, ShortInsightIsOneChunk) {
  Insight in = MakeInsight(RestorationTask::kDehaze, "dcp", 1);
  const std::string canonical = CanonicalText(in);
  ASSERT_LT(canonical.size(), 512u);
  const auto chunks = ChunkInsight(in, {512, 64});
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].text, canonical);
  EXPECT_EQ(canonical,
            "DEGRADATION: dense haze, low contrast\nTOOL: dcp\n"
            "EVAL: haze visibly reduced.\nVERDICT: 1");
}

TEST(ChunkTest, HundredTenCharSentences) {
  std::string text;
  for (int i = 0; i < 100; ++i) text += "abcdefghi.";
  ASSERT_EQ(text.size(), 1000u);
  // Boundaries sit at multiples of 10; the last one within 512 ends at 510.
  const auto pieces = SplitText(text, {512, 0});
  ASSERT_EQ(pieces.size(), 2u);
  EXPECT_EQ(pieces[0].size(), 510u);
  EXPECT_EQ(pieces[1].size(), 490u);
}

TEST(ChunkTest, EmptyEvaluationStillWellFormed) {
  Insight in = MakeInsight(RestorationTask::kDehaze, "dcp", 0);
  in.subjective_eval.clear();
  const auto chunks = ChunkInsight(in);
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_NE(chunks[0].text.find("EVAL: \n"), std::string::npos);
}

TEST(ChunkTest, InvalidParams) {
  EXPECT_THROW(SplitText("x", {63, 0}), Error);
  EXPECT_THROW(SplitText("x", {128, 128}), Error);
  EXPECT_THROW(SplitText("x", {128, -1}), Error);
}

// Property: every chunk fits, chunking is deterministic, and stripping the
// overlap prefix from every chunk after the first reconstructs the text.
TEST(ChunkTest, PropertiesOnRandomTexts) {
  Rng rng(42);
  const std::string alphabet = "abc de.f!g?h\n";
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const auto len = rng.Below(3000);
    for (std::uint64_t i = 0; i < len; ++i) text += alphabet[rng.Below(alphabet.size())];
    const int max = 64 + static_cast<int>(rng.Below(500));
    const int overlap = static_cast<int>(rng.Below(max));
    const ChunkParams params{max, overlap};
    const auto pieces = SplitText(text, params);
    ASSERT_FALSE(pieces.empty());
    EXPECT_EQ(pieces, SplitText(text, params));
    std::string rebuilt = pieces[0];
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      ASSERT_LE(pieces[i].size(), static_cast<std::size_t>(max));
      if (i > 0) {
        ASSERT_EQ(pieces[i].substr(0, overlap),
                  pieces[i - 1].substr(pieces[i - 1].size() - overlap));
        rebuilt += pieces[i].substr(overlap);
      }
    }
    ASSERT_EQ(rebuilt, text) << "trial " << trial;
  }
}

TEST(ChunkTest, ChunkIdsCarrySource) {
  Insight in = MakeInsight(RestorationTask::kDehaze, "dcp", 1);
  in.insight_id = 17;
  in.subjective_eval = std::string(2000, 'x');
  const auto chunks = ChunkInsight(in, {128, 16});
  ASSERT_GT(chunks.size(), 1u);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    EXPECT_EQ(chunks[i].id.insight_id, 17u);
    EXPECT_EQ(chunks[i].id.ordinal, static_cast<int>(i));
    EXPECT_EQ(chunks[i].source, 17u);
  }
}

}  // namespace
}  // namespace restoragent::bank
