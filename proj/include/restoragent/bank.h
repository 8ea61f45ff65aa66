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

#ifndef RESTORAGENT_BANK_H_
#define RESTORAGENT_BANK_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "restoragent/types.h"

namespace restoragent::bank {

// One interaction insight: the (degradation info, tool, subjective
// evaluation) triplet plus the outcome we record alongside it.
struct Insight {
  std::uint64_t insight_id = 0;
  std::string degradation_info;
  std::string tool_id;
  std::string subjective_eval;
  int verdict = 0;
  RestorationTask task = RestorationTask::kDenoise;
  std::int64_t timestamp = 0;
  double objective_delta = 0.0;

  friend bool operator==(const Insight&, const Insight&) = default;
};

struct ChunkId {
  std::uint64_t insight_id = 0;
  int ordinal = 0;
  friend auto operator<=>(const ChunkId&, const ChunkId&) = default;
};

struct Chunk {
  ChunkId id;
  std::string text;
  std::uint64_t source = 0;
};

struct ChunkParams {
  int max_chunk_chars = 512;
  int overlap_chars = 64;
};

// "DEGRADATION: ...\nTOOL: ...\nEVAL: ...\nVERDICT: ..."
std::string CanonicalText(const Insight& insight);

// Splits at the last '.', '!', '?' or '\n' that keeps a piece within
// max_chunk_chars (hard cut when there is none). Each piece after the first
// starts with the last overlap_chars bytes of its predecessor. Throws
// kInvalidParam unless max >= 64 and 0 <= overlap < max.
std::vector<std::string> SplitText(const std::string& text, const ChunkParams& p);

std::vector<Chunk> ChunkInsight(const Insight& insight, const ChunkParams& p = {});

// Append-only JSONL store. Appends are serialized by an internal mutex and
// flushed before returning; readers get copies, so they always see a
// consistent snapshot. A bank constructed without a path lives in memory.
class InsightBank {
 public:
  InsightBank() = default;
  // Loads the file if it exists (kStorage on corrupt content).
  explicit InsightBank(std::filesystem::path path);

  InsightBank(const InsightBank&) = delete;
  InsightBank& operator=(const InsightBank&) = delete;

  // Assigns id = previous max + 1, ignoring insight.insight_id.
  std::uint64_t Append(Insight insight);

  std::size_t size() const;
  std::vector<Insight> Snapshot() const;
  std::optional<Insight> Find(std::uint64_t id) const;
  std::vector<Insight> FilterByTask(RestorationTask task) const;

  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  mutable std::mutex mu_;
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
  std::vector<Insight> insights_;  // ascending id
};

// Reads a JSONL bank file without opening it for appends.
std::vector<Insight> ReadBankFile(const std::filesystem::path& path);

// Validates verdict and required text fields; throws kInvalidParam.
void ValidateInsight(const Insight& insight);

}  // namespace restoragent::bank

#endif  // RESTORAGENT_BANK_H_
