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

#include "restoragent/bank.h"

#include <algorithm>

#include "restoragent/error.h"
#include "restoragent/json_codec.h"

namespace restoragent::bank {
namespace {

bool IsBoundary(char c) { return c == '.' || c == '!' || c == '?' || c == '\n'; }

bool IsUtf8Continuation(char c) {
  return (static_cast<unsigned char>(c) & 0xC0) == 0x80;
}

}  // namespace

std::string CanonicalText(const Insight& insight) {
  return "DEGRADATION: " + insight.degradation_info + "\nTOOL: " +
         insight.tool_id + "\nEVAL: " + insight.subjective_eval +
         "\nVERDICT: " + std::to_string(insight.verdict);
}

std::vector<std::string> SplitText(const std::string& text, const ChunkParams& p) {
  if (p.max_chunk_chars < 64 || p.overlap_chars < 0 ||
      p.overlap_chars >= p.max_chunk_chars) {
    throw Error(ErrorCode::kInvalidParam,
                "chunking needs max >= 64 and 0 <= overlap < max");
  }
  const std::size_t max = p.max_chunk_chars;
  const std::size_t overlap = p.overlap_chars;
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (true) {
    if (text.size() - start <= max) {
      pieces.push_back(text.substr(start));
      break;
    }
    // A piece must be longer than the overlap or the next start would not
    // advance.
    std::size_t cut = 0;
    for (std::size_t end = start + max; end > start + overlap; --end) {
      if (IsBoundary(text[end - 1])) {
        cut = end;
        break;
      }
    }
    if (cut == 0) {
      cut = start + max;
      while (cut > start + overlap + 1 && IsUtf8Continuation(text[cut])) --cut;
    }
    pieces.push_back(text.substr(start, cut - start));
    start = cut - overlap;
  }
  return pieces;
}

std::vector<Chunk> ChunkInsight(const Insight& insight, const ChunkParams& p) {
  std::vector<Chunk> chunks;
  int ordinal = 0;
  for (std::string& piece : SplitText(CanonicalText(insight), p)) {
    chunks.push_back(
        {{insight.insight_id, ordinal++}, std::move(piece), insight.insight_id});
  }
  return chunks;
}

void ValidateInsight(const Insight& insight) {
  if (insight.verdict != 0 && insight.verdict != 1) {
    throw Error(ErrorCode::kInvalidParam, "verdict must be 0 or 1");
  }
  if (insight.tool_id.empty()) {
    throw Error(ErrorCode::kInvalidParam, "insight needs a tool_id");
  }
}

std::vector<Insight> ReadBankFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kStorage, "cannot read " + path.string());
  std::vector<Insight> insights;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Insight insight;
    try {
      insight = nlohmann::json::parse(line).get<Insight>();
      ValidateInsight(insight);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kStorage, path.string() + ":" +
                                           std::to_string(line_no) + ": " + e.what());
    }
    if (!insights.empty() && insight.insight_id <= insights.back().insight_id) {
      throw Error(ErrorCode::kStorage, path.string() + ":" +
                                           std::to_string(line_no) +
                                           ": insight ids must strictly increase");
    }
    insights.push_back(std::move(insight));
  }
  return insights;
}

InsightBank::InsightBank(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (std::filesystem::exists(*path_, ec)) insights_ = ReadBankFile(*path_);
  out_.open(*path_, std::ios::app);
  if (!out_) throw Error(ErrorCode::kStorage, "cannot open " + path_->string());
}

std::uint64_t InsightBank::Append(Insight insight) {
  ValidateInsight(insight);
  std::lock_guard lock(mu_);
  insight.insight_id = insights_.empty() ? 1 : insights_.back().insight_id + 1;
  if (path_) {
    out_ << nlohmann::json(insight).dump() << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::kStorage, "append failed: " + path_->string());
  }
  insights_.push_back(std::move(insight));
  return insights_.back().insight_id;
}

std::size_t InsightBank::size() const {
  std::lock_guard lock(mu_);
  return insights_.size();
}

std::vector<Insight> InsightBank::Snapshot() const {
  std::lock_guard lock(mu_);
  return insights_;
}

std::optional<Insight> InsightBank::Find(std::uint64_t id) const {
  std::lock_guard lock(mu_);
  auto it = std::lower_bound(
      insights_.begin(), insights_.end(), id,
      [](const Insight& in, std::uint64_t v) { return in.insight_id < v; });
  if (it == insights_.end() || it->insight_id != id) return std::nullopt;
  return *it;
}

std::vector<Insight> InsightBank::FilterByTask(RestorationTask task) const {
  std::lock_guard lock(mu_);
  std::vector<Insight> out;
  std::copy_if(insights_.begin(), insights_.end(), std::back_inserter(out),
               [task](const Insight& in) { return in.task == task; });
  return out;
}

}  // namespace restoragent::bank
