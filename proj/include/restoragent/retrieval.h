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

#ifndef RESTORAGENT_RETRIEVAL_H_
#define RESTORAGENT_RETRIEVAL_H_

#include <chrono>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "restoragent/bank.h"
#include "restoragent/http.h"
#include "restoragent/types.h"

namespace restoragent::retrieval {

using Embedding = std::vector<double>;
using bank::ChunkId;

inline constexpr int kHashEmbedDim = 256;
inline constexpr int kDefaultTopK = 5;

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual Embedding Embed(std::string_view text) const = 0;
  virtual int dim() const = 0;
};

// Signed feature hashing of lowercased character trigrams. Each word (a run
// of letters/digits) is wrapped as "<word>" before trigrams are taken, so
// word order does not matter. The result is L2-normalized; text without
// words maps to the zero vector.
Embedding HashEmbed(std::string_view text);

class HashEmbedder final : public EmbeddingBackend {
 public:
  Embedding Embed(std::string_view text) const override { return HashEmbed(text); }
  int dim() const override { return kHashEmbedDim; }
};

// POST {"text": ...} -> {"vector": [...]}.
class HttpEmbedder final : public EmbeddingBackend {
 public:
  HttpEmbedder(const std::string& url, int dim, std::chrono::milliseconds timeout);
  Embedding Embed(std::string_view text) const override;
  int dim() const override { return dim_; }

 private:
  http::Endpoint endpoint_;
  int dim_;
  std::chrono::milliseconds timeout_;
};

// Cosine similarity; 0 when either vector has zero norm.
double Cosine(std::span<const double> a, std::span<const double> b);

struct Hit {
  ChunkId id;
  double similarity = 0.0;
};

// Exact brute-force cosine index.
class VectorIndex {
 public:
  explicit VectorIndex(int dim);

  // Throws kDimMismatch on wrong length, kInvalidParam on a duplicate id.
  void Add(ChunkId id, Embedding vector);

  // Highest similarities first; equal similarities ordered by ascending id.
  std::vector<Hit> TopK(std::span<const double> query, int k) const;

  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    ChunkId id;
    Embedding vector;
    double norm;
  };
  int dim_;
  std::vector<Entry> entries_;
  std::set<ChunkId> ids_;
};

// A chunk together with the outcome of the insight it came from.
struct ChunkRecord {
  bank::Chunk chunk;
  std::string tool_id;
  int verdict = 0;
};

// Vector index plus the chunk texts it points at.
class KnowledgeBase {
 public:
  KnowledgeBase(const EmbeddingBackend& embedder, bank::ChunkParams params = {});

  void AddInsight(const bank::Insight& insight);
  void AddAll(std::span<const bank::Insight> insights);

  const VectorIndex& index() const { return index_; }
  const ChunkRecord& record(const ChunkId& id) const;
  const EmbeddingBackend& embedder() const { return embedder_; }
  // Largest insight id seen so far; 0 when empty.
  std::uint64_t max_insight_id() const {
    return records_.empty() ? 0 : records_.rbegin()->first.insight_id;
  }

 private:
  const EmbeddingBackend& embedder_;
  bank::ChunkParams params_;
  VectorIndex index_;
  std::map<ChunkId, ChunkRecord> records_;
};

struct RetrievalQuery {
  std::string degradation_text;
  RestorationTask task;
};

struct RetrievedChunk {
  ChunkId id;
  double similarity = 0.0;
  std::string text;
  std::string tool_id;
  int verdict = 0;
};

std::string BuildPrompt(const RetrievalQuery& query,
                        std::span<const RetrievedChunk> chunks,
                        std::span<const ToolDescriptor> candidates);

// score(tool) = sum over its retrieved chunks of similarity * (2 verdict - 1).
// Highest score wins; ties go to the lexicographically smallest tool_id.
std::string ReferenceSelect(std::span<const RetrievedChunk> chunks,
                            std::span<const ToolDescriptor> candidates);

struct SelectorRequest {
  std::string_view prompt;
  std::span<const RetrievedChunk> chunks;
  std::span<const ToolDescriptor> candidates;
};

struct SelectorReply {
  std::string tool_id;
  std::string rationale;
};

class SelectorBackend {
 public:
  virtual ~SelectorBackend() = default;
  virtual SelectorReply Select(const SelectorRequest& request) = 0;
};

class ReferenceSelector final : public SelectorBackend {
 public:
  SelectorReply Select(const SelectorRequest& request) override;
};

// POST {"prompt": ...} -> {"text": ...}; the first line of the reply is taken
// as the tool_id and the remainder as the rationale.
class HttpSelector final : public SelectorBackend {
 public:
  HttpSelector(const std::string& url, std::chrono::milliseconds timeout);
  SelectorReply Select(const SelectorRequest& request) override;

 private:
  http::Endpoint endpoint_;
  std::chrono::milliseconds timeout_;
};

struct Selection {
  std::string tool_id;
  std::string rationale;
  std::string prompt;
  std::vector<RetrievedChunk> retrieved;
  bool forced = false;     // single eligible candidate
  bool fell_back = false;  // backend answer unusable; reference selector used
};

// Candidates are the tools supporting query.task minus `excluded`. Chunks are
// retrieved from the whole knowledge base, not only the queried task. Throws
// kNoCandidateTool when nothing is eligible.
Selection SelectTool(const RetrievalQuery& query, const KnowledgeBase& kb,
                     SelectorBackend& backend,
                     std::span<const ToolDescriptor> tools,
                     const std::set<std::string>& excluded, int k = kDefaultTopK);

}  // namespace restoragent::retrieval

#endif  // RESTORAGENT_RETRIEVAL_H_
