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

#include "restoragent/retrieval.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "restoragent/error.h"

namespace restoragent::retrieval {
namespace {

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool IsWordByte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

double Norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

bool HitBefore(const Hit& a, const Hit& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.id < b.id;
}

std::string TaskList(const ToolDescriptor& tool) {
  std::string out;
  for (RestorationTask t : tool.supported_tasks) {
    if (!out.empty()) out += ", ";
    out += TaskName(t);
  }
  return out;
}

std::string Trim(std::string_view s) {
  const auto is_junk = [](unsigned char c) {
    return std::isspace(c) || c == '`' || c == '"' || c == '\'' || c == '*';
  };
  std::size_t b = 0, e = s.size();
  while (b < e && is_junk(s[b])) ++b;
  while (e > b && is_junk(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Embedding HashEmbed(std::string_view text) {
  Embedding v(kHashEmbedDim, 0.0);
  std::size_t i = 0;
  bool any = false;
  while (i < text.size()) {
    if (!IsWordByte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::string word = "<";
    while (i < text.size() && IsWordByte(static_cast<unsigned char>(text[i]))) {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
      ++i;
    }
    word += '>';
    for (std::size_t j = 0; j + 3 <= word.size(); ++j) {
      const std::uint64_t h = Fnv1a(std::string_view(word).substr(j, 3));
      const double sign = ((h >> 63) & 1) ? -1.0 : 1.0;
      v[h % kHashEmbedDim] += sign;
      any = true;
    }
  }
  if (!any) return v;
  const double n = Norm(v);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
  return v;
}

HttpEmbedder::HttpEmbedder(const std::string& url, int dim,
                           std::chrono::milliseconds timeout)
    : endpoint_(http::ParseEndpoint(url)), dim_(dim), timeout_(timeout) {}

Embedding HttpEmbedder::Embed(std::string_view text) const {
  const nlohmann::json reply =
      http::PostJson(endpoint_, {{"text", std::string(text)}}, timeout_);
  Embedding v;
  try {
    v = reply.at("vector").get<Embedding>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("embed reply: ") + e.what());
  }
  if (static_cast<int>(v.size()) != dim_) {
    throw Error(ErrorCode::kProtocol, "embed reply has dimension " +
                                          std::to_string(v.size()) + ", expected " +
                                          std::to_string(dim_));
  }
  return v;
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  const double na = Norm(a), nb = Norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return Dot(a, b) / (na * nb);
}

VectorIndex::VectorIndex(int dim) : dim_(dim) {
  if (dim <= 0) throw Error(ErrorCode::kInvalidParam, "index dimension must be > 0");
}

void VectorIndex::Add(ChunkId id, Embedding vector) {
  if (static_cast<int>(vector.size()) != dim_) {
    throw Error(ErrorCode::kDimMismatch, "vector has dimension " +
                                             std::to_string(vector.size()) +
                                             ", index expects " + std::to_string(dim_));
  }
  if (!ids_.insert(id).second) {
    throw Error(ErrorCode::kInvalidParam, "duplicate chunk id");
  }
  const double norm = Norm(vector);
  entries_.push_back({id, std::move(vector), norm});
}

std::vector<Hit> VectorIndex::TopK(std::span<const double> query, int k) const {
  if (static_cast<int>(query.size()) != dim_) {
    throw Error(ErrorCode::kDimMismatch, "query has dimension " +
                                             std::to_string(query.size()) +
                                             ", index expects " + std::to_string(dim_));
  }
  if (k < 1) throw Error(ErrorCode::kInvalidParam, "k must be >= 1");
  const double qn = Norm(query);
  std::vector<Hit> hits;
  hits.reserve(entries_.size());
  for (const Entry& e : entries_) {
    const double sim =
        (qn == 0.0 || e.norm == 0.0) ? 0.0 : Dot(query, e.vector) / (qn * e.norm);
    hits.push_back({e.id, sim});
  }
  const auto n = std::min<std::size_t>(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + n, hits.end(), HitBefore);
  hits.resize(n);
  return hits;
}

KnowledgeBase::KnowledgeBase(const EmbeddingBackend& embedder,
                             bank::ChunkParams params)
    : embedder_(embedder), params_(params), index_(embedder.dim()) {}

void KnowledgeBase::AddInsight(const bank::Insight& insight) {
  for (bank::Chunk& chunk : bank::ChunkInsight(insight, params_)) {
    index_.Add(chunk.id, embedder_.Embed(chunk.text));
    const ChunkId id = chunk.id;
    records_.emplace(id, ChunkRecord{std::move(chunk), insight.tool_id, insight.verdict});
  }
}

void KnowledgeBase::AddAll(std::span<const bank::Insight> insights) {
  for (const bank::Insight& in : insights) AddInsight(in);
}

const ChunkRecord& KnowledgeBase::record(const ChunkId& id) const {
  auto it = records_.find(id);
  if (it == records_.end()) throw Error(ErrorCode::kInvalidParam, "unknown chunk id");
  return it->second;
}

std::string BuildPrompt(const RetrievalQuery& query,
                        std::span<const RetrievedChunk> chunks,
                        std::span<const ToolDescriptor> candidates) {
  std::string p = "You are choosing one image restoration tool.\n";
  p += "DEGRADATION: " + query.degradation_text + "\n";
  p += "TASK: " + std::string(TaskName(query.task)) + "\n";
  p += "CANDIDATE TOOLS:\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    p += std::to_string(i + 1) + ". " + candidates[i].tool_id + " [tasks: " +
         TaskList(candidates[i]) + "]\n";
  }
  if (chunks.empty()) {
    p += "RETRIEVED INSIGHTS: none\n";
  } else {
    p += "RETRIEVED INSIGHTS:\n";
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      char sim[32];
      std::snprintf(sim, sizeof(sim), "%.4f", chunks[i].similarity);
      p += "[" + std::to_string(i + 1) + "] chunk " +
           std::to_string(chunks[i].id.insight_id) + "#" +
           std::to_string(chunks[i].id.ordinal) + " similarity " + sim + "\n";
      p += chunks[i].text + "\n";
    }
  }
  p += "INSTRUCTION: Reply with exactly one tool_id from CANDIDATE TOOLS on the "
       "first line, then a one-sentence rationale.\n";
  return p;
}

std::string ReferenceSelect(std::span<const RetrievedChunk> chunks,
                            std::span<const ToolDescriptor> candidates) {
  if (candidates.empty()) {
    throw Error(ErrorCode::kNoCandidateTool, "no candidate tools");
  }
  std::map<std::string, double> score;
  for (const ToolDescriptor& t : candidates) score[t.tool_id] = 0.0;
  for (const RetrievedChunk& c : chunks) {
    auto it = score.find(c.tool_id);
    if (it != score.end()) it->second += c.similarity * (2 * c.verdict - 1);
  }
  // std::map iterates ids in ascending order, so strict > keeps the smallest
  // id among equal scores.
  auto best = score.begin();
  for (auto it = score.begin(); it != score.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

SelectorReply ReferenceSelector::Select(const SelectorRequest& request) {
  SelectorReply reply;
  reply.tool_id = ReferenceSelect(request.chunks, request.candidates);
  reply.rationale = "highest verdict-weighted similarity among " +
                    std::to_string(request.chunks.size()) + " retrieved chunks";
  return reply;
}

HttpSelector::HttpSelector(const std::string& url, std::chrono::milliseconds timeout)
    : endpoint_(http::ParseEndpoint(url)), timeout_(timeout) {}

SelectorReply HttpSelector::Select(const SelectorRequest& request) {
  const nlohmann::json reply = http::PostJson(
      endpoint_, {{"prompt", std::string(request.prompt)}}, timeout_);
  std::string text;
  try {
    text = reply.at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("complete reply: ") + e.what());
  }
  const auto nl = text.find('\n');
  SelectorReply out;
  out.tool_id = Trim(std::string_view(text).substr(0, nl));
  out.rationale = nl == std::string::npos ? "" : Trim(std::string_view(text).substr(nl + 1));
  return out;
}

Selection SelectTool(const RetrievalQuery& query, const KnowledgeBase& kb,
                     SelectorBackend& backend,
                     std::span<const ToolDescriptor> tools,
                     const std::set<std::string>& excluded, int k) {
  if (query.degradation_text.empty()) {
    throw Error(ErrorCode::kInvalidParam, "degradation text must be non-empty");
  }
  std::vector<ToolDescriptor> candidates;
  for (const ToolDescriptor& t : tools) {
    if (t.supports(query.task) && excluded.count(t.tool_id) == 0) {
      candidates.push_back(t);
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const ToolDescriptor& a, const ToolDescriptor& b) {
              return a.tool_id < b.tool_id;
            });
  if (candidates.empty()) {
    throw Error(ErrorCode::kNoCandidateTool,
                "no eligible tool for " + std::string(TaskName(query.task)));
  }

  Selection sel;
  const Embedding q = kb.embedder().Embed(query.degradation_text + "\nTASK: " +
                                          std::string(TaskName(query.task)));
  if (kb.index().size() > 0) {
    for (const Hit& hit : kb.index().TopK(q, k)) {
      const ChunkRecord& rec = kb.record(hit.id);
      sel.retrieved.push_back(
          {hit.id, hit.similarity, rec.chunk.text, rec.tool_id, rec.verdict});
    }
  }
  sel.prompt = BuildPrompt(query, sel.retrieved, candidates);

  if (candidates.size() == 1) {
    sel.tool_id = candidates.front().tool_id;
    sel.rationale = "only eligible tool";
    sel.forced = true;
    return sel;
  }

  SelectorReply reply;
  std::string problem;
  try {
    reply = backend.Select({sel.prompt, sel.retrieved, candidates});
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBackendUnavailable &&
        e.code() != ErrorCode::kProtocol) {
      throw;
    }
    problem = e.what();
  }
  const bool eligible =
      problem.empty() &&
      std::any_of(candidates.begin(), candidates.end(),
                  [&](const ToolDescriptor& t) { return t.tool_id == reply.tool_id; });
  if (eligible) {
    sel.tool_id = reply.tool_id;
    sel.rationale = reply.rationale;
  } else {
    sel.tool_id = ReferenceSelect(sel.retrieved, candidates);
    sel.rationale = problem.empty()
                        ? "backend named ineligible tool '" + reply.tool_id +
                              "'; reference selector used"
                        : "backend failed (" + problem + "); reference selector used";
    sel.fell_back = true;
  }
  return sel;
}

}  // namespace restoragent::retrieval
