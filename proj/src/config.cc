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

#include "restoragent/config.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "restoragent/error.h"

namespace restoragent::config {
namespace {

using nlohmann::json;

[[noreturn]] void Fail(const std::string& msg) { throw Error(ErrorCode::kConfig, msg); }

class TomlParser {
 public:
  explicit TomlParser(std::string_view text) : s_(text) {}

  json Parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      SkipBlankAndComments();
      if (AtEnd()) break;
      if (Peek() == '[') {
        table = ParseHeader(root);
      } else {
        ParseKeyValue(*table);
      }
      ExpectLineEnd();
    }
    return root;
  }

 private:
  bool AtEnd() const { return pos_ >= s_.size(); }
  char Peek() const { return AtEnd() ? '\0' : s_[pos_]; }

  [[noreturn]] void Bad(const std::string& msg) const {
    int line = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
    Fail("line " + std::to_string(line) + ": " + msg);
  }

  void SkipSpaces() {
    while (!AtEnd() && (Peek() == ' ' || Peek() == '\t')) ++pos_;
  }

  void SkipComment() {
    if (Peek() == '#') {
      while (!AtEnd() && Peek() != '\n') ++pos_;
    }
  }

  void SkipBlankAndComments() {
    while (!AtEnd()) {
      SkipSpaces();
      SkipComment();
      if (Peek() == '\n' || Peek() == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  void ExpectLineEnd() {
    SkipSpaces();
    SkipComment();
    if (Peek() == '\r') ++pos_;
    if (AtEnd()) return;
    if (Peek() != '\n') Bad("unexpected text after value");
    ++pos_;
  }

  std::string ParseKeyPart() {
    SkipSpaces();
    if (Peek() == '"') return ParseBasicString();
    if (Peek() == '\'') return ParseLiteralString();
    const std::size_t start = pos_;
    while (!AtEnd() && (std::isalnum(static_cast<unsigned char>(Peek())) || Peek() == '_' ||
                        Peek() == '-')) {
      ++pos_;
    }
    if (pos_ == start) Bad("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::vector<std::string> ParseKey() {
    std::vector<std::string> parts = {ParseKeyPart()};
    SkipSpaces();
    while (Peek() == '.') {
      ++pos_;
      parts.push_back(ParseKeyPart());
      SkipSpaces();
    }
    return parts;
  }

  // Descends into (creating) nested tables; the last element of an array of
  // tables stands for the array.
  json* Descend(json* node, const std::string& part, std::string& path) {
    if (!node->contains(part)) (*node)[part] = json::object();
    json* child = &(*node)[part];
    path += "." + part;
    if (child->is_array()) {
      if (child->empty() || !child->back().is_object()) Bad("key " + part + " is not a table");
      path += "[" + std::to_string(child->size() - 1) + "]";
      return &child->back();
    }
    if (!child->is_object()) Bad("key " + part + " is not a table");
    return child;
  }

  json* ParseHeader(json& root) {
    ++pos_;
    const bool array = Peek() == '[';
    if (array) ++pos_;
    const std::vector<std::string> key = ParseKey();
    if (Peek() != ']') Bad("expected ]");
    ++pos_;
    if (array) {
      if (Peek() != ']') Bad("expected ]]");
      ++pos_;
    }
    json* node = &root;
    std::string path;
    for (std::size_t i = 0; i + 1 < key.size(); ++i) node = Descend(node, key[i], path);
    const std::string& last = key.back();
    path += "." + last;
    if (array) {
      if (!node->contains(last)) (*node)[last] = json::array();
      json& arr = (*node)[last];
      if (!arr.is_array() || explicit_.count(path)) Bad("key " + last + " is not an array of tables");
      arr.push_back(json::object());
      return &arr.back();
    }
    if (node->contains(last)) {
      json& existing = (*node)[last];
      if (!existing.is_object() || !explicit_.insert(path).second) Bad("table " + last + " redefined");
      return &existing;
    }
    explicit_.insert(path);
    (*node)[last] = json::object();
    return &(*node)[last];
  }

  void ParseKeyValue(json& table) {
    const std::vector<std::string> key = ParseKey();
    SkipSpaces();
    if (Peek() != '=') Bad("expected =");
    ++pos_;
    SkipSpaces();
    json value = ParseValue();
    json* node = &table;
    std::string path;
    for (std::size_t i = 0; i + 1 < key.size(); ++i) node = Descend(node, key[i], path);
    if (node->contains(key.back())) Bad("key " + key.back() + " redefined");
    (*node)[key.back()] = std::move(value);
  }

  json ParseValue() {
    const char c = Peek();
    if (c == '"') return ParseBasicString();
    if (c == '\'') return ParseLiteralString();
    if (c == '[') return ParseArray();
    if (c == '{') return ParseInlineTable();
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return ParseNumber();
  }

  std::string ParseBasicString() {
    ++pos_;
    std::string out;
    while (true) {
      if (AtEnd() || Peek() == '\n') Bad("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (AtEnd()) Bad("unterminated string");
      const char e = s_[pos_++];
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case 'u': AppendUtf8(ParseHex(4), out); break;
        case 'U': AppendUtf8(ParseHex(8), out); break;
        default: Bad(std::string("unknown escape \\") + e);
      }
    }
  }

  unsigned long ParseHex(int digits) {
    if (pos_ + digits > s_.size()) Bad("truncated unicode escape");
    unsigned long v = 0;
    const auto r = std::from_chars(s_.data() + pos_, s_.data() + pos_ + digits, v, 16);
    if (r.ptr != s_.data() + pos_ + digits) Bad("bad unicode escape");
    pos_ += digits;
    return v;
  }

  void AppendUtf8(unsigned long cp, std::string& out) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) Bad("invalid code point");
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  std::string ParseLiteralString() {
    ++pos_;
    const std::size_t start = pos_;
    while (!AtEnd() && Peek() != '\'' && Peek() != '\n') ++pos_;
    if (Peek() != '\'') Bad("unterminated string");
    std::string out(s_.substr(start, pos_ - start));
    ++pos_;
    return out;
  }

  json ParseArray() {
    ++pos_;
    json arr = json::array();
    while (true) {
      SkipBlankAndComments();
      if (Peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(ParseValue());
      SkipBlankAndComments();
      if (Peek() == ',') {
        ++pos_;
      } else if (Peek() != ']') {
        Bad("expected , or ] in array");
      }
    }
  }

  json ParseInlineTable() {
    ++pos_;
    json table = json::object();
    SkipSpaces();
    if (Peek() == '}') {
      ++pos_;
      return table;
    }
    while (true) {
      ParseKeyValue(table);
      SkipSpaces();
      if (Peek() == '}') {
        ++pos_;
        return table;
      }
      if (Peek() != ',') Bad("expected , or } in inline table");
      ++pos_;
    }
  }

  json ParseNumber() {
    const std::size_t start = pos_;
    while (!AtEnd() && (std::isalnum(static_cast<unsigned char>(Peek())) || Peek() == '+' ||
                        Peek() == '-' || Peek() == '.' || Peek() == '_')) {
      ++pos_;
    }
    std::string tok;
    for (char c : s_.substr(start, pos_ - start)) {
      if (c != '_') tok.push_back(c);
    }
    if (tok.empty()) Bad("expected a value");
    const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    if (tok.find_first_of(".eE") == std::string::npos) {
      long long v = 0;
      const auto r = std::from_chars(first, last, v);
      if (r.ec != std::errc() || r.ptr != last) Bad("invalid value " + tok);
      return v;
    }
    double v = 0.0;
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last || !std::isfinite(v)) Bad("invalid value " + tok);
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::set<std::string> explicit_;  // paths of tables opened by a [header]
};

// Rejects keys outside `allowed`.
void CheckKeys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) Fail(section + " must be a table");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) Fail("unknown key " + (section.empty() ? key : section + "." + key));
  }
}

double GetDouble(const json& j, const std::string& where) {
  if (!j.is_number()) Fail(where + " must be a number");
  return j.get<double>();
}

int GetInt(const json& j, const std::string& where) {
  if (!j.is_number_integer()) Fail(where + " must be an integer");
  const long long v = j.get<long long>();
  if (v < INT32_MIN || v > INT32_MAX) Fail(where + " is out of range");
  return static_cast<int>(v);
}

bool GetBool(const json& j, const std::string& where) {
  if (!j.is_boolean()) Fail(where + " must be a boolean");
  return j.get<bool>();
}

std::string GetString(const json& j, const std::string& where) {
  if (!j.is_string()) Fail(where + " must be a string");
  return j.get<std::string>();
}

std::filesystem::path Resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_absolute() ? p : base / p;
}

void ReadOrchestrator(const json& j, orchestrator::OrchestratorConfig& c) {
  CheckKeys(j, "orchestrator", {"max_steps", "max_retries_per_step", "decision_mode", "k",
                                "reward_delta", "evolution_enabled"});
  if (j.contains("max_steps")) c.max_steps = GetInt(j["max_steps"], "orchestrator.max_steps");
  if (j.contains("max_retries_per_step")) {
    c.max_retries_per_step = GetInt(j["max_retries_per_step"], "orchestrator.max_retries_per_step");
  }
  if (j.contains("decision_mode")) {
    c.decision_mode = orchestrator::DecisionModeFromName(
        GetString(j["decision_mode"], "orchestrator.decision_mode"));
  }
  if (j.contains("k")) c.k = GetInt(j["k"], "orchestrator.k");
  if (j.contains("reward_delta")) {
    c.reward_delta = GetDouble(j["reward_delta"], "orchestrator.reward_delta");
  }
  if (j.contains("evolution_enabled")) {
    c.evolution_enabled = GetBool(j["evolution_enabled"], "orchestrator.evolution_enabled");
  }
  orchestrator::ValidateConfig(c);
}

void ReadThresholds(const json& j, orchestrator::PerceptionThresholds& t) {
  CheckKeys(j, "perception",
            {"low_light_luminance", "haze_dark_channel", "noise_sigma", "blur_sharpness"});
  auto read = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    out = GetDouble(j[key], std::string("perception.") + key);
    if (!(out >= 0.0)) Fail(std::string("perception.") + key + " must be >= 0");
  };
  read("low_light_luminance", t.low_light_luminance);
  read("haze_dark_channel", t.haze_dark_channel);
  read("noise_sigma", t.noise_sigma);
  read("blur_sharpness", t.blur_sharpness);
}

void ReadGrpo(const json& j, grpo::GrpoConfig& c) {
  CheckKeys(j, "grpo", {"eps_clip", "beta", "eps_num", "n", "learning_rate", "iterations",
                        "inner_steps"});
  if (j.contains("eps_clip")) c.eps_clip = GetDouble(j["eps_clip"], "grpo.eps_clip");
  if (j.contains("beta")) c.beta = GetDouble(j["beta"], "grpo.beta");
  if (j.contains("eps_num")) c.eps_num = GetDouble(j["eps_num"], "grpo.eps_num");
  if (j.contains("n")) c.n = GetInt(j["n"], "grpo.n");
  if (j.contains("learning_rate")) {
    c.learning_rate = GetDouble(j["learning_rate"], "grpo.learning_rate");
  }
  if (j.contains("iterations")) c.iterations = GetInt(j["iterations"], "grpo.iterations");
  if (j.contains("inner_steps")) c.inner_steps = GetInt(j["inner_steps"], "grpo.inner_steps");
  grpo::ValidateConfig(c);
}

void ReadWeights(const json& j, iqa::MetricWeights& w) {
  if (!j.is_object()) Fail("metric_weights must be a table");
  for (const auto& [key, value] : j.items()) {
    if (!w.contains(key)) Fail("unknown key metric_weights." + key);
    w[key] = GetDouble(value, "metric_weights." + key);
  }
}

void ReadBackends(const json& j, Backends& b) {
  CheckKeys(j, "backends", {"embed_url", "embed_dim", "complete_url", "timeout_ms"});
  if (j.contains("embed_url")) b.embed_url = GetString(j["embed_url"], "backends.embed_url");
  if (j.contains("complete_url")) {
    b.complete_url = GetString(j["complete_url"], "backends.complete_url");
  }
  if (j.contains("embed_dim")) b.embed_dim = GetInt(j["embed_dim"], "backends.embed_dim");
  if (j.contains("timeout_ms")) b.timeout_ms = GetInt(j["timeout_ms"], "backends.timeout_ms");
  if (b.embed_dim < 1) Fail("backends.embed_dim must be >= 1");
  if (b.timeout_ms < 1) Fail("backends.timeout_ms must be >= 1");
}

void ValidateEndpoints(const Backends& b) {
  for (const auto* url : {&b.embed_url, &b.complete_url}) {
    if (!*url) continue;
    try {
      http::ParseEndpoint(**url);
    } catch (const restoragent::Error& e) {
      Fail("bad backend url: " + e.message());
    }
  }
}

}  // namespace

nlohmann::json ParseToml(std::string_view text) { return TomlParser(text).Parse(); }

nlohmann::json ReadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    if (path.extension() == ".json") return json::parse(text);
    return ParseToml(text);
  } catch (const json::exception& e) {
    Fail(path.string() + ": " + e.what());
  } catch (const restoragent::Error& e) {
    Fail(path.string() + ": " + e.message());
  }
}

std::optional<std::string> ProcessEnv(std::string_view name) {
  const char* v = std::getenv(std::string(name).c_str());
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

AppConfig AppConfigFromJson(const nlohmann::json& j, const std::filesystem::path& base_dir,
                            const EnvLookup& env) {
  CheckKeys(j, "", {"bank_path", "registry", "backends", "orchestrator", "perception", "grpo",
                    "metric_weights"});
  AppConfig c;
  if (j.contains("bank_path")) c.bank_path = Resolve(GetString(j["bank_path"], "bank_path"), base_dir);
  if (j.contains("registry")) {
    const json& r = j["registry"];
    if (r.is_string()) {
      const auto path = Resolve(r.get<std::string>(), base_dir);
      c.registry = ReadConfigFile(path);
    } else if (r.is_object()) {
      c.registry = r;
    } else {
      Fail("registry must be a file name or a table");
    }
    tools::RegistryFromJson(*c.registry);  // validate eagerly
  }
  if (j.contains("backends")) ReadBackends(j["backends"], c.backends);
  if (j.contains("orchestrator")) ReadOrchestrator(j["orchestrator"], c.orchestrator);
  if (j.contains("perception")) ReadThresholds(j["perception"], c.thresholds);
  if (j.contains("grpo")) ReadGrpo(j["grpo"], c.grpo);
  if (j.contains("metric_weights")) ReadWeights(j["metric_weights"], c.metric_weights);
  if (auto v = env(kEmbedUrlEnv)) c.backends.embed_url = *v;
  if (auto v = env(kCompleteUrlEnv)) c.backends.complete_url = *v;
  ValidateEndpoints(c.backends);
  return c;
}

AppConfig LoadAppConfig(const std::optional<std::filesystem::path>& path, const EnvLookup& env) {
  if (!path) return AppConfigFromJson(json::object(), ".", env);
  return AppConfigFromJson(ReadConfigFile(*path), path->parent_path(), env);
}

}  // namespace restoragent::config
