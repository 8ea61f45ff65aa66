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

#include "cli.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "restoragent/bank.h"
#include "restoragent/config.h"
#include "restoragent/error.h"
#include "restoragent/eval.h"
#include "restoragent/grpo.h"
#include "restoragent/http.h"
#include "restoragent/image.h"
#include "restoragent/iqa.h"
#include "restoragent/json_codec.h"
#include "restoragent/orchestrator.h"
#include "restoragent/retrieval.h"
#include "restoragent/tools.h"

namespace restoragent::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::int64_t UnixNow() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

tools::ToolRegistry BuildRegistry(const config::AppConfig& app) {
  return app.registry ? tools::RegistryFromJson(*app.registry) : tools::DefaultRegistry();
}

std::unique_ptr<retrieval::EmbeddingBackend> BuildEmbedder(const config::AppConfig& app) {
  const auto& b = app.backends;
  if (!b.embed_url) return std::make_unique<retrieval::HashEmbedder>();
  return std::make_unique<retrieval::HttpEmbedder>(*b.embed_url, b.embed_dim,
                                                   std::chrono::milliseconds(b.timeout_ms));
}

std::unique_ptr<retrieval::SelectorBackend> BuildSelector(const config::AppConfig& app) {
  const auto& b = app.backends;
  if (!b.complete_url) return std::make_unique<retrieval::ReferenceSelector>();
  return std::make_unique<retrieval::HttpSelector>(*b.complete_url,
                                                   std::chrono::milliseconds(b.timeout_ms));
}

fs::path RequireBankPath(const std::optional<std::string>& flag, const config::AppConfig& app) {
  if (flag) return *flag;
  if (app.bank_path) return *app.bank_path;
  throw Error(ErrorCode::kConfig, "no bank path: pass --bank or set bank_path in the config");
}

// ---- restore ----

struct RestoreArgs {
  std::string input;
  std::string output;
  std::optional<std::string> mode;
  bool no_evolve = false;
  std::optional<std::string> trace;
};

int Restore(const RestoreArgs& args, const config::AppConfig& app, std::ostream& out) {
  orchestrator::OrchestratorConfig oc = app.orchestrator;
  if (args.mode) oc.decision_mode = orchestrator::DecisionModeFromName(*args.mode);
  if (args.no_evolve) oc.evolution_enabled = false;
  orchestrator::ValidateConfig(oc);

  const ImageBuf input = LoadImage(args.input);
  const tools::ToolRegistry registry = BuildRegistry(app);
  const auto embedder = BuildEmbedder(app);
  retrieval::KnowledgeBase knowledge(*embedder);
  std::unique_ptr<bank::InsightBank> bank;
  if (app.bank_path) {
    bank = std::make_unique<bank::InsightBank>(*app.bank_path);
    const auto existing = bank->Snapshot();
    knowledge.AddAll(existing);
  }
  const orchestrator::HeuristicPerceiver perceiver(app.thresholds);
  const auto selector = BuildSelector(app);
  const orchestrator::ReferenceRewardGenerator reward(oc.reward_delta);
  const iqa::ClassicalMetricBackend metrics(app.metric_weights);
  const orchestrator::SessionDeps deps{registry, knowledge, perceiver, *selector,
                                       reward,   metrics,   bank.get(), UnixNow};
  const orchestrator::SessionResult result = orchestrator::RunSession(input, deps, oc);

  SaveImage(result.image, args.output);
  if (args.trace) WriteText(*args.trace, result.trace.dump(2) + "\n");
  json summary = {{"output", args.output},
                  {"mode", orchestrator::DecisionModeName(oc.decision_mode)},
                  {"committed_steps", result.committed_steps},
                  {"invocations", result.invocations},
                  {"new_insights", result.insights.size()},
                  {"final_quality", result.trace["final_quality"]}};
  summary["trace"] = args.trace ? json(*args.trace) : json(nullptr);
  out << summary.dump() << "\n";
  return kExitOk;
}

// ---- bank ----

// Accepts the task as a name or an integer code.
bank::Insight InsightFromFileEntry(const json& j, const std::string& where) {
  auto fail = [&](const std::string& msg) { throw Error(ErrorCode::kInvalidParam, where + ": " + msg); };
  if (!j.is_object()) fail("entry must be an object");
  for (const auto& [key, _] : j.items()) {
    static const std::vector<std::string> kKnown = {
        "insight_id", "degradation_info", "tool_id", "subjective_eval",
        "verdict",    "task",             "timestamp", "objective_delta"};
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) fail("unknown field " + key);
  }
  bank::Insight in;
  try {
    in.degradation_info = j.at("degradation_info").get<std::string>();
    in.tool_id = j.at("tool_id").get<std::string>();
    in.subjective_eval = j.value("subjective_eval", std::string());
    in.verdict = j.at("verdict").get<int>();
    const json& task = j.at("task");
    in.task = task.is_string() ? TaskFromName(task.get<std::string>())
                               : TaskFromCode(task.get<int>());
    in.timestamp = j.value("timestamp", std::int64_t{0});
    in.objective_delta = j.value("objective_delta", 0.0);
  } catch (const json::exception& e) {
    fail(e.what());
  } catch (const Error& e) {
    fail(e.message());
  }
  try {
    bank::ValidateInsight(in);
  } catch (const Error& e) {
    fail(e.message());
  }
  return in;
}

int BankBuild(const std::string& dir, const fs::path& bank_path, std::ostream& out) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  // Parse everything before appending so a bad file leaves the bank as it was.
  std::vector<bank::Insight> pending;
  for (const fs::path& file : files) {
    std::ifstream f(file);
    json doc;
    try {
      doc = json::parse(f);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, file.string() + ": " + e.what());
    }
    if (doc.is_array()) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        pending.push_back(InsightFromFileEntry(doc[i], file.string() + "[" + std::to_string(i) + "]"));
      }
    } else {
      pending.push_back(InsightFromFileEntry(doc, file.string()));
    }
  }
  bank::InsightBank bank(bank_path);
  std::vector<std::uint64_t> ids;
  for (bank::Insight& in : pending) {
    if (in.timestamp == 0) in.timestamp = UnixNow();
    ids.push_back(bank.Append(std::move(in)));
  }
  out << json{{"bank", bank_path.string()},
              {"files", files.size()},
              {"ingested", ids.size()},
              {"ids", ids},
              {"size", bank.size()}}
             .dump()
      << "\n";
  return kExitOk;
}

int BankStats(const fs::path& bank_path, std::ostream& out) {
  const auto insights = bank::ReadBankFile(bank_path);
  json by_task = json::object(), by_tool = json::object();
  int successes = 0;
  for (const auto& in : insights) {
    const std::string task(TaskName(in.task));
    by_task[task] = by_task.value(task, 0) + 1;
    by_tool[in.tool_id] = by_tool.value(in.tool_id, 0) + 1;
    successes += in.verdict;
  }
  out << json{{"bank", bank_path.string()},
              {"size", insights.size()},
              {"max_id", insights.empty() ? 0 : insights.back().insight_id},
              {"verdict_1", successes},
              {"verdict_0", static_cast<int>(insights.size()) - successes},
              {"by_task", by_task},
              {"by_tool", by_tool}}
             .dump()
      << "\n";
  return kExitOk;
}

int BankDump(const fs::path& bank_path, const std::optional<std::string>& task, std::ostream& out) {
  auto insights = bank::ReadBankFile(bank_path);
  if (task) {
    const RestorationTask t = TaskFromName(*task);
    std::erase_if(insights, [&](const bank::Insight& in) { return in.task != t; });
  }
  out << json(insights).dump() << "\n";
  return kExitOk;
}

// ---- train ----

// Built-in fixture when no image is given: a smooth two-tone scene with a
// bright patch for the airlight estimate, hazed with t = 0.6, A = 1.
ImageBuf DefaultTrainingImage() {
  const int w = 96, h = 72;
  std::vector<double> data(3 * static_cast<std::size_t>(w) * h);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double v = (x / 12 + y / 12) % 2 == 0 ? 0.08 + 0.04 * c : 0.55 - 0.1 * c;
        if (x >= 70 && y < 24) v = 0.95;
        data[c * static_cast<std::size_t>(w) * h + static_cast<std::size_t>(y) * w + x] = v;
      }
    }
  }
  return eval::ApplyDegradation(ImageBuf(w, h, std::move(data)), {{eval::Haze{0.6, 1.0}}, 0});
}

int Train(const std::vector<std::string>& images, std::uint64_t seed,
          const std::optional<int>& iterations, const std::optional<std::string>& curve_path,
          const config::AppConfig& app, std::ostream& out) {
  grpo::GrpoConfig gc = app.grpo;
  if (iterations) gc.iterations = *iterations;
  grpo::ValidateConfig(gc);
  const tools::ToolRegistry registry = BuildRegistry(app);
  const iqa::ClassicalMetricBackend metrics(app.metric_weights);
  grpo::BanditEnv env;
  if (images.empty()) {
    env.states.push_back(grpo::FixtureState(DefaultTrainingImage(), registry, metrics));
  } else {
    for (const std::string& path : images) {
      env.states.push_back(grpo::FixtureState(LoadImage(path), registry, metrics));
    }
  }
  const grpo::TrainResult result = grpo::TrainToyPolicy(env, gc, seed);

  if (curve_path) {
    std::string csv = "iteration,mean_reward,loss\n";
    for (const grpo::CurvePoint& p : result.curve) {
      csv += std::to_string(p.iteration) + "," + json(p.mean_reward).dump() + "," +
             json(p.loss).dump() + "\n";
    }
    WriteText(*curve_path, csv);
  }
  json states = json::array();
  for (const grpo::BanditState& s : env.states) {
    json policy = json::object();
    const auto pi = grpo::Policy(result.params.theta, s.features);
    for (RestorationTask t : kAllTasks) policy[std::string(TaskName(t))] = pi[TaskCode(t)];
    states.push_back({{"rewards", s.rewards}, {"policy", policy}});
  }
  json summary = {{"seed", seed}, {"iterations", gc.iterations}, {"states", states}};
  if (!result.curve.empty()) {
    summary["final_mean_reward"] = result.curve.back().mean_reward;
    summary["final_expected_reward"] = result.curve.back().expected_reward;
  }
  summary["curve"] = curve_path ? json(*curve_path) : json(nullptr);
  out << summary.dump() << "\n";
  return kExitOk;
}

// ---- eval ----

int Eval(const std::string& a, const std::string& b, std::ostream& out) {
  const ImageBuf x = LoadImage(a);
  const ImageBuf y = LoadImage(b);
  out << json{{"psnr", eval::Psnr(x, y)}, {"ssim", eval::Ssim(x, y)}}.dump() << "\n";
  return kExitOk;
}

// ---- probe-backends ----

json ProbeEmbed(const config::AppConfig& app) {
  const auto& b = app.backends;
  if (!b.embed_url) return {{"status", "not_configured"}};
  json r = {{"url", *b.embed_url}};
  try {
    const auto v = retrieval::HttpEmbedder(*b.embed_url, b.embed_dim,
                                           std::chrono::milliseconds(b.timeout_ms))
                       .Embed("probe");
    r["status"] = "ok";
    r["dim"] = v.size();
  } catch (const Error& e) {
    r["status"] = "error";
    r["error"] = e.what();
  }
  return r;
}

json ProbeComplete(const config::AppConfig& app) {
  const auto& b = app.backends;
  if (!b.complete_url) return {{"status", "not_configured"}};
  json r = {{"url", *b.complete_url}};
  try {
    http::PostJson(http::ParseEndpoint(*b.complete_url), {{"prompt", "probe"}},
                   std::chrono::milliseconds(b.timeout_ms));
    r["status"] = "ok";
  } catch (const Error& e) {
    r["status"] = "error";
    r["error"] = e.what();
  }
  return r;
}

json ProbeTools(const config::AppConfig& app, bool& healthy) {
  json list = json::array();
  const tools::ToolRegistry registry = BuildRegistry(app);
  for (const ToolDescriptor& d : registry.descriptors()) {
    if (d.mode != ToolMode::kExternal) continue;
    http::Endpoint health = http::ParseEndpoint(*d.endpoint);
    health.path = "/health";
    const int status = http::GetStatus(health, std::chrono::milliseconds(app.backends.timeout_ms));
    const bool ok = status == 200;
    healthy = healthy && ok;
    list.push_back({{"tool_id", d.tool_id},
                    {"endpoint", *d.endpoint},
                    {"status", ok ? "ok" : "error"},
                    {"http_status", status}});
  }
  return list;
}

int ProbeBackends(const config::AppConfig& app, std::ostream& out) {
  json report = {{"embed", ProbeEmbed(app)}, {"complete", ProbeComplete(app)}};
  bool healthy = report["embed"]["status"] != "error" && report["complete"]["status"] != "error";
  report["tools"] = ProbeTools(app, healthy);
  report["ok"] = healthy;
  out << report.dump() << "\n";
  return healthy ? kExitOk : kExitDomainError;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Agentic image restoration engine", "restoragent"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("-c,--config", config_path, "TOML or JSON configuration file");

  RestoreArgs restore_args;
  CLI::App* restore = app.add_subcommand("restore", "Restore an image with the agent loop");
  restore->add_option("input", restore_args.input, "Input PNG")->required();
  restore->add_option("output", restore_args.output, "Output PNG")->required();
  restore->add_option("--mode", restore_args.mode, "multi-step or one-step")
      ->check(CLI::IsMember({"multi-step", "one-step"}));
  restore->add_flag("--no-evolve", restore_args.no_evolve, "Do not write insights to the bank");
  restore->add_option("--trace", restore_args.trace, "Write the session trace as JSON");

  CLI::App* bank_cmd = app.add_subcommand("bank", "Inspect or build the insight bank");
  bank_cmd->require_subcommand(1);
  std::optional<std::string> bank_flag;
  bank_cmd->add_option("--bank", bank_flag, "Bank JSONL file (overrides bank_path)");
  std::string build_dir;
  CLI::App* build = bank_cmd->add_subcommand("build", "Ingest insight JSON files from a directory");
  build->add_option("dir", build_dir, "Directory of .json files")->required();
  CLI::App* stats = bank_cmd->add_subcommand("stats", "Summarize the bank");
  std::optional<std::string> dump_task;
  CLI::App* dump = bank_cmd->add_subcommand("dump", "Print the bank as a JSON array");
  dump->add_option("--task", dump_task, "Only insights for this task");

  std::vector<std::string> train_images;
  std::uint64_t seed = 0;
  std::optional<int> iterations;
  std::optional<std::string> curve_path;
  CLI::App* train = app.add_subcommand("train", "Train the toy task-selection policy");
  train->add_option("--image", train_images, "Degraded image to use as a bandit state");
  train->add_option("--seed", seed, "Sampling seed");
  train->add_option("--iterations", iterations, "Override grpo.iterations");
  train->add_option("--curve", curve_path, "Write the learning curve as CSV");

  std::string eval_a, eval_b;
  CLI::App* eval_cmd = app.add_subcommand("eval", "PSNR and SSIM between two images");
  eval_cmd->add_option("a", eval_a, "First PNG")->required();
  eval_cmd->add_option("b", eval_b, "Second PNG")->required();

  CLI::App* probe = app.add_subcommand("probe-backends", "Health-check configured endpoints");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    err << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    const config::AppConfig cfg =
        config::LoadAppConfig(config_path ? std::optional<fs::path>(*config_path) : std::nullopt);
    if (restore->parsed()) return Restore(restore_args, cfg, out);
    if (build->parsed()) return BankBuild(build_dir, RequireBankPath(bank_flag, cfg), out);
    if (stats->parsed()) return BankStats(RequireBankPath(bank_flag, cfg), out);
    if (dump->parsed()) return BankDump(RequireBankPath(bank_flag, cfg), dump_task, out);
    if (train->parsed()) return Train(train_images, seed, iterations, curve_path, cfg, out);
    if (eval_cmd->parsed()) return Eval(eval_a, eval_b, out);
    if (probe->parsed()) return ProbeBackends(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kExitDomainError;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace restoragent::cli
