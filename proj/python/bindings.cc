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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "restoragent/base64.h"
#include "restoragent/bank.h"
#include "restoragent/error.h"
#include "restoragent/eval.h"
#include "restoragent/grpo.h"
#include "restoragent/image.h"
#include "restoragent/iqa.h"
#include "restoragent/json_codec.h"
#include "restoragent/orchestrator.h"
#include "restoragent/retrieval.h"
#include "restoragent/tools.h"

namespace py = pybind11;

namespace restoragent {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (H, W, 3) array in [0, 1] -> planar ImageBuf.
ImageBuf FromArray(const Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) {
    throw Error(ErrorCode::kInvalidImage, "expected an array of shape (height, width, 3)");
  }
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> data(3 * n);
  auto v = a.unchecked<3>();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) data[c * n + static_cast<std::size_t>(y) * w + x] = v(y, x, c);
    }
  }
  return ImageBuf(w, h, std::move(data));
}

Array ToArray(const ImageBuf& img) {
  const int h = img.height(), w = img.width();
  Array a({h, w, 3});
  auto m = a.mutable_unchecked<3>();
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) m(y, x, c) = img.at(c, y, x);
    }
  }
  return a;
}

py::object JsonToPy(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::map<std::string, double> Quality(const Array& a, const iqa::MetricWeights& weights) {
  const QualityVector qv = iqa::ClassicalMetricBackend(weights).Evaluate(FromArray(a));
  std::map<std::string, double> out = qv.scores;
  out["aggregate"] = qv.aggregate;
  return out;
}

Array ApplyBuiltin(const std::string& name, const Array& a,
                   const std::map<std::string, std::string>& params) {
  return ToArray(tools::MakeBuiltin(name, params)(FromArray(a)));
}

py::tuple Restore(const Array& a, const std::string& mode, bool evolve,
                  const std::optional<std::filesystem::path>& bank_path) {
  orchestrator::OrchestratorConfig config;
  config.decision_mode = orchestrator::DecisionModeFromName(mode);
  config.evolution_enabled = evolve;
  const ImageBuf input = FromArray(a);
  const tools::ToolRegistry registry = tools::DefaultRegistry();
  const retrieval::HashEmbedder embedder;
  retrieval::KnowledgeBase knowledge(embedder);
  std::unique_ptr<bank::InsightBank> bank;
  if (bank_path) {
    bank = std::make_unique<bank::InsightBank>(*bank_path);
    const auto existing = bank->Snapshot();
    knowledge.AddAll(existing);
  }
  const orchestrator::HeuristicPerceiver perceiver;
  retrieval::ReferenceSelector selector;
  const orchestrator::ReferenceRewardGenerator reward;
  const iqa::ClassicalMetricBackend metrics;
  std::optional<orchestrator::SessionResult> result;
  {
    py::gil_scoped_release release;
    const orchestrator::SessionDeps deps{registry, knowledge, perceiver, selector,
                                         reward,   metrics,   bank.get(), nullptr};
    result.emplace(orchestrator::RunSession(input, deps, config));
  }
  return py::make_tuple(ToArray(result->image), JsonToPy(result->trace));
}

py::dict TrainToy(const Array& hazy, std::uint64_t seed, int iterations) {
  grpo::GrpoConfig config;
  config.iterations = iterations;
  const grpo::BanditEnv env{{grpo::FixtureState(FromArray(hazy), tools::DefaultRegistry(),
                                                iqa::ClassicalMetricBackend())}};
  const grpo::TrainResult r = grpo::TrainToyPolicy(env, config, seed);
  std::vector<double> mean_reward, expected_reward, loss;
  for (const grpo::CurvePoint& p : r.curve) {
    mean_reward.push_back(p.mean_reward);
    expected_reward.push_back(p.expected_reward);
    loss.push_back(p.loss);
  }
  py::dict out;
  out["rewards"] = env.states[0].rewards;
  out["policy"] = grpo::Policy(r.params.theta, env.states[0].features);
  out["mean_reward"] = mean_reward;
  out["expected_reward"] = expected_reward;
  out["loss"] = loss;
  return out;
}

}  // namespace
}  // namespace restoragent

PYBIND11_MODULE(_core, m) {
  using namespace restoragent;
  m.doc() = "Bindings for the restoragent C++ core.";

  // Leaked on purpose: the type must outlive every translator call.
  static const py::handle error_type = py::exception<Error>(m, "RestoragentError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(ErrorCodeName(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("load_image", [](const std::filesystem::path& p) { return ToArray(LoadImage(p)); },
        py::arg("path"), "Reads a PNG as an (H, W, 3) float array in [0, 1].");
  m.def("save_image",
        [](const Array& a, const std::filesystem::path& p) { SaveImage(FromArray(a), p); },
        py::arg("image"), py::arg("path"), "Writes an 8-bit RGB PNG.");
  m.def("quantize", [](const Array& a) { return ToArray(Quantize(FromArray(a))); },
        py::arg("image"));

  m.def("psnr", [](const Array& a, const Array& b) { return eval::Psnr(FromArray(a), FromArray(b)); },
        py::arg("a"), py::arg("b"));
  m.def("ssim", [](const Array& a, const Array& b) { return eval::Ssim(FromArray(a), FromArray(b)); },
        py::arg("a"), py::arg("b"));
  m.def(
      "quality",
      [](const Array& a, const std::optional<std::map<std::string, double>>& weights) {
        iqa::MetricWeights w = iqa::DefaultWeights();
        if (weights) {
          for (const auto& [k, v] : *weights) w[k] = v;
        }
        return Quality(a, w);
      },
      py::arg("image"), py::arg("weights") = py::none(),
      "No-reference metrics plus their weighted aggregate.");

  m.def("builtin_tools", &tools::BuiltinNames);
  m.def("apply_builtin", &ApplyBuiltin, py::arg("name"), py::arg("image"),
        py::arg("params") = std::map<std::string, std::string>{});
  m.def("task_names", [] {
    std::vector<std::string> names;
    for (RestorationTask t : kAllTasks) names.emplace_back(TaskName(t));
    return names;
  });

  m.def(
      "make_tool_request",
      [](const std::string& task, const Array& a, const std::map<std::string, std::string>& params) {
        return JsonToPy(tools::MakeToolRequest(TaskFromName(task), FromArray(a), params));
      },
      py::arg("task"), py::arg("image"), py::arg("params") = std::map<std::string, std::string>{},
      "Wire-protocol request body for an external tool.");
  m.def("base64_encode", [](const py::bytes& b) {
    const std::string s = b;
    return Base64Encode(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  });
  m.def("base64_decode", [](const std::string& s) {
    const auto v = Base64Decode(s);
    return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
  });

  m.def("restore", &Restore, py::arg("image"), py::arg("mode") = "multi-step",
        py::arg("evolve") = false, py::arg("bank_path") = py::none(),
        "Runs one restoration session with offline backends; returns (image, trace).");

  py::module_ g = m.def_submodule("grpo", "Group-relative policy optimization math.");
  g.def("advantages", [](const std::vector<int>& r, double eps) { return grpo::Advantages(r, eps); },
        py::arg("rewards"), py::arg("eps_num") = 1e-8);
  g.def("ratio", &grpo::Ratio, py::arg("p_new"), py::arg("p_old"));
  g.def("clipped_term", &grpo::ClippedTerm, py::arg("rho"), py::arg("advantage"),
        py::arg("eps_clip") = 0.2);
  g.def("l_clip",
        [](const std::vector<double>& rhos, const std::vector<double>& advs, double eps) {
          return grpo::LClip(rhos, advs, eps);
        },
        py::arg("rhos"), py::arg("advantages"), py::arg("eps_clip") = 0.2);
  g.def("kl_estimate", &grpo::KlEstimate, py::arg("p_ref"), py::arg("p_theta"));
  g.def("final_loss", &grpo::FinalLoss, py::arg("l_clip"), py::arg("kl_mean"),
        py::arg("beta") = 0.04);
  g.def("train_toy", &TrainToy, py::arg("image"), py::arg("seed") = 0,
        py::arg("iterations") = 200,
        "Trains the toy task selector on one degraded image.");
}
