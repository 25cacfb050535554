// Copyright 2026 The toxmap Authors
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

// toxmap: run the localisation pipeline, evaluate results, generate
// synthetic fixtures and serve oracle backends.
//
// Exit codes: 0 success, 1 usage or validation error, 2 runtime/backend error.

#include <CLI11.hpp>

#include <unistd.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "toxmap/artifacts.hpp"
#include "toxmap/config.hpp"
#include "toxmap/conformance.hpp"
#include "toxmap/fixtures.hpp"
#include "toxmap/mock_server.hpp"
#include "toxmap/protocol.hpp"

namespace {

using namespace toxmap;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kRuntime = 2;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
  std::vector<std::string> images;
  std::string config_path;
  std::map<std::string, std::string> flags;
};

int cmd_run(const RunArgs& args) {
  RunConfig cfg;
  PipelineConfig pipeline;
  try {
    ConfigLayer file;
    if (!args.config_path.empty()) file = layer_from_json(read_json(args.config_path));
    cfg = resolve_run_config(file, layer_from_process_env(), args.flags);
    if (cfg.segmenter_url.empty() || cfg.scorer_url.empty())
      throw ConfigError("segmenter and scorer URLs are required");
    pipeline = cfg.pipeline_config();
  } catch (const Error& e) {
    std::cerr << "toxmap run: " << e.what() << "\n";
    return kUsage;
  }

  const auto timeout = std::chrono::milliseconds(std::llround(cfg.backend_timeout_secs * 1000.0));
  HttpSegmenter segmenter(Endpoint{cfg.segmenter_url, timeout});
  HttpScorer scorer(Endpoint{cfg.scorer_url, timeout});
  std::filesystem::create_directories(cfg.out_dir);

  std::mutex lock;
  json errors = json::array();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < args.images.size(); i = next++) {
      const std::string& path = args.images[i];
      std::string stage = "read";
      try {
        const RgbImage image = read_png(path);
        stage = "pipeline";
        const PipelineResult result = run_pipeline(image, segmenter, scorer, pipeline);
        stage = "write";
        write_result(cfg.out_dir, output_stem(path), result);
        std::lock_guard guard(lock);
        std::cout << path << ": tox " << result.heatmap.image_tox << ", verdict "
                  << (result.heatmap.verdict() ? "harmful" : "benign") << ", "
                  << result.predicted_elements.size() << " element(s)\n";
      } catch (const BackendError& e) {
        std::lock_guard guard(lock);
        errors.push_back({{"image", path}, {"stage", e.stage()}, {"message", e.cause()}});
        std::cerr << path << ": " << e.what() << "\n";
      } catch (const std::exception& e) {
        std::lock_guard guard(lock);
        errors.push_back({{"image", path}, {"stage", stage}, {"message", e.what()}});
        std::cerr << path << ": " << e.what() << "\n";
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int n = std::min<int>(cfg.workers, int(args.images.size()));
    for (int t = 0; t < std::max(n, 1); ++t) pool.emplace_back(worker);
  }
  if (!errors.empty()) {
    write_file_atomic(std::filesystem::path(cfg.out_dir) / "_errors.json",
                      json{{"errors", errors}}.dump(2) + "\n");
    return kRuntime;
  }
  return kOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string manifest;
  std::string results_dir;
  std::string mode = "mask";
  std::string boxes;
  std::string out;
  std::string previews_dir;
  double tau = 0.5;
};

int cmd_eval(const EvalArgs& args) {
  DatasetManifest manifest;
  EvalMode mode = EvalMode::mask;
  try {
    if (args.mode == "bbox") {
      mode = EvalMode::bbox;
      if (args.boxes.empty())
        throw ConfigError("bbox mode requires a box predictions file (--boxes)");
    } else if (args.mode != "mask") {
      throw ConfigError("unknown mode '" + args.mode + "'");
    }
    if (!(args.tau > 0.0 && args.tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
    if (mode == EvalMode::mask && args.results_dir.empty())
      throw ConfigError("mask mode requires --results-dir");
    manifest = read_manifest(args.manifest);
  } catch (const Error& e) {
    std::cerr << "toxmap eval: " << e.what() << "\n";
    return kUsage;
  }

  try {
    std::map<std::string, ImagePrediction> predictions;
    if (mode == EvalMode::bbox) {
      predictions = read_box_predictions(args.boxes);
    } else {
      for (const ManifestImage& img : manifest.images)
        if (auto p = load_prediction(args.results_dir, img.path, args.tau))
          predictions.emplace(img.path, std::move(*p));
    }
    const EvalReport report = build_report(manifest, predictions, mode, args.tau);
    if (!args.previews_dir.empty()) {
      const auto base = std::filesystem::path(args.manifest).parent_path();
      std::filesystem::create_directories(args.previews_dir);
      for (const ManifestImage& img : manifest.images) {
        const RgbImage image = read_png(base / img.path);
        const ImagePrediction& p = predictions.at(img.path);
        std::vector<Mask> outlines = p.regions;
        if (p.box) outlines = {box_mask(*p.box, image.width(), image.height())};
        write_file_atomic(std::filesystem::path(args.previews_dir) / (output_stem(img.path) + ".preview.png"),
                          encode_png(boundary_preview(image, outlines)));
      }
    }
    std::filesystem::path out = args.out;
    if (out.empty()) out = std::filesystem::path(args.results_dir.empty() ? "." : args.results_dir) / "report";
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::filesystem::path json_path = out, text_path = out;
    json_path += ".json";
    text_path += ".txt";
    const std::string table = report_to_table(report);
    write_file_atomic(json_path, report_to_json(report).dump(2) + "\n");
    write_file_atomic(text_path, table);
    std::cout << table;
    return kOk;
  } catch (const IncompleteRun& e) {
    std::cerr << "toxmap eval: " << e.what() << "\n";
    for (const auto& m : e.missing()) std::cerr << "  missing: " << m << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "toxmap eval: " << e.what() << "\n";
    return kRuntime;
  }
}

// ---- fixtures --------------------------------------------------------------

struct FixturesArgs {
  int count = 20;
  std::uint64_t seed = 0;
  std::string out_dir = "fixtures";
  bool oversplit = false;
  bool overlap_split = false;
  int benign_count = 0;
  int width = 64;
  int height = 64;
};

int cmd_fixtures(const FixturesArgs& args) {
  if (args.count < 0 || args.benign_count < 0 || args.width < 8 || args.height < 8) {
    std::cerr << "toxmap fixtures: counts must be >= 0 and dimensions >= 8\n";
    return kUsage;
  }
  if (args.oversplit && args.overlap_split) {
    std::cerr << "toxmap fixtures: --oversplit and --overlap-split are exclusive\n";
    return kUsage;
  }
  try {
    FixtureSetOptions opts;
    opts.count = args.count;
    opts.seed = args.seed;
    opts.width = args.width;
    opts.height = args.height;
    opts.benign_count = args.benign_count;
    const std::vector<FixtureSpec> specs = random_fixture_specs(opts);
    std::filesystem::create_directories(args.out_dir);

    DatasetManifest manifest;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const Fixture f = generate_fixture(specs[i]);
      char name[32];
      std::snprintf(name, sizeof name, "fixture_%03zu.png", i);
      write_file_atomic(std::filesystem::path(args.out_dir) / name, encode_png(f.image));
      ManifestImage img{name, f.harmful, f.category, {}};
      for (const auto& e : f.elements) img.elements.push_back({e.name, e.mask});
      manifest.images.push_back(std::move(img));
    }
    const char* split = args.oversplit ? "oversplit" : args.overlap_split ? "overlap-split" : "none";
    manifest.metadata = {{"generator", "toxmap fixtures"},
                         {"seed", args.seed},
                         {"count", args.count},
                         {"benign_count", args.benign_count},
                         {"oversplit", args.oversplit},
                         {"split", split},
                         {"background", {opts.background.r, opts.background.g, opts.background.b}}};
    write_file_atomic(std::filesystem::path(args.out_dir) / "manifest.json",
                      manifest_to_json(manifest).dump(2) + "\n");
    std::cout << "wrote " << specs.size() << " fixture(s) to " << args.out_dir << "\n";
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "toxmap fixtures: " << e.what() << "\n";
    return kRuntime;
  }
}

// ---- mock-serve ------------------------------------------------------------

struct MockArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string manifest;
  bool oversplit = false;
  bool overlap_split = false;
};

int cmd_mock_serve(const MockArgs& args) {
  DatasetManifest manifest;
  try {
    manifest = read_manifest(args.manifest);
  } catch (const Error& e) {
    std::cerr << "toxmap mock-serve: " << e.what() << "\n";
    return kUsage;
  }
  try {
    Rgb background{255, 255, 255};
    SplitMode split = SplitMode::none;
    const json& meta = manifest.metadata;
    if (meta.contains("background") && meta["background"].is_array() && meta["background"].size() == 3)
      background = {meta["background"][0].get<std::uint8_t>(), meta["background"][1].get<std::uint8_t>(),
                    meta["background"][2].get<std::uint8_t>()};
    const std::string recorded = meta.value("split", std::string("none"));
    if (recorded == "oversplit") split = SplitMode::oversplit;
    if (recorded == "overlap-split") split = SplitMode::overlap_split;
    if (args.oversplit) split = SplitMode::oversplit;
    if (args.overlap_split) split = SplitMode::overlap_split;

    const auto base = std::filesystem::path(args.manifest).parent_path();
    MockBackendServer server(OracleSegmenter(background, split),
                             oracle_scorer_from_manifest(manifest, base));

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    const int port = server.bind(args.host, args.port);
    std::cout << "listening on http://" << args.host << ":" << port << std::endl;
    std::atomic<bool> stopped{false};
    std::jthread waiter([&] {
      int sig = 0;
      sigwait(&signals, &sig);
      stopped = true;
      server.stop();
    });
    server.listen();
    if (!stopped) kill(getpid(), SIGTERM);  // listen failed; release the waiter
    return kOk;
  } catch (const BackendError& e) {
    std::cerr << "toxmap mock-serve: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "toxmap mock-serve: " << e.what() << "\n";
    return kRuntime;
  }
}

// ---- conformance -----------------------------------------------------------

struct ConformanceArgs {
  std::string segmenter_url;
  std::string scorer_url;
  std::string image;
  double timeout_secs = 60.0;
};

int cmd_conformance(const ConformanceArgs& args) {
  RgbImage probe;
  try {
    probe = read_png(args.image);
  } catch (const Error& e) {
    std::cerr << "toxmap conformance: " << e.what() << "\n";
    return kUsage;
  }
  const auto timeout = std::chrono::milliseconds(std::llround(args.timeout_secs * 1000.0));
  const auto checks = run_conformance(Endpoint{args.segmenter_url, timeout},
                                      Endpoint{args.scorer_url, timeout}, probe);
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.detail << ")\n";
    ok = ok && c.passed;
  }
  return ok ? kOk : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toxmap: localise harmful elements by occlusion scoring of segment masks"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "score images and write heatmaps + JSON sidecars");
  run_cmd->add_option("--image", run.images, "input PNG(s)")->required();
  run_cmd->add_option("--config", run.config_path, "JSON config file");
  std::map<std::string, std::optional<std::string>> run_flags;
  for (const char* field : run_config_fields()) run_flags[field];
  for (auto& [field, value] : run_flags)
    run_cmd->add_option("--" + flag_name(field), value,
                        "overrides " + env_var_name(field) + " and config key '" + field + "'");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "score results against a ground-truth manifest");
  eval_cmd->add_option("--manifest", eval.manifest)->required();
  eval_cmd->add_option("--results-dir", eval.results_dir);
  eval_cmd->add_option("--mode", eval.mode, "mask | bbox");
  eval_cmd->add_option("--boxes", eval.boxes, "box predictions file (bbox mode)");
  eval_cmd->add_option("--tau", eval.tau);
  eval_cmd->add_option("--out", eval.out, "report path prefix (.json/.txt appended)");
  eval_cmd->add_option("--previews-dir", eval.previews_dir,
                       "write images with predicted region outlines for manual review");

  FixturesArgs fixtures;
  auto* fix_cmd = app.add_subcommand("fixtures", "generate synthetic fixtures and a manifest");
  fix_cmd->add_option("--count", fixtures.count);
  fix_cmd->add_option("--seed", fixtures.seed);
  fix_cmd->add_option("--out-dir", fixtures.out_dir);
  fix_cmd->add_flag("--oversplit", fixtures.oversplit);
  fix_cmd->add_flag("--overlap-split", fixtures.overlap_split);
  fix_cmd->add_option("--benign-count", fixtures.benign_count);
  fix_cmd->add_option("--width", fixtures.width);
  fix_cmd->add_option("--height", fixtures.height);

  MockArgs mock;
  auto* mock_cmd = app.add_subcommand("mock-serve", "serve oracle backends for a fixture manifest");
  mock_cmd->add_option("--port", mock.port);
  mock_cmd->add_option("--host", mock.host);
  mock_cmd->add_option("--fixtures-manifest", mock.manifest)->required();
  mock_cmd->add_flag("--oversplit", mock.oversplit);
  mock_cmd->add_flag("--overlap-split", mock.overlap_split);

  ConformanceArgs conf;
  auto* conf_cmd = app.add_subcommand("conformance", "check a backend pair against the wire protocol");
  conf_cmd->add_option("--segmenter-url", conf.segmenter_url)->required();
  conf_cmd->add_option("--scorer-url", conf.scorer_url)->required();
  conf_cmd->add_option("--image", conf.image, "probe PNG accepted by both servers")->required();
  conf_cmd->add_option("--timeout-secs", conf.timeout_secs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (run_cmd->parsed()) {
    for (auto& [field, value] : run_flags)
      if (value) run.flags[field] = *value;
    return cmd_run(run);
  }
  if (eval_cmd->parsed()) return cmd_eval(eval);
  if (fix_cmd->parsed()) return cmd_fixtures(fixtures);
  if (mock_cmd->parsed()) return cmd_mock_serve(mock);
  if (conf_cmd->parsed()) return cmd_conformance(conf);
  return kUsage;
}
