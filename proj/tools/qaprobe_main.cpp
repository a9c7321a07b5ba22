// Copyright 2026 The qaprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// qaprobe: diagnosis server for extractive QA models.
//
//   qaprobe serve --dataset dev.json --embeddings vectors.txt --mock
//   qaprobe mock-model --port 9000
//   qaprobe evaluate --dataset dev.json --model-endpoint http://127.0.0.1:9000/predict

#include <csignal>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "qaprobe/http_model.hpp"
#include "qaprobe/http_server.hpp"
#include "qaprobe/qaprobe.hpp"

namespace {

httplib::Server* g_running_server = nullptr;

void HandleSignal(int) {
  if (g_running_server != nullptr) g_running_server->stop();
}

void AddServiceOptions(CLI::App& cmd, qaprobe::ServiceConfig& cfg) {
  cmd.add_option("--dataset", cfg.dataset_path, "SQuAD 2.0 JSON file")->envname("QAPROBE_DATASET");
  cmd.add_option("--embeddings", cfg.embeddings_path, "Text word-vector file")->envname("QAPROBE_EMBEDDINGS");
  cmd.add_option("--rules", cfg.rules_path, "Adversarial rule library (JSON)")->envname("QAPROBE_RULES");
  cmd.add_option("--cache", cfg.cache_path, "Prediction cache file (JSON lines)")->envname("QAPROBE_CACHE");
  cmd.add_option("--model-endpoint", cfg.model_endpoint, "URL of the model's predict endpoint")
      ->envname("QAPROBE_MODEL_ENDPOINT");
  cmd.add_flag("--mock", cfg.mock_mode, "Use the built-in mock model")->envname("QAPROBE_MOCK");
  cmd.add_option("--model-timeout-ms", cfg.model_timeout_ms, "Model request timeout")
      ->envname("QAPROBE_MODEL_TIMEOUT_MS");
  cmd.add_option("--model-retries", cfg.model_retries, "Retries after a transport failure")
      ->envname("QAPROBE_MODEL_RETRIES");
  cmd.add_option("--model-max-in-flight", cfg.model_max_in_flight, "Concurrent model requests")
      ->envname("QAPROBE_MODEL_MAX_IN_FLIGHT");
  cmd.add_flag("--attention-row-normalized", cfg.model_attention_row_normalized,
               "Reject model attention rows that do not sum to 1");
  cmd.add_option("--top-k", cfg.top_k, "Default k for ranked lists")->envname("QAPROBE_TOP_K");
  cmd.add_option("--max-answer-len", cfg.max_answer_len, "Longest span candidate, in tokens")
      ->envname("QAPROBE_MAX_ANSWER_LEN");
  cmd.add_option("--frequent-vocab", cfg.frequent_vocab_size, "Question one-hot vocabulary size")
      ->envname("QAPROBE_FREQUENT_VOCAB");
  cmd.add_option("--global-weight", cfg.global_weight, "Weight of class-mean features in similarity")
      ->envname("QAPROBE_GLOBAL_WEIGHT");
}

std::shared_ptr<qaprobe::QaModel> MakeModel(const qaprobe::ServiceConfig& cfg) {
  if (cfg.mock_mode) return std::make_shared<qaprobe::MockModel>();
  return std::make_shared<qaprobe::HttpModel>(qaprobe::HttpModelConfig{
      cfg.model_endpoint, cfg.model_timeout_ms, cfg.model_retries, cfg.model_max_in_flight,
      cfg.model_attention_row_normalized});
}

int RunServe(qaprobe::ServiceConfig cfg) {
  cfg.Validate();
  qaprobe::Service service(cfg, MakeModel(cfg));
  for (const auto& w : service.dataset().warnings()) {
    std::cerr << "warning: " << w.instance_id << ": " << w.message << "\n";
  }
  qaprobe::ApiServer api(service);
  g_running_server = &api.server();
  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  std::cerr << "qaprobe: " << service.dataset().size() << " instances, model " << service.model().name()
            << ", listening on http://" << cfg.host << ":" << cfg.port << "\n";
  if (!api.Listen(cfg.host, cfg.port)) {
    std::cerr << "qaprobe: cannot listen on " << cfg.host << ":" << cfg.port << "\n";
    return 1;
  }
  return 0;
}

int RunMockModel(const std::string& host, int port, const std::string& path) {
  qaprobe::MockModel model;
  httplib::Server server;
  qaprobe::MountModelEndpoint(server, path, model);
  g_running_server = &server;
  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  std::cerr << "mock model on http://" << host << ":" << port << path << "\n";
  return server.listen(host, port) ? 0 : 1;
}

int RunEvaluate(qaprobe::ServiceConfig cfg, size_t parallelism) {
  cfg.Validate();
  qaprobe::Service service(cfg, MakeModel(cfg));
  service.StartPrecompute(parallelism);
  service.WaitForPrecompute();
  auto out = service.Stats();
  out["precompute"] = service.PrecomputeStatus();
  std::cout << out.dump(2) << "\n";
  return out["precompute"]["failed"].get<size_t>() == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qaprobe - diagnosis server for extractive question answering models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values");

  qaprobe::ServiceConfig serve_cfg;
  auto* serve = app.add_subcommand("serve", "Run the REST API server");
  AddServiceOptions(*serve, serve_cfg);
  serve->add_option("--host", serve_cfg.host, "Listen address")->envname("QAPROBE_HOST");
  serve->add_option("--port", serve_cfg.port, "Listen port")->envname("QAPROBE_PORT");
  serve->add_option("--ui-dir", serve_cfg.ui_dir, "Directory with the built UI bundle")->envname("QAPROBE_UI_DIR");

  std::string mock_host = "127.0.0.1";
  int mock_port = 9000;
  std::string mock_path = "/predict";
  auto* mock = app.add_subcommand("mock-model", "Serve the built-in mock model over the model protocol");
  mock->add_option("--host", mock_host, "Listen address");
  mock->add_option("--port", mock_port, "Listen port");
  mock->add_option("--path", mock_path, "Endpoint path");

  qaprobe::ServiceConfig eval_cfg;
  size_t parallelism = 4;
  auto* evaluate = app.add_subcommand("evaluate", "Predict every instance and print EM/F1 statistics");
  AddServiceOptions(*evaluate, eval_cfg);
  evaluate->add_option("--parallelism", parallelism, "Concurrent prediction workers")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return RunServe(serve_cfg);
    if (*mock) return RunMockModel(mock_host, mock_port, mock_path);
    if (*evaluate) return RunEvaluate(eval_cfg, parallelism);
  } catch (const qaprobe::Error& e) {
    std::cerr << "qaprobe: " << qaprobe::ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
