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
#pragma once

#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "qaprobe/error.hpp"
#include "qaprobe/model_adapter.hpp"

namespace qaprobe {

struct HttpModelConfig {
  std::string url;  // e.g. http://127.0.0.1:9000/predict
  int timeout_ms = 5000;
  int retries = 2;  // extra attempts after the first transport failure
  int max_in_flight = 8;
  bool attention_row_normalized = false;
};

// Client side of the model wire protocol: POST {context, question} and
// receive a ModelOutput JSON object. Transport failures are retried;
// HTTP errors and malformed payloads are not.
class HttpModel : public QaModel {
 public:
  explicit HttpModel(HttpModelConfig config)
      : config_(std::move(config)), in_flight_(std::max(1, config_.max_in_flight)) {
    const auto scheme_end = config_.url.find("://");
    if (scheme_end == std::string::npos) {
      throw Error(ErrorCode::kContract, "model endpoint URL needs a scheme: " + config_.url);
    }
    const auto path_start = config_.url.find('/', scheme_end + 3);
    base_ = config_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
  }

  ModelOutput Predict(std::string_view context, std::string_view question) override {
    const std::string body =
        nlohmann::json{{"context", std::string(context)}, {"question", std::string(question)}}.dump();

    in_flight_.acquire();
    struct Release {
      std::counting_semaphore<>& sem;
      ~Release() { sem.release(); }
    } release{in_flight_};

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
      auto client = Checkout();
      auto res = client->Post(path_, body, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;  // broken connection; do not return it to the pool
      }
      Return(std::move(client));
      if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::kEndpoint, "model endpoint returned HTTP " + std::to_string(res->status) +
                                              ": " + res->body.substr(0, 200));
      }
      nlohmann::json payload;
      try {
        payload = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::kProtocol, std::string("response is not JSON: ") + e.what());
      }
      ModelOutput out = ModelOutputFromJson(payload);
      ValidateModelOutput(out, config_.attention_row_normalized);
      return out;
    }
    throw Error(ErrorCode::kRetryable, "model endpoint " + config_.url + " unreachable after " +
                                           std::to_string(config_.retries + 1) +
                                           " attempts: " + last_error);
  }

  bool attention_row_normalized() const override { return config_.attention_row_normalized; }
  std::string name() const override { return config_.url; }

 private:
  std::unique_ptr<httplib::Client> Checkout() {
    {
      std::lock_guard lock(pool_mutex_);
      if (!pool_.empty()) {
        auto c = std::move(pool_.back());
        pool_.pop_back();
        return c;
      }
    }
    auto c = std::make_unique<httplib::Client>(base_);
    const auto sec = config_.timeout_ms / 1000;
    const auto usec = (config_.timeout_ms % 1000) * 1000;
    c->set_connection_timeout(sec, usec);
    c->set_read_timeout(sec, usec);
    c->set_write_timeout(sec, usec);
    c->set_keep_alive(true);
    return c;
  }

  void Return(std::unique_ptr<httplib::Client> client) {
    std::lock_guard lock(pool_mutex_);
    pool_.push_back(std::move(client));
  }

  HttpModelConfig config_;
  std::string base_;
  std::string path_;
  std::counting_semaphore<> in_flight_;
  std::mutex pool_mutex_;
  std::vector<std::unique_ptr<httplib::Client>> pool_;
};

}  // namespace qaprobe
