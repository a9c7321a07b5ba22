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

#include <charconv>
#include <functional>
#include <string>
#include <string_view>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "qaprobe/error.hpp"
#include "qaprobe/model_adapter.hpp"
#include "qaprobe/service.hpp"

namespace qaprobe {

inline int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kParse:
    case ErrorCode::kContract:
      return 400;
    case ErrorCode::kDegenerate:
      return 422;
    case ErrorCode::kProtocol:
    case ErrorCode::kEndpoint:
      return 502;
    case ErrorCode::kRetryable:
      return 503;
  }
  return 500;
}

namespace internal {

inline void WriteJson(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void WriteError(httplib::Response& res, ErrorCode code, const std::string& message) {
  WriteJson(res, HttpStatusFor(code), {{"error", ErrorCodeName(code)}, {"message", message}});
}

// Runs a handler body and maps exceptions onto the JSON error envelope.
inline void Respond(httplib::Response& res, const std::function<nlohmann::json()>& body, int ok_status = 200) {
  try {
    WriteJson(res, ok_status, body());
  } catch (const Error& e) {
    WriteError(res, e.code(), e.what());
  } catch (const nlohmann::json::exception& e) {
    WriteError(res, ErrorCode::kParse, e.what());
  } catch (const std::exception& e) {
    WriteJson(res, 500, {{"error", "internal_error"}, {"message", e.what()}});
  }
}

inline size_t SizeParam(const httplib::Request& req, const char* name, size_t fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string raw = req.get_param_value(name);
  size_t value = 0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
  if (ec != std::errc() || ptr != raw.data() + raw.size()) {
    throw Error(ErrorCode::kContract, std::string("query parameter '") + name + "' must be a non-negative integer");
  }
  return value;
}

inline std::string StringParam(const httplib::Request& req, const char* name) {
  return req.has_param(name) ? req.get_param_value(name) : std::string();
}

inline nlohmann::json BodyOrEmpty(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(req.body);
  if (!j.is_object()) throw Error(ErrorCode::kContract, "request body must be a JSON object");
  return j;
}

inline InstanceFilter ParseFilter(const httplib::Request& req) {
  InstanceFilter f;
  const std::string correctness = StringParam(req, "correctness");
  if (correctness == "correct") {
    f.correctness = CorrectnessFilter::kCorrect;
  } else if (correctness == "incorrect") {
    f.correctness = CorrectnessFilter::kIncorrect;
  } else if (!correctness.empty() && correctness != "all") {
    throw Error(ErrorCode::kContract, "correctness must be all, correct or incorrect");
  }
  const std::string answerable = StringParam(req, "answerable");
  if (answerable == "yes") {
    f.answerable = AnswerableFilter::kYes;
  } else if (answerable == "no") {
    f.answerable = AnswerableFilter::kNo;
  } else if (!answerable.empty() && answerable != "all") {
    throw Error(ErrorCode::kContract, "answerable must be all, yes or no");
  }
  f.text_query = StringParam(req, "q");
  return f;
}

}  // namespace internal

// REST facade over a Service.
class ApiServer {
 public:
  explicit ApiServer(Service& service) : service_(service) { Routes(); }

  httplib::Server& server() { return server_; }

  int BindToAnyPort(const std::string& host) { return server_.bind_to_any_port(host); }
  bool Listen(const std::string& host, int port) { return server_.listen(host, port); }
  bool ListenAfterBind() { return server_.listen_after_bind(); }
  void Stop() { server_.stop(); }
  void WaitUntilReady() { server_.wait_until_ready(); }

 private:
  void Routes() {
    using internal::Respond;
    using Req = httplib::Request;
    using Res = httplib::Response;
    Service& svc = service_;
    const ServiceConfig& cfg = svc.config();

    server_.Get("/api/health", [&svc](const Req&, Res& res) { Respond(res, [&] { return svc.Health(); }); });
    server_.Get("/api/stats", [&svc](const Req&, Res& res) { Respond(res, [&] { return svc.Stats(); }); });

    server_.Get("/api/instances", [&svc](const Req& req, Res& res) {
      Respond(res, [&] {
        return svc.ListInstances(internal::ParseFilter(req), internal::SizeParam(req, "offset", 0),
                                 internal::SizeParam(req, "limit", 50));
      });
    });
    server_.Get("/api/instances/:id", [&svc](const Req& req, Res& res) {
      Respond(res, [&] { return svc.InstanceDetail(req.path_params.at("id")); });
    });
    server_.Get("/api/instances/:id/internals", [&svc, &cfg](const Req& req, Res& res) {
      Respond(res, [&] {
        return svc.Internals(req.path_params.at("id"), internal::SizeParam(req, "k", cfg.top_k),
                             internal::SizeParam(req, "max_len", cfg.max_answer_len));
      });
    });
    server_.Get("/api/instances/:id/similar", [&svc, &cfg](const Req& req, Res& res) {
      Respond(res, [&] { return svc.Similar(req.path_params.at("id"), internal::SizeParam(req, "k", cfg.top_k)); });
    });
    server_.Post("/api/instances/:id/edit", [&svc](const Req& req, Res& res) {
      Respond(res, [&] {
        const auto body = internal::BodyOrEmpty(req);
        const std::string field = body.value("field", std::string());
        if (field != "question" && field != "context") {
          throw Error(ErrorCode::kContract, "field must be 'question' or 'context'");
        }
        if (!body.contains("token_index") || !body["token_index"].is_number_unsigned()) {
          throw Error(ErrorCode::kContract, "token_index must be a non-negative integer");
        }
        if (!body.contains("replacement") || !body["replacement"].is_string()) {
          throw Error(ErrorCode::kContract, "replacement must be a string");
        }
        return svc.Edit(req.path_params.at("id"), field == "question" ? TextField::kQuestion : TextField::kContext,
                        body["token_index"].get<size_t>(), body["replacement"].get<std::string>(),
                        body.value("session_id", std::string()));
      });
    });

    server_.Post("/api/precompute", [&svc](const Req& req, Res& res) {
      Respond(
          res,
          [&] {
            const auto body = internal::BodyOrEmpty(req);
            size_t parallelism = internal::SizeParam(req, "parallelism", 4);
            if (body.contains("parallelism")) parallelism = body["parallelism"].get<size_t>();
            return svc.StartPrecompute(parallelism);
          },
          202);
    });
    server_.Get("/api/precompute/status",
                [&svc](const Req&, Res& res) { Respond(res, [&] { return svc.PrecomputeStatus(); }); });

    server_.Get("/api/embeddings/neighbors", [&svc, &cfg](const Req& req, Res& res) {
      Respond(res, [&] {
        const std::string word = internal::StringParam(req, "word");
        if (word.empty()) throw Error(ErrorCode::kContract, "query parameter 'word' is required");
        return svc.Neighbors(word, internal::SizeParam(req, "k", cfg.top_k), internal::StringParam(req, "scope"),
                             internal::StringParam(req, "instance"));
      });
    });
    server_.Post("/api/embeddings/project", [&svc](const Req& req, Res& res) {
      Respond(res, [&] {
        const auto body = internal::BodyOrEmpty(req);
        if (!body.contains("words") || !body["words"].is_array()) {
          throw Error(ErrorCode::kContract, "body needs a 'words' array");
        }
        return svc.Project(body["words"].get<std::vector<std::string>>());
      });
    });

    server_.Get("/api/rules", [&svc](const Req&, Res& res) { Respond(res, [&] { return svc.ListRules(); }); });
    server_.Post("/api/rules", [&svc](const Req& req, Res& res) {
      Respond(res, [&] { return svc.PutRule(nlohmann::json::parse(req.body)); });
    });
    server_.Delete("/api/rules/:rid", [&svc](const Req& req, Res& res) {
      Respond(res, [&] { return svc.DeleteRule(req.path_params.at("rid")); });
    });
    server_.Delete("/api/rules", [&svc](const Req& req, Res& res) {
      Respond(res, [&] {
        const std::string id = internal::StringParam(req, "id");
        if (id.empty()) throw Error(ErrorCode::kContract, "query parameter 'id' is required");
        return svc.DeleteRule(id);
      });
    });
    server_.Post("/api/rules/:rid/apply/:id", [&svc](const Req& req, Res& res) {
      Respond(res, [&] {
        const auto body = internal::BodyOrEmpty(req);
        return svc.ApplyRuleTo(req.path_params.at("rid"), req.path_params.at("id"),
                               body.value("session_id", std::string()));
      });
    });
    server_.Get("/api/sessions/:sid", [&svc](const Req& req, Res& res) {
      Respond(res, [&] { return svc.Session(req.path_params.at("sid")); });
    });

    if (!cfg.ui_dir.empty()) server_.set_mount_point("/", cfg.ui_dir);
  }

  Service& service_;
  httplib::Server server_;
};

// Serves a QaModel over the model wire protocol at path.
inline void MountModelEndpoint(httplib::Server& server, const std::string& path, QaModel& model) {
  server.Post(path, [&model](const httplib::Request& req, httplib::Response& res) {
    internal::Respond(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      if (!body.is_object() || !body.contains("context") || !body.contains("question") ||
          !body["context"].is_string() || !body["question"].is_string()) {
        throw Error(ErrorCode::kContract, "request needs string fields 'context' and 'question'");
      }
      return ModelOutputToJson(model.Predict(body["context"].get<std::string>(), body["question"].get<std::string>()));
    });
  });
}

}  // namespace qaprobe
