// Copyright 2026 The LEGIT Toolkit Authors
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

#include "legit/annotation_http.h"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "legit/error.h"

namespace legit {

using nlohmann::json;

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnauthorized: return 401;
    case ErrorCode::kDisqualified: return 403;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kNoOpenRound:
    case ErrorCode::kNotReserved:
    case ErrorCode::kAlreadyLabeled:
    case ErrorCode::kRoundOpen: return 409;
    case ErrorCode::kIo: return 500;
    default: return 400;
  }
}

struct AnnotationHttpServer::Impl {
  AnnotationService& service;
  std::string admin_token;
  httplib::Server server;
  std::thread thread;

  Impl(AnnotationService& s, std::string admin) : service(s), admin_token(std::move(admin)) {
    Routes();
  }

  static void SendJson(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void SendError(httplib::Response& res, ErrorCode code, const std::string& message) {
    SendJson(res, {{"error", ErrorCodeName(code)}, {"message", message}}, HttpStatusFor(code));
  }

  template <typename Fn>
  auto Guard(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        SendError(res, e.code(), e.what());
      } catch (const json::exception& e) {
        SendError(res, ErrorCode::kFormatError, e.what());
      }
    };
  }

  static std::string Token(const httplib::Request& req) {
    const std::string auth = req.get_header_value("Authorization");
    if (auth.rfind("Bearer ", 0) == 0) return auth.substr(7);
    return req.get_param_value("token");
  }

  void CheckAdmin(const httplib::Request& req) const {
    if (!admin_token.empty() && req.get_header_value("X-Admin-Token") != admin_token) {
      throw Error(ErrorCode::kUnauthorized, "admin token required");
    }
  }

  static json RoundJson(const RoundInfo& r) {
    return {{"round", r.index}, {"prior1", ToJson(r.prior1)}, {"prior2", ToJson(r.prior2)},
            {"closed", r.closed}, {"pairs", r.pairs}};
  }

  void Routes() {
    server.Post("/session", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      SendJson(res, {{"token", service.CreateSession(body.at("annotator").get<std::string>())}});
    }));
    server.Get("/batch", Guard([this](const httplib::Request& req, httplib::Response& res) {
      json items = json::array();
      for (const auto& item : service.GetBatch(Token(req))) {
        items.push_back({{"id", item.id}, {"image1", item.image1}, {"image2", item.image2}});
      }
      SendJson(res, {{"items", items}});
    }));
    server.Post("/label", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      const LabelAck ack = service.SubmitLabel(Token(req), body.at("item").get<std::string>(),
                                               ParseLabel(body.at("label").get<std::string>()));
      SendJson(res, {{"completed", ack.completed},
                     {"status", ack.disqualified ? "disqualified" : "active"}});
    }));
    server.Post("/admin/round/advance",
                Guard([this](const httplib::Request& req, httplib::Response& res) {
                  CheckAdmin(req);
                  SendJson(res, RoundJson(service.AdvanceRound()));
                }));
    server.Post("/admin/round/close",
                Guard([this](const httplib::Request& req, httplib::Response& res) {
                  CheckAdmin(req);
                  SendJson(res, RoundJson(service.CloseRound()));
                }));
    server.Get("/admin/export", Guard([this](const httplib::Request& req, httplib::Response& res) {
      CheckAdmin(req);
      SendJson(res, {{"annotations", service.ExportJsonl()}, {"stats", service.ExportStats()}});
    }));
    server.Get(R"(/img/([0-9A-Za-z_-]+)/([12])\.png)",
               Guard([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string png =
                     service.ItemImagePng(req.matches[1].str(), std::stoi(req.matches[2].str()));
                 res.set_content(png, "image/png");
               }));
  }
};

AnnotationHttpServer::AnnotationHttpServer(AnnotationService& service, std::string admin_token)
    : impl_(std::make_unique<Impl>(service, std::move(admin_token))) {}

AnnotationHttpServer::~AnnotationHttpServer() { Stop(); }

int AnnotationHttpServer::Start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void AnnotationHttpServer::Run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void AnnotationHttpServer::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace legit
