// Copyright 2026 The spmdw Authors
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

#include "spmdw/http_server.hpp"

#include <httplib.h>
#include <mutex>
#include <sys/socket.h>

namespace spmdw {

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  std::mutex mutex;
  bool started = false;
  bool stopped = false;
};

std::string bearer_token(const std::string& authorization) {
  static const std::string prefix = "Bearer ";
  if (authorization.size() <= prefix.size() || authorization.compare(0, prefix.size(), prefix) != 0) {
    return {};
  }
  return authorization.substr(prefix.size());
}

HttpServer::HttpServer(Service& service) : impl_(new Impl{service, {}, {}, false, false}) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    for (const auto& [k, v] : req.params) api.query.emplace(k, v);
    api.bearer_token = bearer_token(req.get_header_value("Authorization"));
    api.body = req.body;
    ApiResponse out = impl_->service.handle(api);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  auto& s = impl_->server;
  // No SO_REUSEPORT: a second server on a busy port must fail to bind.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  s.Get(".*", handler);
  s.Post(".*", handler);
  s.Put(".*", handler);
  s.Delete(".*", handler);
  s.Patch(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::run() {
  {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    if (impl_->stopped) return;
    impl_->started = true;
  }
  impl_->server.listen_after_bind();
}

void HttpServer::wait_until_ready() { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  bool started;
  {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    impl_->stopped = true;
    started = impl_->started;
  }
  if (!started) return;
  impl_->server.wait_until_ready();
  impl_->server.stop();
}

}  // namespace spmdw
