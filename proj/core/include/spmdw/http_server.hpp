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

#pragma once

#include <memory>
#include <string>

#include "spmdw/service.hpp"

namespace spmdw {

/// HTTP/1.1 transport for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the bound
  /// port, or -1 when the address is unavailable.
  int bind(const std::string& host, int port);

  /// Serves until stop(). Call after a successful bind().
  void run();
  void wait_until_ready();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits an Authorization header value; empty unless it is "Bearer <token>".
std::string bearer_token(const std::string& authorization);

}  // namespace spmdw
