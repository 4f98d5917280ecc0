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

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "spmdw/analytics.hpp"
#include "spmdw/auth.hpp"
#include "spmdw/error.hpp"
#include "spmdw/sync.hpp"
#include "spmdw/workflow.hpp"

namespace spmdw {

struct ApiRequest {
  std::string method;  // GET, POST, ...
  std::string path;
  std::map<std::string, std::string> query;
  std::string bearer_token;  // empty when anonymous
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct ServiceOptions {
  std::chrono::seconds session_ttl{8 * 3600};
  Clock clock;  // defaults to the system clock
};

/// Transport-independent request dispatcher. Every response body is JSON
/// (errors as {"error": {"code", "message", "details"}}) except the CSV and
/// JSONL exports. Thread-safe.
class Service {
 public:
  /// Throws Error(InvalidArgument) for a blocking flow policy.
  Service(std::shared_ptr<const Metadata> metadata, Store& store, FlowPolicy policy,
          WorkflowConfig config = {}, ServiceOptions options = {});

  ApiResponse handle(const ApiRequest& request);

  Workflow& workflow() { return workflow_; }
  SyncServer& sync() { return sync_; }
  SessionTable& sessions() { return sessions_; }

  /// Every (method, path) the service routes.
  static const std::vector<std::pair<std::string, std::string>>& routes();

 private:
  struct Caller;
  using Handler = ApiResponse (Service::*)(const ApiRequest&, const Caller&);

  ApiResponse post_auth(const ApiRequest& req, const Caller& caller);
  ApiResponse get_metadata(const ApiRequest& req, const Caller& caller);
  ApiResponse post_datavaluesets(const ApiRequest& req, const Caller& caller);
  ApiResponse post_reviews(const ApiRequest& req, const Caller& caller);
  ApiResponse get_analytics(const ApiRequest& req, const Caller& caller);
  ApiResponse post_sync_push(const ApiRequest& req, const Caller& caller);
  ApiResponse get_sync_pull(const ApiRequest& req, const Caller& caller);
  ApiResponse get_sync_conflicts(const ApiRequest& req, const Caller& caller);
  ApiResponse post_sync_resolve(const ApiRequest& req, const Caller& caller);
  ApiResponse get_scorecard(const ApiRequest& req, const Caller& caller);
  ApiResponse get_export_values(const ApiRequest& req, const Caller& caller);
  ApiResponse get_export_ministry(const ApiRequest& req, const Caller& caller);
  ApiResponse get_export_transitions(const ApiRequest& req, const Caller& caller);

  Workflow workflow_;
  SyncServer sync_;
  SessionTable sessions_;
};

/// Metadata document restricted to what `user` may see: their scoped
/// subtrees (parents outside scope become null), data sets in scope with
/// their elements, programs and indicators, and the user's own record.
nlohmann::json scoped_metadata_json(const Metadata& md, const User& user);

/// The analytics query encoded in request parameters: rows, columns,
/// row_items, column_items (comma separated), filter=DIM:id, min_status,
/// expand_children. Throws Error(InvalidQuery).
AnalyticsQuery analytics_query_from_params(const std::map<std::string, std::string>& params);

ApiResponse error_response(const Error& e);

}  // namespace spmdw
