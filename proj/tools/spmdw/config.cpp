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

#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace spmdw::cli {

using nlohmann::json;

namespace {

std::pair<size_t, size_t> line_col(const std::string& text, size_t byte) {
  size_t line = 1, col = 1;
  for (size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

void parse_listen(ServeConfig& c, const std::string& listen, const std::string& name) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw ConfigError(name + ": listen must be host:port, got '" + listen + "'");
  }
  c.host = listen.substr(0, colon);
  try {
    size_t used = 0;
    c.port = std::stoi(listen.substr(colon + 1), &used);
    if (used != listen.size() - colon - 1 || c.port < 0 || c.port > 65535) throw std::out_of_range("");
  } catch (const std::exception&) {
    throw ConfigError(name + ": bad port in '" + listen + "'");
  }
}

FlowPolicyName policy_name(const std::string& text, const std::string& name) {
  FlowPolicyName p;
  try {
    p = parse_flow_policy_name(text);
  } catch (const std::exception&) {
    throw ConfigError(name + ": unknown policy '" + text + "'");
  }
  if (flow_policy(p).blocking) {
    throw ConfigError(name + ": policy " + text + " is blocking and cannot be served");
  }
  return p;
}

}  // namespace

ServeConfig parse_config(const std::string& text, const std::string& name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte);
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw ConfigError(name + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
  if (!doc.is_object()) throw ConfigError(name + ":1:1: config must be an object");

  static const std::set<std::string> known = {"listen",        "data_dir",    "metadata",
                                              "policy",        "k_sigma",     "deadline_days",
                                              "session_ttl_seconds", "snapshot_every"};
  ServeConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (!known.count(key)) throw ConfigError(name + ": unknown key '" + key + "'");
    }
    if (doc.contains("listen")) parse_listen(c, doc["listen"].get<std::string>(), name);
    if (doc.contains("data_dir")) c.data_dir = doc["data_dir"].get<std::string>();
    if (doc.contains("metadata")) c.metadata = doc["metadata"].get<std::string>();
    if (doc.contains("policy")) c.policy = policy_name(doc["policy"].get<std::string>(), name);
    if (doc.contains("k_sigma")) c.k_sigma = doc["k_sigma"].get<double>();
    if (doc.contains("deadline_days")) c.deadline_days = doc["deadline_days"].get<int>();
    if (doc.contains("session_ttl_seconds")) {
      c.session_ttl = std::chrono::seconds(doc["session_ttl_seconds"].get<std::int64_t>());
    }
    if (doc.contains("snapshot_every")) c.snapshot_every = doc["snapshot_every"].get<int>();
  } catch (const json::type_error& e) {
    throw ConfigError(name + ": " + e.what());
  }
  if (c.k_sigma <= 0) throw ConfigError(name + ": k_sigma must be positive");
  if (c.deadline_days && *c.deadline_days < 0) throw ConfigError(name + ": deadline_days must be >= 0");
  if (c.session_ttl.count() <= 0) throw ConfigError(name + ": session_ttl_seconds must be positive");
  if (c.snapshot_every <= 0) throw ConfigError(name + ": snapshot_every must be positive");
  if (c.data_dir.empty()) throw ConfigError(name + ": data_dir must not be empty");
  return c;
}

ServeConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void apply_env(ServeConfig& config) {
  if (const char* v = std::getenv("SPMDW_LISTEN")) parse_listen(config, v, "SPMDW_LISTEN");
  if (const char* v = std::getenv("SPMDW_DATA_DIR")) config.data_dir = v;
  if (const char* v = std::getenv("SPMDW_POLICY")) config.policy = policy_name(v, "SPMDW_POLICY");
}

}  // namespace spmdw::cli
