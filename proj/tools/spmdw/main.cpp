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

// spmdw: operator and enumerator command-line tool.
//
// Exit codes: 0 success; 1 domain error (unknown ids, BLOCK findings,
// rejected import rows); 2 malformed input or usage; 3 listen address busy.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "config.hpp"
#include "spmdw/analytics.hpp"
#include "spmdw/digest.hpp"
#include "spmdw/error.hpp"
#include "spmdw/flows.hpp"
#include "spmdw/http_server.hpp"
#include "spmdw/seed.hpp"
#include "spmdw/service.hpp"
#include "spmdw/simulator.hpp"
#include "spmdw/value_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spmdw;

namespace {

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kMalformed = 2;
constexpr int kBusy = 3;

struct Exit {
  int code;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MalformedFile, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json(const std::string& path) {
  std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedFile, path + ": " + e.what());
  }
}

/// Seeded fixture when `path` is empty; data sets without deadline_days get
/// `deadline_days` when given.
std::shared_ptr<const Metadata> load_metadata(const std::string& path, FlowPolicyName policy,
                                              std::optional<int> deadline_days = std::nullopt) {
  if (path.empty()) {
    SeedOptions opts;
    if (policy == FlowPolicyName::Phase1B) opts.entry_level = OrgLevel::AdminCity;
    if (deadline_days) opts.deadline_days = *deadline_days;
    return std::make_shared<const Metadata>(seed_metadata(opts));
  }
  json doc = read_json(path);
  if (deadline_days && doc.contains("dataSets") && doc["dataSets"].is_array()) {
    for (auto& ds : doc["dataSets"]) {
      if (ds.is_object() && !ds.contains("deadline_days")) ds["deadline_days"] = *deadline_days;
    }
  }
  try {
    return std::make_shared<const Metadata>(metadata_from_json(doc));
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedFile, path + ": " + e.what());
  }
}

/// Malformed-input codes exit 2, everything else 1.
int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::MalformedFile:
    case ErrorCode::MalformedSchedule:
    case ErrorCode::MalformedRequest:
    case ErrorCode::MalformedRecord:
    case ErrorCode::MalformedPeriodKey:
    case ErrorCode::InvalidMetadata:
      return kMalformed;
    default:
      return kDomain;
  }
}

void write_stdout(const std::string& text) {
  std::cout << text;
  std::cout.flush();
}

// serve

int run_serve(const std::string& config_path, const std::string& listen_override) {
  cli::ServeConfig config;
  try {
    config = cli::load_config(config_path);
    cli::apply_env(config);
    if (!listen_override.empty()) {
      json patch = {{"listen", listen_override}};
      auto over = cli::parse_config(patch.dump(), "--listen");
      config.host = over.host;
      config.port = over.port;
    }
  } catch (const cli::ConfigError& e) {
    std::cerr << "spmdw serve: " << e.what() << "\n";
    return kMalformed;
  }

  std::shared_ptr<const Metadata> md;
  std::unique_ptr<Store> store;
  try {
    md = load_metadata(config.metadata, config.policy, config.deadline_days);
    StoreOptions so;
    so.snapshot_every = config.snapshot_every;
    store = std::make_unique<Store>(config.data_dir, so);
  } catch (const std::exception& e) {
    std::cerr << "spmdw serve: " << e.what() << "\n";
    return kMalformed;
  }

  WorkflowConfig wc;
  wc.k_sigma = config.k_sigma;
  ServiceOptions options;
  options.session_ttl = config.session_ttl;
  Service service(md, *store, flow_policy(config.policy), wc, options);
  HttpServer server(service);
  int port = server.bind(config.host, config.port);
  if (port < 0) {
    std::cerr << "spmdw serve: cannot listen on " << config.host << ":" << config.port << "\n";
    return kBusy;
  }

  std::signal(SIGINT, SIG_DFL);
  std::signal(SIGTERM, SIG_DFL);
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });

  std::cout << "listening http://" << config.host << ":" << port << " policy "
            << to_string(config.policy) << std::endl;
  server.run();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cerr << "spmdw serve: stopped\n";
  return kOk;
}

// validate

int run_validate(const std::string& metadata_path, const std::string& values_path, double k_sigma) {
  auto md = load_metadata(metadata_path, FlowPolicyName::Phase2C);
  auto findings = audit_values(*md, read_file(values_path), k_sigma);
  std::string out;
  for (const auto& f : findings) out += to_json(f).dump() + "\n";
  out += std::to_string(findings.size()) + " findings\n";
  write_stdout(out);
  return has_block(findings) ? kDomain : kOk;
}

// report

struct ReportArgs {
  std::string indicator, org, period, metadata, data_dir, values, min_status = "VERIFIED", format = "csv";
  std::string policy = "PHASE2_C";
};

int run_report(const ReportArgs& a) {
  auto md = load_metadata(a.metadata, parse_flow_policy_name(a.policy));
  std::unique_ptr<Store> store;
  if (!a.data_dir.empty()) {
    store = std::make_unique<Store>(a.data_dir);
  } else {
    store = std::make_unique<Store>();
  }
  if (!a.values.empty()) import_values(*store, *md, read_file(a.values), ImportMode::Strict, "report");

  std::map<std::string, std::string> params = {
      {"rows", "ORG_UNIT"},          {"columns", "PERIOD"},
      {"row_items", a.org},          {"column_items", a.period},
      {"filter", "INDICATOR:" + a.indicator}, {"min_status", a.min_status},
      {"expand_children", "true"}};
  AnalyticsQuery q = analytics_query_from_params(params);
  AnalyticsTable table = run_analytics(*md, *store->snapshot(), q);
  write_stdout(a.format == "json" ? to_json(table).dump() + "\n" : render_csv(table));
  return kOk;
}

// simulate-sync

int run_simulate(const std::string& schedule_path, std::uint64_t seed, const std::string& metadata,
                 const std::string& policy) {
  FlowPolicyName p = parse_flow_policy_name(policy);
  auto md = load_metadata(metadata, p);
  Schedule schedule = load_schedule_file(schedule_path, *md);
  SimResult r = simulate(schedule, md, flow_policy(p), seed);
  write_stdout(format_metrics(r.metrics) + "\n");
  return kOk;
}

// import / export

int run_import(const std::string& data_dir, const std::string& metadata, const std::string& file,
               const std::string& mode, const std::string& policy) {
  auto md = load_metadata(metadata, parse_flow_policy_name(policy));
  Store store(data_dir);
  ImportReport r = import_values(store, *md, read_file(file), parse_import_mode(mode));
  write_stdout(to_json(r).dump() + "\n");
  return r.rejected.empty() ? kOk : kDomain;
}

struct ExportArgs {
  std::string data_dir, metadata, org, from, to, min_status = "DRAFT", ministry, part = "records";
  std::string policy = "PHASE2_C";
};

int run_export(const ExportArgs& a) {
  auto md = load_metadata(a.metadata, parse_flow_policy_name(a.policy));
  Store store(a.data_dir);
  auto snap = store.snapshot();
  if (!a.ministry.empty()) {
    BridgeExport b = ministry_bridge_export(*snap, *md, parse_period(a.ministry));
    write_stdout(a.part == "manifest" ? b.manifest_csv : b.records_csv);
    return kOk;
  }
  ExportFilter f;
  f.org_unit_id = a.org.empty() ? md->tree().root().id : a.org;
  if (!a.from.empty()) f.from = parse_period(a.from);
  if (!a.to.empty()) f.to = parse_period(a.to);
  f.min_status = parse_status(a.min_status);
  write_stdout(export_values(*snap, *md, f));
  return kOk;
}

// seed

int run_seed(const std::string& out_dir, const std::vector<std::string>& periods,
             const std::string& policy, std::uint64_t seed) {
  FlowPolicyName p = parse_flow_policy_name(policy);
  auto md = load_metadata("", p);
  fs::create_directories(out_dir);
  {
    std::ofstream meta(fs::path(out_dir) / "metadata.json");
    meta << metadata_to_json(*md).dump(2) << "\n";
  }
  Store store;
  Workflow wf(md, store, flow_policy(p));
  for (size_t i = 0; i < periods.size(); ++i) {
    Period period = parse_period(periods[i]);
    Timestamp at = std::chrono::sys_seconds(period.last_day() + std::chrono::days(2));
    for (const auto& sub : generate_submissions(*md, period, seed + i)) {
      wf.submit_form(sub, md->user(seed_pic_id(sub.org_unit_id)), at);
    }
  }
  ExportFilter all;
  all.org_unit_id = md->tree().root().id;
  std::ofstream values(fs::path(out_dir) / "values.csv");
  values << export_values(*store.snapshot(), *md, all);
  std::cerr << "wrote " << (fs::path(out_dir) / "metadata.json").string() << " and "
            << (fs::path(out_dir) / "values.csv").string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spmdw: SPM public-health data warehouse"};
  app.require_subcommand(1);

  std::string config_path, listen;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", config_path, "Config file (JSON)")->required();
  serve->add_option("--listen", listen, "host:port, overrides the config");

  std::string metadata, values;
  double k_sigma = kDefaultKSigma;
  auto* validate = app.add_subcommand("validate", "Run the 4C checks over a value file");
  validate->add_option("--metadata", metadata, "Metadata JSON (default: seeded fixture)");
  validate->add_option("--values", values, "ValueRow CSV")->required();
  validate->add_option("--k-sigma", k_sigma, "Deviation threshold");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Print an indicator grid for an org unit and its children");
  report->add_option("--indicator", report_args.indicator)->required();
  report->add_option("--org", report_args.org)->required();
  report->add_option("--period", report_args.period)->required();
  report->add_option("--metadata", report_args.metadata);
  report->add_option("--data-dir", report_args.data_dir, "Store directory");
  report->add_option("--values", report_args.values, "ValueRow CSV loaded into a scratch store");
  report->add_option("--min-status", report_args.min_status);
  report->add_option("--format", report_args.format)->check(CLI::IsMember({"csv", "json"}));
  report->add_option("--policy", report_args.policy);

  std::string schedule, sim_policy = "PHASE2_C";
  std::uint64_t seed = 1;
  auto* sim = app.add_subcommand("simulate-sync", "Replay a sync schedule and print metrics");
  sim->add_option("--schedule", schedule)->required();
  sim->add_option("--seed", seed);
  sim->add_option("--metadata", metadata);
  sim->add_option("--policy", sim_policy);

  std::string fixture;
  auto* flows = app.add_subcommand("compare-flows", "Blocking hops per flow policy");
  flows->add_option("--fixture", fixture)->required();

  std::string data_dir, file, mode = "STRICT", policy = "PHASE2_C";
  auto* import = app.add_subcommand("import", "Load a ValueRow CSV into a store");
  import->add_option("--data-dir", data_dir)->required();
  import->add_option("--file", file)->required();
  import->add_option("--mode", mode)->check(CLI::IsMember({"STRICT", "SKIP_BAD"}));
  import->add_option("--metadata", metadata);
  import->add_option("--policy", policy);

  ExportArgs export_args;
  auto* exp = app.add_subcommand("export", "Write values (or the ministry bridge file) to stdout");
  exp->add_option("--data-dir", export_args.data_dir)->required();
  exp->add_option("--metadata", export_args.metadata);
  exp->add_option("--org", export_args.org);
  exp->add_option("--from", export_args.from);
  exp->add_option("--to", export_args.to);
  exp->add_option("--min-status", export_args.min_status);
  exp->add_option("--ministry", export_args.ministry, "Bridge file for this period");
  exp->add_option("--part", export_args.part)->check(CLI::IsMember({"records", "manifest"}));
  exp->add_option("--policy", export_args.policy);

  std::string out_dir;
  std::vector<std::string> periods = {"2025-01"};
  auto* seed_cmd = app.add_subcommand("seed", "Write the seeded metadata and generated values");
  seed_cmd->add_option("--out", out_dir)->required();
  seed_cmd->add_option("--period", periods, "Periods to generate");
  seed_cmd->add_option("--seed", seed);
  seed_cmd->add_option("--policy", policy);

  std::string password;
  int iterations = kDefaultPbkdf2Iterations;
  auto* hash = app.add_subcommand("hash-password", "Print a credential for a metadata user entry");
  hash->add_option("--password", password)->required();
  hash->add_option("--iterations", iterations);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kMalformed;
  }

  try {
    if (*serve) return run_serve(config_path, listen);
    if (*validate) return run_validate(metadata, values, k_sigma);
    if (*report) return run_report(report_args);
    if (*sim) return run_simulate(schedule, seed, metadata, sim_policy);
    if (*flows) {
      write_stdout(render_flows_csv(compare_flows(read_json(fixture))));
      return kOk;
    }
    if (*import) return run_import(data_dir, metadata, file, mode, policy);
    if (*exp) return run_export(export_args);
    if (*seed_cmd) return run_seed(out_dir, periods, policy, seed);
    if (*hash) {
      write_stdout(hash_password(password, iterations) + "\n");
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "spmdw: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "spmdw: " << e.what() << "\n";
    return kDomain;
  }
  return kMalformed;
}
