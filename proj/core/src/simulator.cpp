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

#include "spmdw/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "spmdw/error.hpp"
#include "spmdw/seed.hpp"

namespace spmdw {

using nlohmann::json;

namespace {

constexpr const char* kDefaultServerTime = "2025-02-05T00:00:00Z";

[[noreturn]] void bad_schedule(const std::string& msg) {
  throw Error(ErrorCode::MalformedSchedule, msg);
}

double rate(const json& net, const char* key, double max) {
  auto it = net.find(key);
  if (it == net.end()) return 0;
  if (!it->is_number()) bad_schedule(std::string("network.") + key + " must be a number");
  double v = *it;
  if (!(v >= 0 && v <= max)) {
    bad_schedule(std::string("network.") + key + " must lie in [0, " + std::to_string(max) + "]");
  }
  return v;
}

bool roll(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace

Schedule parse_schedule(const json& doc, const Metadata& md) {
  if (!doc.is_object()) bad_schedule("schedule must be an object");
  Schedule s;
  try {
    s.server_time = parse_timestamp(doc.value("server_time", std::string(kDefaultServerTime)));
  } catch (const std::exception&) {
    bad_schedule("server_time must be an ISO-8601 UTC timestamp");
  }
  if (auto net = doc.find("network"); net != doc.end()) {
    if (!net->is_object()) bad_schedule("network must be an object");
    s.network.drop_rate = rate(*net, "drop_rate", 0.9);
    s.network.duplicate_rate = rate(*net, "duplicate_rate", 1.0);
    s.network.reorder_rate = rate(*net, "reorder_rate", 1.0);
    if (auto d = net->find("max_delay"); d != net->end()) {
      if (!d->is_number_integer() || d->get<int>() < 1) bad_schedule("network.max_delay must be >= 1");
      s.network.max_delay = *d;
    }
  }

  auto clients = doc.find("clients");
  if (clients == doc.end() || !clients->is_array() || clients->empty()) {
    bad_schedule("clients must be a non-empty array");
  }
  std::map<std::string, const User*> users;
  for (const auto& c : *clients) {
    if (!c.is_object() || !c.contains("id") || !c["id"].is_string() || !c.contains("user") ||
        !c["user"].is_string()) {
      bad_schedule("each client needs string 'id' and 'user'");
    }
    ScheduleClient sc{c["id"], c["user"]};
    if (sc.id.empty()) bad_schedule("client id must not be empty");
    if (users.count(sc.id)) bad_schedule("duplicate client '" + sc.id + "'");
    if (!md.has_user(sc.user)) bad_schedule("client '" + sc.id + "' names unknown user '" + sc.user + "'");
    users[sc.id] = &md.user(sc.user);
    s.clients.push_back(std::move(sc));
  }

  auto events = doc.find("events");
  if (events == doc.end() || !events->is_array()) bad_schedule("events must be an array");
  size_t index = 0;
  for (const auto& e : *events) {
    std::string where = "events[" + std::to_string(index++) + "]";
    if (!e.is_object()) bad_schedule(where + " must be an object");
    auto t = e.find("time");
    if (t == e.end() || !t->is_number_integer() || t->get<int>() < 0) {
      bad_schedule(where + ": time must be a non-negative integer");
    }
    auto c = e.find("client");
    if (c == e.end() || !c->is_string() || !users.count(c->get<std::string>())) {
      bad_schedule(where + ": unknown client");
    }
    auto a = e.find("action");
    if (a == e.end() || !a->is_string()) bad_schedule(where + ": action must be a string");
    ScheduleEvent ev{t->get<int>(), *c, *a, e};
    if (ev.action == "submit") {
      if (!e.contains("dataset_id") || !e["dataset_id"].is_string() ||
          !md.has_dataset(e["dataset_id"].get<std::string>())) {
        bad_schedule(where + ": submit needs a known dataset_id");
      }
      if (!e.contains("period") || !e["period"].is_string()) bad_schedule(where + ": submit needs a period");
      try {
        parse_period(e["period"].get<std::string>());
      } catch (const Error& err) {
        bad_schedule(where + ": " + err.what());
      }
      if (e.contains("values") && !e["values"].is_object()) bad_schedule(where + ": values must be an object");
      const User* u = users[ev.client];
      if (!e.contains("org_unit_id") && u->scope_org_unit_ids.empty()) {
        bad_schedule(where + ": user has no unit to submit for");
      }
    } else if (ev.action == "review") {
      try {
        review_request_from_json(e.value("review", json()));
      } catch (const Error& err) {
        bad_schedule(where + ": " + err.what());
      }
    } else if (ev.action != "disconnect" && ev.action != "reconnect") {
      bad_schedule(where + ": unknown action '" + ev.action + "'");
    }
    s.events.push_back(std::move(ev));
  }
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const ScheduleEvent& x, const ScheduleEvent& y) { return x.time < y.time; });
  return s;
}

Schedule load_schedule_file(const std::string& path, const Metadata& md) {
  std::ifstream in(path);
  if (!in) bad_schedule("cannot open schedule '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc = json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) bad_schedule("schedule '" + path + "' is not valid JSON");
  return parse_schedule(doc, md);
}

json to_json(const Schedule& s) {
  json clients = json::array();
  for (const auto& c : s.clients) clients.push_back({{"id", c.id}, {"user", c.user}});
  json events = json::array();
  for (const auto& e : s.events) events.push_back(e.body);
  return {{"server_time", format_timestamp(s.server_time)},
          {"network",
           {{"drop_rate", s.network.drop_rate},
            {"duplicate_rate", s.network.duplicate_rate},
            {"reorder_rate", s.network.reorder_rate},
            {"max_delay", s.network.max_delay}}},
          {"clients", std::move(clients)},
          {"events", std::move(events)}};
}

std::string format_metrics(const SimMetrics& m) {
  return "lost=" + std::to_string(m.lost_records) +
         " duplicates=" + std::to_string(m.duplicate_applies) +
         " conflicts=" + std::to_string(m.conflicts) +
         " convergence_round=" + std::to_string(m.convergence_round);
}

SimResult simulate(const Schedule& schedule, std::shared_ptr<const Metadata> md, FlowPolicy policy,
                   std::uint64_t seed, int max_ticks) {
  Store store;
  Workflow workflow(md, store, std::move(policy));
  SyncServer server(workflow);
  const Timestamp now = schedule.server_time;
  const NetworkModel& net = schedule.network;

  std::mt19937_64 net_rng(seed);
  std::mt19937_64 content_rng(seed ^ 0x5bd1e9955bd1e995ULL);

  struct Node {
    ClientState state;
    const User* user;
    bool online = true;
  };
  std::vector<Node> nodes;
  std::map<std::string, size_t> node_index;
  for (const auto& c : schedule.clients) {
    node_index[c.id] = nodes.size();
    Node n{ClientState{}, &md->user(c.user)};
    n.state.client_id = c.id;
    n.state.user_id = c.user;
    nodes.push_back(std::move(n));
  }

  struct Flight {
    int due;
    size_t node;
    std::vector<ChangeRecord> batch;
  };
  std::vector<Flight> flights;

  SimResult result;
  std::set<std::pair<std::string, std::int64_t>> received;

  auto deliver = [&](size_t node, const std::vector<ChangeRecord>& batch) {
    Node& n = nodes[node];
    std::vector<Ack> acks = server.push(batch, *n.user, now);
    for (size_t i = 0; i < acks.size(); ++i) {
      if (acks[i].status == AckStatus::Duplicate) continue;
      if (received.insert({acks[i].client_id, acks[i].client_seq}).second) {
        result.receipts.push_back({batch[i], n.user->id});
      }
    }
    if (n.online && !roll(net_rng, net.drop_rate)) apply_acks(n.state, acks);
  };

  int last_event = schedule.events.empty() ? 0 : schedule.events.back().time;
  size_t next_event = 0;
  for (int t = 0; t < max_ticks; ++t) {
    for (; next_event < schedule.events.size() && schedule.events[next_event].time == t; ++next_event) {
      const ScheduleEvent& ev = schedule.events[next_event];
      Node& n = nodes[node_index[ev.client]];
      if (ev.action == "disconnect") {
        n.online = false;
        continue;
      }
      if (ev.action == "reconnect") {
        n.online = true;
        continue;
      }
      json payload;
      if (ev.action == "submit") {
        const DataSet& ds = md->dataset(ev.body["dataset_id"].get<std::string>());
        std::string unit = ev.body.value("org_unit_id", n.user->scope_org_unit_ids.empty()
                                                            ? std::string()
                                                            : n.user->scope_org_unit_ids.front());
        Period period = parse_period(ev.body["period"].get<std::string>());
        FormSubmission form = generate_form(*md, ds, unit, period, content_rng);
        if (ev.body.contains("values")) {
          form.values.clear();
          for (const auto& [el, v] : ev.body["values"].items()) {
            if (!v.is_number()) bad_schedule("value for '" + el + "' must be a number");
            form.values[el] = v.get<double>();
          }
        }
        payload = submit_payload(form);
      } else {
        payload = review_payload(review_request_from_json(ev.body["review"]));
      }
      try {
        ChangeRecord r = enqueue_offline(n.state, *md, std::move(payload));
        result.enqueued.push_back({std::move(r), n.user->id});
        ++result.metrics.records;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::LocalQualityBlock) {
          bad_schedule("event at time " + std::to_string(t) + ": " + e.what());
        }
        ++result.metrics.local_blocks;
      }
    }
    bool schedule_done = next_event == schedule.events.size() && t > last_event;
    if (schedule_done) {
      for (auto& n : nodes) n.online = true;
    }

    std::vector<Flight> due;
    auto split = std::stable_partition(flights.begin(), flights.end(),
                                       [&](const Flight& f) { return f.due != t; });
    due.assign(std::make_move_iterator(split), std::make_move_iterator(flights.end()));
    flights.erase(split, flights.end());
    for (const auto& f : due) deliver(f.node, f.batch);

    for (size_t i = 0; i < nodes.size(); ++i) {
      Node& n = nodes[i];
      if (!n.online || n.state.queue.empty()) continue;
      if (roll(net_rng, net.drop_rate)) continue;
      int copies = roll(net_rng, net.duplicate_rate) ? 2 : 1;
      for (int c = 0; c < copies; ++c) {
        if (roll(net_rng, net.reorder_rate)) {
          int delay = std::uniform_int_distribution<int>(1, net.max_delay)(net_rng);
          flights.push_back({t + delay, i, n.state.queue});
        } else {
          deliver(i, n.state.queue);
        }
      }
    }

    std::int64_t head = store.snapshot()->head_seq();
    for (auto& n : nodes) {
      if (!n.online || !n.state.queue.empty() || n.state.cursor >= head) continue;
      PullResult pull = server.pull(n.state.cursor, *n.user);
      if (!roll(net_rng, net.drop_rate)) apply_pull(n.state, pull);
    }

    if (schedule_done && flights.empty()) {
      head = store.snapshot()->head_seq();
      bool quiet = std::all_of(nodes.begin(), nodes.end(), [&](const Node& n) {
        return n.state.queue.empty() && n.state.cursor == head;
      });
      if (quiet) {
        result.metrics.convergence_round = t;
        break;
      }
    }
  }

  auto state = store.snapshot();
  SimMetrics& m = result.metrics;
  for (const auto& e : result.enqueued) {
    if (!state->seen.count({e.record.client_id, e.record.client_seq})) ++m.lost_records;
  }
  std::map<std::pair<std::string, std::int64_t>, int> applied;
  for (const auto& c : state->changes) {
    if (!c.origin_client_id.empty()) ++applied[{c.origin_client_id, c.origin_client_seq}];
  }
  for (const auto& [k, n] : applied) m.duplicate_applies += n - 1;
  m.conflicts = static_cast<std::int64_t>(state->tickets.size());
  for (const auto& [k, seen] : state->seen) {
    if (seen.ack == "REJECTED") ++m.rejected;
  }

  m.converged = m.convergence_round >= 0;
  for (const auto& n : nodes) {
    std::map<ValueKey, DataValue> visible;
    for (const auto& [k, v] : state->values) {
      const DataSet* ds = md->dataset_of(v.element_id);
      if (ds && unit_in_user_scope(*md, *n.user, v.org_unit_id) && n.user->dataset_in_scope(ds->id)) {
        visible.emplace(k, v);
      }
    }
    if (visible != n.state.replica) m.converged = false;
    result.clients.push_back(n.state);
  }
  result.final_state = std::move(state);
  return result;
}

json random_schedule(const Metadata& md, std::uint64_t seed, const RandomScheduleOptions& options) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  std::vector<const User*> pics;
  for (const auto& u : md.parts().users) {
    if (u.role == Role::EnumeratorPic && !u.scope_org_unit_ids.empty()) pics.push_back(&u);
  }
  std::sort(pics.begin(), pics.end(), [](const User* a, const User* b) { return a->id < b->id; });
  if (pics.empty()) bad_schedule("metadata has no enumerators");
  for (size_t i = pics.size(); i > 1; --i) {
    std::swap(pics[i - 1], pics[static_cast<size_t>(uniform(0, static_cast<int>(i) - 1))]);
  }
  int n_clients = std::min<int>(uniform(options.min_clients, options.max_clients),
                                static_cast<int>(pics.size()));

  json doc;
  doc["server_time"] = kDefaultServerTime;
  doc["network"] = {{"drop_rate", real(0, 0.4)},
                    {"duplicate_rate", real(0, 0.3)},
                    {"reorder_rate", real(0, 0.3)},
                    {"max_delay", uniform(1, 5)}};
  doc["clients"] = json::array();
  json events = json::array();
  const char* periods[] = {"2025-01", "2025-02", "2025-03"};
  for (int c = 0; c < n_clients; ++c) {
    const User* user = pics[static_cast<size_t>(c)];
    std::string cid = "c" + std::to_string(c + 1);
    doc["clients"].push_back({{"id", cid}, {"user", user->id}});
    const OrgUnit& unit = md.tree().unit(user->scope_org_unit_ids.front());
    std::vector<const DataSet*> datasets;
    for (const auto& ds : md.parts().datasets) {
      if (ds.entry_level == unit.level && ds.period_type == PeriodType::Month &&
          user->dataset_in_scope(ds.id)) {
        datasets.push_back(&ds);
      }
    }
    if (datasets.empty()) continue;

    int windows = uniform(0, 2);
    for (int w = 0; w < windows; ++w) {
      int a = uniform(0, options.horizon - 1);
      int b = uniform(a + 1, options.horizon);
      events.push_back({{"time", a}, {"client", cid}, {"action", "disconnect"}});
      events.push_back({{"time", b}, {"client", cid}, {"action", "reconnect"}});
    }
    int forms = uniform(1, options.max_forms_per_client);
    std::vector<int> times;
    for (int f = 0; f < forms; ++f) times.push_back(uniform(0, options.horizon));
    std::sort(times.begin(), times.end());
    std::vector<std::pair<std::string, std::string>> done;
    for (int time : times) {
      std::pair<std::string, std::string> form;
      if (!done.empty() && real(0, 1) < 0.25) {
        form = done[static_cast<size_t>(uniform(0, static_cast<int>(done.size()) - 1))];
      } else {
        form = {datasets[static_cast<size_t>(uniform(0, static_cast<int>(datasets.size()) - 1))]->id,
                periods[uniform(0, 2)]};
        done.push_back(form);
      }
      events.push_back({{"time", time},
                        {"client", cid},
                        {"action", "submit"},
                        {"dataset_id", form.first},
                        {"period", form.second}});
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const json& a, const json& b) {
    return a["time"].get<int>() < b["time"].get<int>();
  });
  doc["events"] = std::move(events);
  return doc;
}

}  // namespace spmdw
