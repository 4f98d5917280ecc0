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

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "spmdw/metadata.hpp"
#include "spmdw/quality.hpp"
#include "spmdw/store.hpp"

namespace spmdw {

/// How data flows from entry to the province.
///  CURRENT_A  legacy gradual system: subdistrict entry, each level waits
///             for the one below (blocking).
///  PHASE1_B   the administrative-city suboffice enters directly.
///  PHASE2_C   district/subdistrict entry, suboffice and department review
///             concurrently without holding the data back.
enum class FlowPolicyName { CurrentA, Phase1B, Phase2C };

std::string_view to_string(FlowPolicyName n);
FlowPolicyName parse_flow_policy_name(std::string_view text);

struct FlowPolicy {
  FlowPolicyName name = FlowPolicyName::Phase2C;
  std::vector<OrgLevel> entry_levels;
  /// Roles that may VERIFY or REJECT, lowest office first. Only the last
  /// role may VALIDATE.
  std::vector<Role> verify_roles;
  bool blocking = false;

  bool allows_entry_at(OrgLevel level) const;
};

FlowPolicy flow_policy(FlowPolicyName name);

enum class ReviewAction { Verify, Validate, Reject, Publish };

std::string_view to_string(ReviewAction a);
ReviewAction parse_review_action(std::string_view text);

/// Exactly the actions review()/publish() accept for a form in `status`
/// reviewed by `role` under `policy` (data-dependent checks aside).
std::set<ReviewAction> legal_transitions(Status status, Role role, const FlowPolicy& policy);

struct WorkflowConfig {
  double k_sigma = kDefaultKSigma;
  int history_window = 12;  // prior periods consulted for deviation checks
};

struct FormSubmission {
  std::string dataset_id;
  std::string org_unit_id;
  std::string period;
  std::string program_id;  // the reporting program; must own every element
  std::map<std::string, double> values;
  std::map<std::string, std::string> justifications;
};

nlohmann::json to_json(const FormSubmission& s);
/// Throws Error(MalformedRequest).
FormSubmission form_submission_from_json(const nlohmann::json& j);

struct SubmitResult {
  FormKey subject;
  std::int64_t form_version = 0;
  std::map<std::string, std::int64_t> versions;  // per element
  std::vector<QualityFinding> flags;             // non-blocking findings
  Transition transition;
};

nlohmann::json to_json(const SubmitResult& r);

struct ReviewRequest {
  FormKey subject;
  ReviewAction action = ReviewAction::Verify;
  std::string reason;
  std::map<std::string, std::string> justifications;  // element -> text
  std::optional<std::int64_t> expected_version;       // compare-and-set
};

nlohmann::json to_json(const ReviewRequest& r);
ReviewRequest review_request_from_json(const nlohmann::json& j);

/// Where a write came from, recorded on its change-log entry.
struct ChangeOrigin {
  std::string client_id;
  std::int64_t client_seq = 0;
};

/// The data lifecycle: entry, submission, verification, validation,
/// rejection and publication of form instances.
class Workflow {
 public:
  Workflow(std::shared_ptr<const Metadata> metadata, Store& store, FlowPolicy policy,
           WorkflowConfig config = {});

  /// Throws ScopeDenied, RoleDenied, WrongLevel, IllegalTransition,
  /// ForeignElement, BlockedByQuality (details.findings), Unknown*.
  SubmitResult submit_form(const FormSubmission& submission, const User& actor, Timestamp at);

  /// VERIFY / VALIDATE / REJECT, or PUBLISH. Throws IllegalTransition,
  /// RoleDenied, ScopeDenied, MissingReason, UnjustifiedDeviation.
  Transition review(const ReviewRequest& request, const User& actor, Timestamp at);
  Transition publish(const FormKey& subject, const User& actor, Timestamp at);

  // Same operations inside a caller-owned transaction (used by sync).
  SubmitResult apply_submit(Transaction& tx, const FormSubmission& submission,
                            const User& actor, Timestamp at, const ChangeOrigin& origin = {});
  Transition apply_review(Transaction& tx, const ReviewRequest& request, const User& actor,
                          Timestamp at, const ChangeOrigin& origin = {});

  /// Deviation and cross-rule flags on the stored form that still lack a
  /// justification.
  std::vector<QualityFinding> pending_deviations(const StoreState& state,
                                                 const FormKey& subject) const;

  /// Deviation and cross-rule flags for `values` as a submission of `key`.
  std::vector<QualityFinding> consistency_flags(const Metadata& md, const StoreState& state,
                                                const DataSet& ds, const FormKey& key,
                                                const std::map<std::string, double>& values) const;

  ElementHistory history_for(const StoreState& state, const std::string& element_id,
                             const std::string& org_unit_id, const Period& period) const;

  std::shared_ptr<const Metadata> metadata() const;
  void set_metadata(std::shared_ptr<const Metadata> metadata);
  const FlowPolicy& policy() const { return policy_; }
  const WorkflowConfig& config() const { return config_; }
  Store& store() { return store_; }

 private:
  mutable std::mutex metadata_mutex_;
  std::shared_ptr<const Metadata> metadata_;
  Store& store_;
  FlowPolicy policy_;
  WorkflowConfig config_;
};

/// True when `unit_id` lies inside one of the user's scoped subtrees (ADMIN
/// sees everything).
bool unit_in_user_scope(const Metadata& md, const User& user, std::string_view unit_id);

}  // namespace spmdw
