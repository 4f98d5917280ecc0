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

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "spmdw/model.hpp"
#include "spmdw/org_tree.hpp"

namespace spmdw {

/// A numerator <= denominator rule between two elements.
struct CrossRule {
  std::string numerator_id;
  std::string denominator_id;
};

/// The validated metadata catalog.
///
/// Built once and then read-only; share it as `std::shared_ptr<const
/// Metadata>` and swap the pointer to import new metadata.
class Metadata {
 public:
  struct Parts {
    std::vector<OrgUnit> org_units;
    std::vector<Program> programs;
    std::vector<DataElement> elements;
    std::vector<DataSet> datasets;
    std::vector<Indicator> indicators;
    std::vector<User> users;
  };

  /// Validates every cross reference and invariant. Throws Error.
  static Metadata build(Parts parts);

  const OrgTree& tree() const { return tree_; }
  const Parts& parts() const { return parts_; }

  // Lookups throw the matching Unknown* error.
  const Program& program(std::string_view id) const;
  const DataElement& element(std::string_view id) const;
  const DataSet& dataset(std::string_view id) const;
  const Indicator& indicator(std::string_view id) const;
  const User& user(std::string_view id) const;

  bool has_program(std::string_view id) const;
  bool has_element(std::string_view id) const;
  bool has_dataset(std::string_view id) const;
  bool has_indicator(std::string_view id) const;
  bool has_user(std::string_view id) const;

  /// The unique dataset that collects `element_id`, or nullptr.
  const DataSet* dataset_of(std::string_view element_id) const;

  /// numerator <= denominator for every indicator.
  const std::vector<CrossRule>& cross_rules() const { return cross_rules_; }

 private:
  Parts parts_;
  OrgTree tree_;
  std::map<std::string, size_t, std::less<>> programs_, elements_, datasets_,
      indicators_, users_;
  std::map<std::string, size_t, std::less<>> element_dataset_;
  std::vector<CrossRule> cross_rules_;
};

/// Single-entry authority: only the owner program may submit an element.
bool check_authority(const DataElement& element, const Program& submitting_program);

/// Metadata interchange document with keys orgUnits, programs, dataElements,
/// dataSets, indicators and users.
Metadata metadata_from_json(const nlohmann::json& doc);
nlohmann::json metadata_to_json(const Metadata& md, bool include_credentials = true);
Metadata load_metadata_file(const std::string& path);

nlohmann::json to_json(const OrgUnit& u);
nlohmann::json to_json(const Program& p);
nlohmann::json to_json(const DataElement& e);
nlohmann::json to_json(const DataSet& d);
nlohmann::json to_json(const Indicator& i);
nlohmann::json to_json(const User& u, bool include_credential);

}  // namespace spmdw
