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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spmdw/model.hpp"

namespace spmdw {

/// A validated administrative tree with parent/child indexes.
///
/// Children are ordered by id, so preorder() is deterministic for a given set
/// of nodes regardless of input order. Subtree membership is O(1) through
/// preorder entry/exit numbers.
class OrgTree {
 public:
  OrgTree() = default;

  const OrgUnit& root() const { return d_->units[d_->root]; }
  size_t size() const noexcept { return d_ ? d_->units.size() : 0; }

  bool contains(std::string_view id) const;
  /// Throws Error(UnknownUnit).
  const OrgUnit& unit(std::string_view id) const;

  /// Chain from parent up to the root; empty for the root.
  std::vector<OrgUnit> ancestors(std::string_view id) const;
  std::vector<const OrgUnit*> children(std::string_view id) const;

  /// All units in preorder (root first).
  const std::vector<const OrgUnit*>& preorder() const { return d_->preorder; }
  /// Units of `id`'s subtree in preorder, `id` included.
  std::vector<const OrgUnit*> subtree(std::string_view id) const;
  /// Units at `level` inside `id`'s subtree, in preorder.
  std::vector<const OrgUnit*> subtree_at_level(std::string_view id,
                                               OrgLevel level) const;

  /// True when `id` is `ancestor_id` or lies beneath it.
  bool in_subtree(std::string_view id, std::string_view ancestor_id) const;
  /// Preorder position, used for deterministic ordering of units.
  size_t preorder_index(std::string_view id) const;

  friend OrgTree build_org_tree(std::span<const OrgUnit> nodes);

 private:
  size_t index_of(std::string_view id) const;

  // Immutable once built; copies of the tree share it.
  struct Data {
    std::vector<OrgUnit> units;
    std::unordered_map<std::string, size_t> by_id;
    std::vector<std::vector<size_t>> children;
    std::vector<size_t> entry;  // preorder number
    std::vector<size_t> exit;   // last preorder number inside the subtree
    std::vector<const OrgUnit*> preorder;
    size_t root = 0;
  };
  std::shared_ptr<const Data> d_;
};

/// Validates `nodes` into a tree. Throws Error with one of CycleDetected,
/// MultipleRoots, LevelSkip, DanglingParent, DuplicateId, InvalidMetadata.
OrgTree build_org_tree(std::span<const OrgUnit> nodes);

}  // namespace spmdw
