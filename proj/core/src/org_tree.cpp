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

#include "spmdw/org_tree.hpp"

#include <algorithm>

#include "spmdw/error.hpp"

namespace spmdw {

size_t OrgTree::index_of(std::string_view id) const {
  if (d_) {
    auto it = d_->by_id.find(std::string(id));
    if (it != d_->by_id.end()) return it->second;
  }
  throw Error(ErrorCode::UnknownUnit, "unknown org unit '" + std::string(id) + "'");
}

bool OrgTree::contains(std::string_view id) const {
  return d_ && d_->by_id.count(std::string(id)) > 0;
}

const OrgUnit& OrgTree::unit(std::string_view id) const {
  return d_->units[index_of(id)];
}

std::vector<OrgUnit> OrgTree::ancestors(std::string_view id) const {
  std::vector<OrgUnit> chain;
  const OrgUnit* u = &unit(id);
  while (u->parent_id) {
    u = &d_->units[index_of(*u->parent_id)];
    chain.push_back(*u);
  }
  return chain;
}

std::vector<const OrgUnit*> OrgTree::children(std::string_view id) const {
  std::vector<const OrgUnit*> out;
  for (size_t c : d_->children[index_of(id)]) out.push_back(&d_->units[c]);
  return out;
}

std::vector<const OrgUnit*> OrgTree::subtree(std::string_view id) const {
  size_t i = index_of(id);
  return {d_->preorder.begin() + static_cast<std::ptrdiff_t>(d_->entry[i]),
          d_->preorder.begin() + static_cast<std::ptrdiff_t>(d_->exit[i] + 1)};
}

std::vector<const OrgUnit*> OrgTree::subtree_at_level(std::string_view id,
                                                      OrgLevel level) const {
  std::vector<const OrgUnit*> out;
  for (const OrgUnit* u : subtree(id)) {
    if (u->level == level) out.push_back(u);
  }
  return out;
}

bool OrgTree::in_subtree(std::string_view id, std::string_view ancestor_id) const {
  size_t i = index_of(id);
  size_t a = index_of(ancestor_id);
  return d_->entry[a] <= d_->entry[i] && d_->entry[i] <= d_->exit[a];
}

size_t OrgTree::preorder_index(std::string_view id) const {
  return d_->entry[index_of(id)];
}

OrgTree build_org_tree(std::span<const OrgUnit> nodes) {
  if (nodes.empty()) {
    throw Error(ErrorCode::InvalidMetadata, "org unit list is empty");
  }
  auto data = std::make_shared<OrgTree::Data>();
  data->units.assign(nodes.begin(), nodes.end());
  auto& units = data->units;
  const size_t n = units.size();

  for (size_t i = 0; i < n; ++i) {
    if (units[i].id.empty()) {
      throw Error(ErrorCode::InvalidMetadata, "org unit with empty id");
    }
    if (!data->by_id.emplace(units[i].id, i).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate org unit id '" + units[i].id + "'",
                  {{"unit", units[i].id}});
    }
  }

  std::vector<size_t> parent(n, n);
  for (size_t i = 0; i < n; ++i) {
    const auto& u = units[i];
    if (!u.parent_id) continue;
    if (*u.parent_id == u.id) {
      throw Error(ErrorCode::CycleDetected, "org unit '" + u.id + "' is its own parent",
                  {{"unit", u.id}});
    }
    auto it = data->by_id.find(*u.parent_id);
    if (it == data->by_id.end()) {
      throw Error(ErrorCode::DanglingParent,
                  "org unit '" + u.id + "' names missing parent '" + *u.parent_id + "'",
                  {{"unit", u.id}, {"parent_id", *u.parent_id}});
    }
    parent[i] = it->second;
  }

  // Cycle detection by walking parent chains with three-colour marking.
  std::vector<int> state(n, 0);  // 0 unvisited, 1 on current walk, 2 done
  for (size_t start = 0; start < n; ++start) {
    std::vector<size_t> walk;
    size_t cur = start;
    while (cur != n && state[cur] == 0) {
      state[cur] = 1;
      walk.push_back(cur);
      cur = parent[cur];
    }
    if (cur != n && state[cur] == 1) {
      throw Error(ErrorCode::CycleDetected,
                  "org unit '" + units[cur].id + "' lies on a parent cycle",
                  {{"unit", units[cur].id}});
    }
    for (size_t w : walk) state[w] = 2;
  }

  std::vector<size_t> roots;
  for (size_t i = 0; i < n; ++i) {
    if (parent[i] == n) roots.push_back(i);
  }
  if (roots.size() > 1) {
    nlohmann::json ids = nlohmann::json::array();
    for (size_t r : roots) ids.push_back(units[r].id);
    throw Error(ErrorCode::MultipleRoots, "org tree has " + std::to_string(roots.size()) + " roots",
                {{"roots", ids}});
  }
  data->root = roots.front();

  for (size_t i = 0; i < n; ++i) {
    const auto& u = units[i];
    if (parent[i] == n) {
      if (u.level != OrgLevel::Province) {
        throw Error(ErrorCode::LevelSkip,
                    "root '" + u.id + "' is " + std::string(to_string(u.level)) +
                        ", expected PROVINCE",
                    {{"unit", u.id}});
      }
      continue;
    }
    const auto& p = units[parent[i]];
    if (static_cast<int>(p.level) != static_cast<int>(u.level) - 1) {
      throw Error(ErrorCode::LevelSkip,
                  "org unit '" + u.id + "' (" + std::string(to_string(u.level)) +
                      ") sits under '" + p.id + "' (" + std::string(to_string(p.level)) + ")",
                  {{"unit", u.id}, {"parent_id", p.id}});
    }
  }

  data->children.assign(n, {});
  for (size_t i = 0; i < n; ++i) {
    if (parent[i] != n) data->children[parent[i]].push_back(i);
  }
  for (auto& c : data->children) {
    std::sort(c.begin(), c.end(),
              [&](size_t a, size_t b) { return units[a].id < units[b].id; });
  }

  data->entry.assign(n, 0);
  data->exit.assign(n, 0);
  data->preorder.reserve(n);
  // Iterative DFS; depth is bounded by four levels but keep it generic.
  std::vector<std::pair<size_t, size_t>> stack{{data->root, 0}};
  data->entry[data->root] = 0;
  data->preorder.push_back(&units[data->root]);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < data->children[node].size()) {
      size_t child = data->children[node][next++];
      data->entry[child] = data->preorder.size();
      data->preorder.push_back(&units[child]);
      stack.emplace_back(child, 0);
    } else {
      data->exit[node] = data->preorder.size() - 1;
      stack.pop_back();
    }
  }

  OrgTree tree;
  tree.d_ = std::move(data);
  return tree;
}

}  // namespace spmdw
