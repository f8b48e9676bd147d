// Copyright 2026 The mdc Authors
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

#ifndef MDC_SKELETON_HPP_
#define MDC_SKELETON_HPP_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mdc/error.hpp"

namespace mdc {

// Joint hierarchy: names plus per-joint parent index (-1 for the root).
// Parent links must form a tree with exactly one root.
struct Skeleton {
  std::vector<std::string> joint_names;
  std::vector<int> parents;

  int joint_count() const { return static_cast<int>(joint_names.size()); }

  int root() const {
    for (int j = 0; j < joint_count(); ++j)
      if (parents[j] < 0) return j;
    return -1;
  }

  int index_of(const std::string& name) const {
    for (int j = 0; j < joint_count(); ++j)
      if (joint_names[j] == name) return j;
    throw BoundsError("unknown joint name: " + name);
  }

  bool has_joint(const std::string& name) const {
    for (const auto& n : joint_names)
      if (n == name) return true;
    return false;
  }

  // (parent, child) index pairs, one per non-root joint.
  std::vector<std::pair<int, int>> bone_pairs() const {
    std::vector<std::pair<int, int>> bones;
    for (int j = 0; j < joint_count(); ++j)
      if (parents[j] >= 0) bones.emplace_back(parents[j], j);
    return bones;
  }

  // Children of a joint, in index order.
  std::vector<int> children(int joint) const {
    std::vector<int> out;
    for (int j = 0; j < joint_count(); ++j)
      if (parents[j] == joint) out.push_back(j);
    return out;
  }

  // All strict descendants of `joint` (depth-first, deterministic order).
  std::vector<int> descendants(int joint) const {
    std::vector<int> out;
    std::vector<int> stack = children(joint);
    while (!stack.empty()) {
      int j = stack.back();
      stack.pop_back();
      out.push_back(j);
      for (int c : children(j)) stack.push_back(c);
    }
    return out;
  }

  // Throws on malformed hierarchies (zero/multiple roots, cycles, bad links).
  void validate() const {
    const int n = joint_count();
    if (n < 1) throw SchemaError("skeleton must have at least one joint");
    if (parents.size() != joint_names.size())
      throw SchemaError("skeleton parents/joint_names size mismatch");
    int roots = 0;
    for (int j = 0; j < n; ++j) {
      if (parents[j] < 0) {
        ++roots;
      } else if (parents[j] >= n) {
        throw SchemaError("joint " + joint_names[j] +
                          " has out-of-range parent index");
      } else if (parents[j] == j) {
        throw SchemaError("joint " + joint_names[j] + " is its own parent");
      }
    }
    if (roots != 1)
      throw SchemaError("skeleton must have exactly one root, found " +
                        std::to_string(roots));
    // Walking up from every joint must reach the root in < n hops.
    for (int j = 0; j < n; ++j) {
      int cur = j, hops = 0;
      while (parents[cur] >= 0) {
        cur = parents[cur];
        if (++hops >= n)
          throw SchemaError("parent links contain a cycle at joint " +
                            joint_names[j]);
      }
    }
  }
};

// Canonical 17-joint Human3.6M-style layout. The hip is the root; wrists are
// present, which the IMU pipeline relies on.
inline std::shared_ptr<const Skeleton> default_skeleton() {
  static const auto skel = [] {
    auto s = std::make_shared<Skeleton>();
    s->joint_names = {
        "hip",           "right_hip",   "right_knee",     "right_ankle",
        "left_hip",      "left_knee",   "left_ankle",     "spine",
        "thorax",        "neck",        "head",           "left_shoulder",
        "left_elbow",    "left_wrist",  "right_shoulder", "right_elbow",
        "right_wrist"};
    s->parents = {-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15};
    s->validate();
    return std::shared_ptr<const Skeleton>(s);
  }();
  return skel;
}

}  // namespace mdc

#endif  // MDC_SKELETON_HPP_
