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

#ifndef MDC_MOTION_HPP_
#define MDC_MOTION_HPP_

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mdc/error.hpp"
#include "mdc/skeleton.hpp"

namespace mdc {

// Half-open frame window [start, end).
struct FrameRange {
  int start = 0;
  int end = 0;
  int length() const { return end - start; }
};

// Joint positions over time: frames x (joints*3), meters, at a fixed sample
// rate. Column layout is joint-major: columns [3j, 3j+1, 3j+2] hold joint
// j's x/y/z. Values are immutable after construction; instances are cheap to
// share across threads.
class MotionSequence {
 public:
  MotionSequence(Eigen::MatrixXd data, double fps,
                 std::shared_ptr<const Skeleton> skeleton)
      : data_(std::move(data)), fps_(fps), skeleton_(std::move(skeleton)) {
    if (!skeleton_) throw SchemaError("motion sequence requires a skeleton");
  }

  int frames() const { return static_cast<int>(data_.rows()); }
  int joints() const { return skeleton_->joint_count(); }
  int features() const { return static_cast<int>(data_.cols()); }
  double fps() const { return fps_; }
  const Skeleton& skeleton() const { return *skeleton_; }
  std::shared_ptr<const Skeleton> skeleton_ptr() const { return skeleton_; }
  const Eigen::MatrixXd& data() const { return data_; }

  Eigen::Vector3d position(int frame, int joint) const {
    return data_.block<1, 3>(frame, 3 * joint).transpose();
  }

 private:
  Eigen::MatrixXd data_;
  double fps_;
  std::shared_ptr<const Skeleton> skeleton_;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;

  void fail(const std::string& what) {
    ok = false;
    violations.push_back(what);
  }
};

// Checks every MotionSequence invariant and reports all violations at once.
inline ValidationReport validate(const MotionSequence& seq) {
  ValidationReport report;
  if (seq.frames() < 1) report.fail("frames >= 1 violated (got 0 frames)");
  if (seq.fps() <= 0.0)
    report.fail("fps must be positive (got " + std::to_string(seq.fps()) + ")");
  if (seq.features() != 3 * seq.joints())
    report.fail("feature dimension " + std::to_string(seq.features()) +
                " does not equal 3 x " + std::to_string(seq.joints()) +
                " skeleton joints");
  const auto& d = seq.data();
  for (int f = 0; f < seq.frames(); ++f) {
    for (int c = 0; c < seq.features(); ++c) {
      if (!std::isfinite(d(f, c))) {
        report.fail("non-finite value at frame " + std::to_string(f) +
                    ", joint " + std::to_string(c / 3) + ", axis " +
                    std::to_string(c % 3));
        break;  // one report per frame is enough
      }
    }
  }
  return report;
}

inline MotionSequence slice(const MotionSequence& seq, FrameRange range) {
  if (range.start < 0 || range.end > seq.frames() || range.start >= range.end)
    throw BoundsError("slice range [" + std::to_string(range.start) + ", " +
                      std::to_string(range.end) + ") out of bounds for " +
                      std::to_string(seq.frames()) + " frames");
  return MotionSequence(seq.data().middleRows(range.start, range.length()),
                        seq.fps(), seq.skeleton_ptr());
}

inline MotionSequence concat(const std::vector<MotionSequence>& parts) {
  if (parts.empty()) throw BoundsError("concat requires at least one sequence");
  const auto& first = parts.front();
  int total = 0;
  for (const auto& p : parts) {
    if (p.skeleton_ptr().get() != first.skeleton_ptr().get() &&
        p.skeleton().joint_names != first.skeleton().joint_names)
      throw IncompatibilityError("concat parts use different skeletons");
    if (p.fps() != first.fps())
      throw IncompatibilityError("concat parts have mismatched fps (" +
                                 std::to_string(first.fps()) + " vs " +
                                 std::to_string(p.fps()) + ")");
    total += p.frames();
  }
  Eigen::MatrixXd data(total, first.features());
  int row = 0;
  for (const auto& p : parts) {
    data.middleRows(row, p.frames()) = p.data();
    row += p.frames();
  }
  return MotionSequence(std::move(data), first.fps(), first.skeleton_ptr());
}

inline MotionSequence concat(const MotionSequence& a, const MotionSequence& b) {
  return concat(std::vector<MotionSequence>{a, b});
}

struct CenteredMotion {
  MotionSequence sequence;                     // root at origin every frame
  std::vector<Eigen::Vector3d> root_trajectory;  // removed root positions
};

// Splits global translation from pose: subtracts the per-frame root position
// from every joint. Adding root_trajectory back reproduces the input.
inline CenteredMotion center_on_root(const MotionSequence& seq) {
  const int root = seq.skeleton().root();
  Eigen::MatrixXd data = seq.data();
  std::vector<Eigen::Vector3d> trajectory(seq.frames());
  for (int f = 0; f < seq.frames(); ++f) {
    Eigen::Vector3d r = data.block<1, 3>(f, 3 * root).transpose();
    trajectory[f] = r;
    for (int j = 0; j < seq.joints(); ++j)
      data.block<1, 3>(f, 3 * j) -= r.transpose();
  }
  return CenteredMotion{
      MotionSequence(std::move(data), seq.fps(), seq.skeleton_ptr()),
      std::move(trajectory)};
}

// Inverse of center_on_root.
inline MotionSequence add_root_trajectory(
    const MotionSequence& seq, const std::vector<Eigen::Vector3d>& trajectory) {
  if (static_cast<int>(trajectory.size()) != seq.frames())
    throw ShapeError("trajectory length " + std::to_string(trajectory.size()) +
                     " does not match " + std::to_string(seq.frames()) +
                     " frames");
  Eigen::MatrixXd data = seq.data();
  for (int f = 0; f < seq.frames(); ++f)
    for (int j = 0; j < seq.joints(); ++j)
      data.block<1, 3>(f, 3 * j) += trajectory[f].transpose();
  return MotionSequence(std::move(data), seq.fps(), seq.skeleton_ptr());
}

}  // namespace mdc

#endif  // MDC_MOTION_HPP_
