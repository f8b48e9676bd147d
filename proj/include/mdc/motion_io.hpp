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

#ifndef MDC_MOTION_IO_HPP_
#define MDC_MOTION_IO_HPP_

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <utility>

#include <json.hpp>

#include "mdc/error.hpp"
#include "mdc/motion.hpp"

namespace mdc {

// Canonical motion file: a JSON object with
//   fps          number
//   joint_names  array of strings
//   parents      array of parent indices, -1 for the root
//   frames       array of frames; each frame an array of [x, y, z] triples
// Doubles are serialized shortest-round-trip, so save/load is lossless.

inline void save_motion(const MotionSequence& seq, const std::string& path) {
  nlohmann::json j;
  j["fps"] = seq.fps();
  j["joint_names"] = seq.skeleton().joint_names;
  j["parents"] = seq.skeleton().parents;
  auto frames = nlohmann::json::array();
  for (int f = 0; f < seq.frames(); ++f) {
    auto frame = nlohmann::json::array();
    for (int jt = 0; jt < seq.joints(); ++jt) {
      frame.push_back({seq.data()(f, 3 * jt), seq.data()(f, 3 * jt + 1),
                       seq.data()(f, 3 * jt + 2)});
    }
    frames.push_back(std::move(frame));
  }
  j["frames"] = std::move(frames);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump();
  if (!out) throw IoError("failed writing " + path);
}

inline MotionSequence load_motion(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  for (const char* field : {"fps", "joint_names", "parents", "frames"})
    if (!j.contains(field))
      throw SchemaError(path + ": missing required field \"" +
                        std::string(field) + "\"");

  auto skeleton = std::make_shared<Skeleton>();
  try {
    skeleton->joint_names = j["joint_names"].get<std::vector<std::string>>();
    skeleton->parents = j["parents"].get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": bad joint_names/parents: " + e.what());
  }
  skeleton->validate();

  if (!j["fps"].is_number())
    throw SchemaError(path + ": field \"fps\" must be a number");
  const double fps = j["fps"].get<double>();

  const auto& frames = j["frames"];
  if (!frames.is_array() || frames.empty())
    throw SchemaError(path + ": field \"frames\" must be a non-empty array");
  const int n_joints = skeleton->joint_count();
  Eigen::MatrixXd data(frames.size(), 3 * n_joints);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& frame = frames[f];
    if (!frame.is_array() || static_cast<int>(frame.size()) != n_joints)
      throw SchemaError(path + ": frame " + std::to_string(f) + " has " +
                        std::to_string(frame.size()) + " joints, skeleton " +
                        "declares " + std::to_string(n_joints));
    for (int jt = 0; jt < n_joints; ++jt) {
      const auto& triple = frame[jt];
      if (!triple.is_array() || triple.size() != 3)
        throw SchemaError(path + ": frame " + std::to_string(f) + ", joint " +
                          std::to_string(jt) + " is not an [x, y, z] triple");
      for (int a = 0; a < 3; ++a)
        data(static_cast<Eigen::Index>(f), 3 * jt + a) =
            triple[a].get<double>();
    }
  }
  return MotionSequence(std::move(data), fps, std::move(skeleton));
}

// Flat interchange export: one `frame, joint, x, y, z` row per sample.
inline void export_motion_csv(const MotionSequence& seq,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "frame,joint,x,y,z\n";
  char buf[128];
  for (int f = 0; f < seq.frames(); ++f) {
    for (int jt = 0; jt < seq.joints(); ++jt) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", f, jt,
                    seq.data()(f, 3 * jt), seq.data()(f, 3 * jt + 1),
                    seq.data()(f, 3 * jt + 2));
      out << buf;
    }
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace mdc

#endif  // MDC_MOTION_IO_HPP_
