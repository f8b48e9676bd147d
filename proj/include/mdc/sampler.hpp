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

#ifndef MDC_SAMPLER_HPP_
#define MDC_SAMPLER_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mdc/dct.hpp"
#include "mdc/denoiser.hpp"
#include "mdc/error.hpp"
#include "mdc/motion.hpp"
#include "mdc/rng.hpp"
#include "mdc/schedule.hpp"

namespace mdc {

// Pre-fill rule for the unknown middle frames before diffusion starts.
enum class PaddingStrategy { split_ends, zeros, last_of_h1, first_of_h2 };

inline std::string to_string(PaddingStrategy p) {
  switch (p) {
    case PaddingStrategy::split_ends: return "split_ends";
    case PaddingStrategy::zeros: return "zeros";
    case PaddingStrategy::last_of_h1: return "last_of_h1";
    case PaddingStrategy::first_of_h2: return "first_of_h2";
  }
  return "?";
}

inline PaddingStrategy padding_from_string(const std::string& s) {
  if (s == "split_ends") return PaddingStrategy::split_ends;
  if (s == "zeros") return PaddingStrategy::zeros;
  if (s == "last_of_h1") return PaddingStrategy::last_of_h1;
  if (s == "first_of_h2") return PaddingStrategy::first_of_h2;
  throw ConfigError("unknown padding strategy \"" + s +
                    "\" (expected split_ends|zeros|last_of_h1|first_of_h2)");
}

// One inpainting job: observed tail of the first motion, observed head of
// the second, and m frames to generate in between.
struct CompletionTask {
  MotionSequence h1_tail;
  MotionSequence h2_head;
  int m = 1;
  PaddingStrategy padding = PaddingStrategy::split_ends;
  std::uint64_t rng_seed = 0;

  int x() const { return h1_tail.frames(); }
  int k() const { return h2_head.frames(); }
  int total() const { return x() + m + k(); }

  void validate() const {
    if (x() < 1 || k() < 1 || m < 1)
      throw BoundsError("completion task needs x >= 1, m >= 1, k >= 1 (got " +
                        std::to_string(x()) + ", " + std::to_string(m) + ", " +
                        std::to_string(k()) + ")");
    if (h1_tail.fps() != h2_head.fps())
      throw IncompatibilityError("h1 tail and h2 head have mismatched fps");
    if (h1_tail.skeleton().joint_names != h2_head.skeleton().joint_names)
      throw IncompatibilityError(
          "h1 tail and h2 head use different skeletons");
  }
};

// Per-frame observation mask: 1 = observed, 0 = to generate, broadcast
// across features.
struct Mask {
  std::vector<std::uint8_t> frames;

  int size() const { return static_cast<int>(frames.size()); }
  int observed_count() const {
    int n = 0;
    for (auto f : frames) n += f;
    return n;
  }
};

inline Mask build_mask(int x, int m, int k) {
  if (x < 1 || m < 1 || k < 1)
    throw BoundsError("mask segments must all be >= 1 (got " +
                      std::to_string(x) + ", " + std::to_string(m) + ", " +
                      std::to_string(k) + ")");
  Mask mask;
  mask.frames.assign(x, 1);
  mask.frames.insert(mask.frames.end(), m, 0);
  mask.frames.insert(mask.frames.end(), k, 1);
  return mask;
}

// Assembles the n = x + m + k frame input: observed frames verbatim, middle
// filled per strategy. split_ends gives the first ceil(m/2) middle frames to
// the last h1 frame and the rest to the first h2 frame.
inline MotionSequence build_padded_input(const CompletionTask& task) {
  task.validate();
  const int x = task.x(), m = task.m, k = task.k();
  const int features = task.h1_tail.features();
  Eigen::MatrixXd data(x + m + k, features);
  data.topRows(x) = task.h1_tail.data();
  data.bottomRows(k) = task.h2_head.data();
  const Eigen::RowVectorXd h1_last = task.h1_tail.data().row(x - 1);
  const Eigen::RowVectorXd h2_first = task.h2_head.data().row(0);
  switch (task.padding) {
    case PaddingStrategy::split_ends: {
      const int first_half = (m + 1) / 2;
      for (int i = 0; i < m; ++i)
        data.row(x + i) = i < first_half ? h1_last : h2_first;
      break;
    }
    case PaddingStrategy::zeros:
      data.middleRows(x, m).setZero();
      break;
    case PaddingStrategy::last_of_h1:
      for (int i = 0; i < m; ++i) data.row(x + i) = h1_last;
      break;
    case PaddingStrategy::first_of_h2:
      for (int i = 0; i < m; ++i) data.row(x + i) = h2_first;
      break;
  }
  return MotionSequence(std::move(data), task.h1_tail.fps(),
                        task.h1_tail.skeleton_ptr());
}

namespace detail {

inline Eigen::MatrixXd combine_masked(const Mask& mask,
                                      const Eigen::MatrixXd& observed,
                                      const Eigen::MatrixXd& generated) {
  Eigen::MatrixXd out(observed.rows(), observed.cols());
  for (int f = 0; f < mask.size(); ++f)
    out.row(f) = mask.frames[f] ? observed.row(f) : generated.row(f);
  return out;
}

// The masked reverse loop over raw matrices. `observed` must already be in
// whatever coordinate frame the model was trained in. Runs for t = T-1 .. 0:
// the observed branch re-diffuses the clean padded input to step t-1, the
// denoising branch takes one posterior step of the latent, and the two are
// merged per frame in the time domain before re-entering the DCT domain.
inline Eigen::MatrixXd sample_masked(const Eigen::MatrixXd& observed,
                                     const Mask& mask, const DenoiserNet& net,
                                     const NoiseSchedule& schedule, Rng& rng,
                                     int retained) {
  const int n = static_cast<int>(observed.rows());
  const DctCoeffs obs_coeffs = dct(observed, retained);
  Eigen::MatrixXd latent =
      rng.normal_matrix(obs_coeffs.coeffs.rows(), obs_coeffs.coeffs.cols());
  Eigen::MatrixXd combined_time = observed;
  for (int t = schedule.T - 1; t >= 0; --t) {
    const Eigen::MatrixXd predicted = net.forward(latent, t, schedule.T);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(latent.rows(), latent.cols());
    if (t > 0) z = rng.normal_matrix(latent.rows(), latent.cols());
    const Eigen::MatrixXd denoised =
        posterior_step(latent, predicted, t, z, schedule);
    if (!denoised.allFinite())
      throw DivergenceError("non-finite latent during sampling at step " +
                            std::to_string(t));

    Eigen::MatrixXd observed_branch;
    if (t > 0) {
      Eigen::MatrixXd eps =
          rng.normal_matrix(obs_coeffs.coeffs.rows(), obs_coeffs.coeffs.cols());
      observed_branch =
          idct(DctCoeffs{q_sample(obs_coeffs.coeffs, t - 1, eps, schedule), n});
    } else {
      observed_branch = observed;  // clean data at the final step
    }
    combined_time = combine_masked(
        mask, observed_branch, idct(DctCoeffs{denoised, n}));
    if (t > 0) latent = dct(combined_time, retained).coeffs;
  }
  return combined_time;
}

}  // namespace detail

struct SamplerOptions {
  int retained_coeffs = 0;  // 0 = keep all n coefficients
};

// Runs the masked reverse-diffusion loop for one task. The observed frames
// of the output equal the task inputs; the middle m frames are generated.
inline MotionSequence sample_completion(const CompletionTask& task,
                                        const DenoiserNet& net,
                                        const NoiseSchedule& schedule,
                                        const SamplerOptions& opts = {}) {
  task.validate();
  const MotionSequence padded = build_padded_input(task);
  const int n = padded.frames();
  if (padded.features() != net.config().n_feats)
    throw ShapeError("task has " + std::to_string(padded.features()) +
                     " features, model expects " +
                     std::to_string(net.config().n_feats));
  if (n > net.config().n_frames)
    throw ShapeError("task length " + std::to_string(n) +
                     " exceeds the model's trained maximum of " +
                     std::to_string(net.config().n_frames) +
                     "; chain multiple completions instead");
  const Mask mask = build_mask(task.x(), task.m, task.k());
  const int retained =
      opts.retained_coeffs > 0 ? std::min(opts.retained_coeffs, n) : n;
  Rng rng(task.rng_seed);
  Eigen::MatrixXd result = detail::sample_masked(
      padded.data(), mask, net, schedule, rng, retained);
  return MotionSequence(std::move(result), padded.fps(),
                        padded.skeleton_ptr());
}

// Joins two full motions: slices the x-frame tail of h1 and k-frame head of
// h2, infers the m-frame transition in root-relative coordinates, and
// returns concat(h1, transition, h2). The transition's root path linearly
// interpolates between the two observed root positions.
inline MotionSequence complete_pair(const MotionSequence& h1,
                                    const MotionSequence& h2, int x, int k,
                                    int m, const DenoiserNet& net,
                                    const NoiseSchedule& schedule,
                                    std::uint64_t seed = 0,
                                    PaddingStrategy padding =
                                        PaddingStrategy::split_ends,
                                    const SamplerOptions& opts = {}) {
  if (x < 1 || x > h1.frames())
    throw BoundsError("tail length " + std::to_string(x) +
                      " outside [1, " + std::to_string(h1.frames()) + "]");
  if (k < 1 || k > h2.frames())
    throw BoundsError("head length " + std::to_string(k) +
                      " outside [1, " + std::to_string(h2.frames()) + "]");

  const auto tail = center_on_root(slice(h1, {h1.frames() - x, h1.frames()}));
  const auto head = center_on_root(slice(h2, {0, k}));
  CompletionTask task{tail.sequence, head.sequence, m, padding, seed};
  const MotionSequence generated = sample_completion(task, net, schedule, opts);

  const Eigen::Vector3d root_a = tail.root_trajectory.back();
  const Eigen::Vector3d root_b = head.root_trajectory.front();
  const int root = h1.skeleton().root();
  Eigen::MatrixXd middle = generated.data().middleRows(x, m);
  for (int i = 0; i < m; ++i) {
    const double u = static_cast<double>(i + 1) / (m + 1);
    const Eigen::Vector3d r = (1.0 - u) * root_a + u * root_b;
    // Generated poses are root-relative; pin the root row and translate.
    middle.block<1, 3>(i, 3 * root).setZero();
    for (int j = 0; j < generated.joints(); ++j)
      middle.block<1, 3>(i, 3 * j) += r.transpose();
  }
  MotionSequence transition(std::move(middle), h1.fps(), h1.skeleton_ptr());
  return concat({h1, transition, h2});
}

}  // namespace sampler_detail_guard_unused  // NOLINT

#endif  // MDC_SAMPLER_HPP_
