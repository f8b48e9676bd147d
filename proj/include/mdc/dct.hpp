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

#ifndef MDC_DCT_HPP_
#define MDC_DCT_HPP_

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "mdc/error.hpp"
#include "mdc/motion.hpp"

namespace mdc {

// Temporal DCT of a motion sequence: L retained frequencies x F feature
// channels. n_frames is kept so the inverse can reconstruct the original
// length; with L < n_frames the inverse is the least-squares projection onto
// the retained basis.
struct DctCoeffs {
  Eigen::MatrixXd coeffs;  // L x F
  int n_frames = 0;

  int retained() const { return static_cast<int>(coeffs.rows()); }
  int features() const { return static_cast<int>(coeffs.cols()); }
};

// Orthonormal DCT-II basis, rows are basis vectors: B(l, t) =
// s_l * cos(pi * (2t + 1) * l / (2n)), s_0 = sqrt(1/n), s_l = sqrt(2/n).
// B * B^T = I for any L <= n. The O(n^2) matrix form is fine at desk scale.
inline Eigen::MatrixXd dct_basis(int n_frames, int retained) {
  if (retained < 1 || retained > n_frames)
    throw BoundsError("retained coefficient count " +
                      std::to_string(retained) + " outside [1, " +
                      std::to_string(n_frames) + "]");
  const double pi = 3.14159265358979323846;
  Eigen::MatrixXd basis(retained, n_frames);
  for (int l = 0; l < retained; ++l) {
    const double scale =
        std::sqrt((l == 0 ? 1.0 : 2.0) / static_cast<double>(n_frames));
    for (int t = 0; t < n_frames; ++t)
      basis(l, t) = scale * std::cos(pi * (2.0 * t + 1.0) * l /
                                     (2.0 * n_frames));
  }
  return basis;
}

inline DctCoeffs dct(const Eigen::MatrixXd& time_series, int retained) {
  const int n = static_cast<int>(time_series.rows());
  return DctCoeffs{dct_basis(n, retained) * time_series, n};
}

inline DctCoeffs dct(const Eigen::MatrixXd& time_series) {
  return dct(time_series, static_cast<int>(time_series.rows()));
}

inline DctCoeffs dct(const MotionSequence& seq, int retained) {
  return dct(seq.data(), retained);
}

inline DctCoeffs dct(const MotionSequence& seq) {
  return dct(seq.data(), seq.frames());
}

inline Eigen::MatrixXd idct(const DctCoeffs& coeffs) {
  return dct_basis(coeffs.n_frames, coeffs.retained()).transpose() *
         coeffs.coeffs;
}

inline MotionSequence idct(const DctCoeffs& coeffs, double fps,
                           std::shared_ptr<const Skeleton> skeleton) {
  return MotionSequence(idct(coeffs), fps, std::move(skeleton));
}

}  // namespace mdc

#endif  // MDC_DCT_HPP_
