// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pbigamp/types.hpp"

namespace pbigamp {

/// One plane-wave component of a user's physical channel.
struct PhysicalPath {
  cplx gain;
  double aoa;  ///< angle of arrival, radians, strictly inside (0, pi)

  PhysicalPath(cplx gain, double aoa);
};

/// Uniform linear receive array. Spacing is wavelength-normalized.
class ArrayGeometry {
 public:
  ArrayGeometry(int n_antennas, double spacing);

  int n_antennas() const { return n_antennas_; }
  double spacing() const { return spacing_; }
  double length() const { return n_antennas_ * spacing_; }

 private:
  int n_antennas_;
  double spacing_;
};

/// Angular-domain channel H (N x K) with an explicitly recorded support.
struct ChannelMatrix {
  CMatrix entries;
  std::vector<std::pair<int, int>> support;  ///< (n, k) of the nonzeros, column-major order

  int rows() const { return static_cast<int>(entries.rows()); }
  int cols() const { return static_cast<int>(entries.cols()); }

  /// Wraps a dense matrix, recording every exactly-nonzero entry as support.
  static ChannelMatrix from_dense(CMatrix h);
};

/// Array response to a plane wave from `theta`; unit l2-norm.
CVector steering_vector(double theta, const ArrayGeometry& geom);

/// Unitary virtual-representation basis A_r. Column n is the steering vector
/// at arccos(n / L_r), which reduces to the normalized DFT basis.
CMatrix angular_basis(const ArrayGeometry& geom);

CVector synthesize_physical(std::span<const PhysicalPath> paths, const ArrayGeometry& geom);

/// H = A_r^H * H_tilde. Throws std::invalid_argument on a row-count mismatch.
CMatrix to_angular(const CMatrix& h_tilde, const CMatrix& basis);

/// Inverse of to_angular: H_tilde = A_r * H.
CMatrix from_angular(const CMatrix& h, const CMatrix& basis);

/// Bernoulli-Gaussian angular channel: each entry is nonzero with
/// probability rho and then CN(0, variance). Draws are keyed by
/// (seed, entry), so supports are nested in rho for a fixed seed.
ChannelMatrix sample_bg_channel(int n, int k, double rho, double variance, std::uint64_t seed);

/// |S| / (N K).
double sparsity_level(const ChannelMatrix& h);

}  // namespace pbigamp
