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

#include "pbigamp/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pbigamp/rng.hpp"

namespace pbigamp {

PhysicalPath::PhysicalPath(cplx gain_, double aoa_) : gain(gain_), aoa(aoa_) {
  if (!(aoa > 0.0 && aoa < std::numbers::pi))
    throw std::invalid_argument("PhysicalPath: angle of arrival must lie strictly inside (0, pi)");
}

ArrayGeometry::ArrayGeometry(int n_antennas, double spacing)
    : n_antennas_(n_antennas), spacing_(spacing) {
  if (n_antennas < 1) throw std::invalid_argument("ArrayGeometry: need at least one antenna");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw std::invalid_argument("ArrayGeometry: spacing must be positive");
}

ChannelMatrix ChannelMatrix::from_dense(CMatrix h) {
  ChannelMatrix out{std::move(h), {}};
  for (Eigen::Index k = 0; k < out.entries.cols(); ++k)
    for (Eigen::Index n = 0; n < out.entries.rows(); ++n)
      if (out.entries(n, k) != cplx(0.0, 0.0))
        out.support.emplace_back(static_cast<int>(n), static_cast<int>(k));
  return out;
}

CVector steering_vector(double theta, const ArrayGeometry& geom) {
  const int n = geom.n_antennas();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double step = -2.0 * std::numbers::pi * geom.spacing() * std::cos(theta);
  CVector a(n);
  for (int m = 0; m < n; ++m) a(m) = std::polar(scale, step * m);
  return a;
}

CMatrix angular_basis(const ArrayGeometry& geom) {
  const int n = geom.n_antennas();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  CMatrix basis(n, n);
  for (int col = 0; col < n; ++col) {
    for (int m = 0; m < n; ++m) {
      // Reduce m*col mod N first so the phase argument stays small.
      const long long idx = (static_cast<long long>(m) * col) % n;
      basis(m, col) = std::polar(scale, -2.0 * std::numbers::pi * static_cast<double>(idx) / n);
    }
  }
  return basis;
}

CVector synthesize_physical(std::span<const PhysicalPath> paths, const ArrayGeometry& geom) {
  CVector h = CVector::Zero(geom.n_antennas());
  for (const auto& p : paths) h += p.gain * steering_vector(p.aoa, geom);
  return h;
}

CMatrix to_angular(const CMatrix& h_tilde, const CMatrix& basis) {
  if (h_tilde.rows() != basis.rows())
    throw std::invalid_argument("to_angular: row count does not match the array size");
  return basis.adjoint() * h_tilde;
}

CMatrix from_angular(const CMatrix& h, const CMatrix& basis) {
  if (h.rows() != basis.cols())
    throw std::invalid_argument("from_angular: row count does not match the array size");
  return basis * h;
}

ChannelMatrix sample_bg_channel(int n, int k, double rho, double variance, std::uint64_t seed) {
  if (n < 1 || k < 1) throw std::invalid_argument("sample_bg_channel: dimensions must be positive");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("sample_bg_channel: rho outside [0, 1]");
  if (!(variance > 0.0)) throw std::invalid_argument("sample_bg_channel: variance must be positive");

  const CounterRng support_rng(seed, streams::kSupport);
  const CounterRng gain_rng(seed, streams::kGain);
  ChannelMatrix h{CMatrix::Zero(n, k), {}};
  for (int col = 0; col < k; ++col) {
    for (int row = 0; row < n; ++row) {
      const auto idx = static_cast<std::uint64_t>(col) * n + row;
      if (support_rng.uniform(idx) < rho) {
        h.entries(row, col) = gain_rng.complex_normal(idx, variance);
        h.support.emplace_back(row, col);
      }
    }
  }
  return h;
}

double sparsity_level(const ChannelMatrix& h) {
  const double total = static_cast<double>(h.entries.size());
  if (total == 0.0) return 0.0;
  return static_cast<double>(h.support.size()) / total;
}

}  // namespace pbigamp
