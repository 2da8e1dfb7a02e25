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

#include "pbigamp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pbigamp {

namespace {

void check_perm(const std::vector<int>& perm, Eigen::Index k) {
  if (static_cast<Eigen::Index>(perm.size()) != k) throw std::invalid_argument("permutation has wrong length");
  std::vector<bool> seen(perm.size(), false);
  for (int p : perm) {
    if (p < 0 || p >= k || seen[static_cast<std::size_t>(p)])
      throw std::invalid_argument("permutation is not a bijection");
    seen[static_cast<std::size_t>(p)] = true;
  }
}

}  // namespace

CMatrix align_rows(const CMatrix& x, const std::vector<int>& perm) {
  check_perm(perm, x.rows());
  CMatrix out(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.rows(); ++k) out.row(perm[static_cast<std::size_t>(k)]) = x.row(k);
  return out;
}

double nmse_x(const CMatrix& x_bar, const CMatrix& x_true) {
  if (x_bar.rows() != x_true.rows() || x_bar.cols() != x_true.cols())
    throw std::invalid_argument("nmse_x: shape mismatch");
  if (x_true.rows() == 0) throw std::invalid_argument("nmse_x: no users");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x_true.rows(); ++k) {
    const double energy = x_true.row(k).squaredNorm();
    if (energy == 0.0) throw std::invalid_argument("nmse_x: zero-norm true row");
    acc += (x_true.row(k) - x_bar.row(k)).squaredNorm() / energy;
  }
  return acc / static_cast<double>(x_true.rows());
}

double nmse_h(const CMatrix& h_hat, const CMatrix& h_true, const std::vector<int>& perm,
              const CVector& sigma_hat) {
  if (h_hat.rows() != h_true.rows() || h_hat.cols() != h_true.cols() || sigma_hat.size() != h_true.cols())
    throw std::invalid_argument("nmse_h: shape mismatch");
  check_perm(perm, h_true.cols());
  const double energy = h_true.squaredNorm();
  if (energy == 0.0) throw std::invalid_argument("nmse_h: zero-norm channel");
  // Estimated column k carries h_{perm[k]} / sigma_k.
  CMatrix aligned(h_hat.rows(), h_hat.cols());
  for (Eigen::Index k = 0; k < h_hat.cols(); ++k)
    aligned.col(perm[static_cast<std::size_t>(k)]) = h_hat.col(k) * sigma_hat(k);
  return (h_true - aligned).squaredNorm() / energy;
}

std::vector<double> output_snr(const CMatrix& x_bar, const CMatrix& x_true) {
  if (x_bar.rows() != x_true.rows() || x_bar.cols() != x_true.cols())
    throw std::invalid_argument("output_snr: shape mismatch");
  std::vector<double> snr(static_cast<std::size_t>(x_true.rows()));
  for (Eigen::Index k = 0; k < x_true.rows(); ++k) {
    const double err = (x_true.row(k) - x_bar.row(k)).squaredNorm();
    const double sig = x_true.row(k).squaredNorm();
    snr[static_cast<std::size_t>(k)] = err > 0.0 ? std::min(sig / err, kOutputSnrCap) : kOutputSnrCap;
  }
  return snr;
}

double achievable_rate(std::span<const double> per_user_output_snr, int k, double t) {
  if (k < 1 || !(t > 0.0)) throw std::invalid_argument("achievable_rate: K and T must be positive");
  double rate = 0.0;
  for (double s : per_user_output_snr) {
    if (!(s >= 0.0)) throw std::invalid_argument("achievable_rate: negative output SNR");
    rate += (1.0 - 1.0 / t) * std::log2(1.0 + s);
  }
  const double label_bits = std::ceil(std::log2(static_cast<double>(k)));
  rate -= k * label_bits / t;
  return std::max(rate, 0.0);
}

DofValues dof_values(int k, double t, double eta) {
  if (!(t > 0.0) || !(eta >= 0.0)) throw std::invalid_argument("dof_values: need T > 0 and eta >= 0");
  const double kk = static_cast<double>(k);
  return {kk, kk * (1.0 - kk / t), (1.0 - std::exp(-eta)) * kk * (1.0 - 1.0 / t)};
}

double success_probability(std::span<const TrialScore> scores) {
  if (scores.empty()) throw std::invalid_argument("success_probability: no trials");
  const auto hits = std::count_if(scores.begin(), scores.end(), [](const TrialScore& s) { return s.success; });
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

}  // namespace pbigamp
