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

#include "pbigamp/txrx.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pbigamp/rng.hpp"

namespace pbigamp {

PowerProfile::PowerProfile(std::vector<double> alphas, double total_power)
    : alphas_(std::move(alphas)), total_power_(total_power) {
  if (alphas_.empty()) throw std::invalid_argument("PowerProfile: need at least one user");
  if (!(total_power_ > 0.0)) throw std::invalid_argument("PowerProfile: total power must be positive");
  for (double a : alphas_)
    if (!(a >= 0.0)) throw std::invalid_argument("PowerProfile: negative power fraction");
  const double sum = std::accumulate(alphas_.begin(), alphas_.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("PowerProfile: fractions must sum to one");
}

PowerProfile PowerProfile::uniform(int k) {
  if (k < 1) throw std::invalid_argument("PowerProfile: need at least one user");
  return PowerProfile(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k), static_cast<double>(k));
}

RVector PowerProfile::row_variances() const {
  RVector v(users());
  for (int k = 0; k < users(); ++k) v(k) = alpha(k) * total_power_;
  return v;
}

SignalMatrix sample_signal(int k, int t, const PowerProfile& profile, std::uint64_t seed) {
  if (k < 1 || t < 1) throw std::invalid_argument("sample_signal: dimensions must be positive");
  if (profile.users() != k) throw std::invalid_argument("sample_signal: profile has wrong user count");
  const CounterRng rng(seed, streams::kSignal);
  const RVector var = profile.row_variances();
  SignalMatrix x{CMatrix(k, t)};
  for (int col = 0; col < t; ++col)
    for (int row = 0; row < k; ++row)
      x.entries(row, col) =
          var(row) > 0.0 ? rng.complex_normal(static_cast<std::uint64_t>(col) * k + row, var(row)) : cplx{};
  return x;
}

CVector pilot_column(int k, const PowerProfile& profile) {
  if (profile.users() != k) throw std::invalid_argument("pilot_column: profile has wrong user count");
  return CVector::Constant(k, cplx(std::sqrt(profile.total_power() / k), 0.0));
}

void embed_pilot_column(SignalMatrix& x, const PowerProfile& profile) {
  x.entries.col(0) = pilot_column(static_cast<int>(x.entries.rows()), profile);
}

ReceivedMatrix awgn_received(const CMatrix& h, const CMatrix& x, double sigma2, std::uint64_t seed) {
  if (h.cols() != x.rows()) throw std::invalid_argument("awgn_received: inner dimensions disagree");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("awgn_received: noise variance must be positive");
  const CounterRng rng(seed, streams::kNoise);
  const double scale = std::sqrt(sigma2);
  CMatrix y = h * x;
  for (Eigen::Index col = 0; col < y.cols(); ++col)
    for (Eigen::Index row = 0; row < y.rows(); ++row)
      y(row, col) += scale * rng.complex_normal(static_cast<std::uint64_t>(col * y.rows() + row));
  return {std::move(y), sigma2};
}

ReceivedMatrix awgn_received(const ChannelMatrix& h, const SignalMatrix& x, double sigma2,
                             std::uint64_t seed) {
  return awgn_received(h.entries, x.entries, sigma2, seed);
}

double snr_of(const PowerProfile& profile, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("snr_of: noise variance must be positive");
  return profile.total_power() / sigma2;
}

double snr_db_to_sigma2(double snr_db, const PowerProfile& profile) {
  return profile.total_power() / from_db(snr_db);
}

}  // namespace pbigamp
