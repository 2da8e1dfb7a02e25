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

#include <cmath>
#include <cstdint>
#include <vector>

#include "pbigamp/channel.hpp"
#include "pbigamp/types.hpp"

namespace pbigamp {

/// Per-user power split alpha_k (summing to one) of a total budget P.
class PowerProfile {
 public:
  PowerProfile(std::vector<double> alphas, double total_power);

  /// alpha_k = 1/K, P = K: unit-variance symbols for every user.
  static PowerProfile uniform(int k);

  int users() const { return static_cast<int>(alphas_.size()); }
  const std::vector<double>& alphas() const { return alphas_; }
  double alpha(int k) const { return alphas_[static_cast<std::size_t>(k)]; }
  double total_power() const { return total_power_; }

  /// Per-entry symbol variance alpha_k * P of every user.
  RVector row_variances() const;

 private:
  std::vector<double> alphas_;
  double total_power_;
};

struct SignalMatrix {
  CMatrix entries;  ///< K x T
};

struct ReceivedMatrix {
  CMatrix entries;  ///< N x T, angular domain
  double noise_variance;
};

SignalMatrix sample_signal(int k, int t, const PowerProfile& profile, std::uint64_t seed);

/// Known first symbol of each user, sqrt(P/K).
CVector pilot_column(int k, const PowerProfile& profile);

/// Overwrites column 0 of X with pilot_column.
void embed_pilot_column(SignalMatrix& x, const PowerProfile& profile);

/// Y = H X + W with W ~ CN(0, sigma2) i.i.d. The noise is drawn at unit
/// variance and scaled, so sweeps over sigma2 share one noise realization.
ReceivedMatrix awgn_received(const ChannelMatrix& h, const SignalMatrix& x, double sigma2,
                             std::uint64_t seed);
ReceivedMatrix awgn_received(const CMatrix& h, const CMatrix& x, double sigma2, std::uint64_t seed);

/// Linear SNR P / sigma2.
double snr_of(const PowerProfile& profile, double sigma2);
double snr_db_to_sigma2(double snr_db, const PowerProfile& profile);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace pbigamp
