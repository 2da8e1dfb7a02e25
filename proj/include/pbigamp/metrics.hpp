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

#include <span>
#include <vector>

#include "pbigamp/types.hpp"

namespace pbigamp {

inline constexpr double kOutputSnrCap = 1e12;
inline constexpr double kDefaultSuccessThreshold = 1e-3;

struct TrialScore {
  double nmse_x = 0.0;
  double nmse_h = 0.0;
  std::vector<double> per_user_output_snr;
  double rate = 0.0;
  bool success = false;
};

/// Reorders estimated rows so that row perm[k] of the result is row k of x.
CMatrix align_rows(const CMatrix& x, const std::vector<int>& perm);

/// (1/K) sum_k ||x_k - xbar_k||^2 / ||x_k||^2 over rows already aligned.
/// Throws std::invalid_argument on shape mismatch or a zero-norm true row.
double nmse_x(const CMatrix& x_bar, const CMatrix& x_true);

/// ||H - H_aligned||_F^2 / ||H||_F^2 after undoing the permutation and the
/// per-user phase/scale factors of the estimate.
double nmse_h(const CMatrix& h_hat, const CMatrix& h_true, const std::vector<int>& perm,
              const CVector& sigma_hat);

/// Per-user ||x_k||^2 / ||x_k - xbar_k||^2, capped at kOutputSnrCap.
std::vector<double> output_snr(const CMatrix& x_bar, const CMatrix& x_true);

/// Blind achievable rate in bits per channel use, floored at zero:
/// sum_k (1 - 1/T) log2(1 + snr_k) - K ceil(log2 K) / T.
double achievable_rate(std::span<const double> per_user_output_snr, int k, double t);

struct DofValues {
  double ideal;
  double training;
  double blind;
};

DofValues dof_values(int k, double t, double eta);

/// Fraction of successful trials. Throws on an empty list.
double success_probability(std::span<const TrialScore> scores);

}  // namespace pbigamp
