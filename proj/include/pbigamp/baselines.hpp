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

#include <vector>

#include "pbigamp/txrx.hpp"
#include "pbigamp/types.hpp"

namespace pbigamp {

/// Pilot block for the training baseline: K x L with mutually orthogonal
/// rows, row k carrying energy alpha_k P L.
class TrainingConfig {
 public:
  TrainingConfig(CMatrix pilot_matrix);

  /// Scaled DFT rows of length `pilot_length` (>= K).
  static TrainingConfig dft(const PowerProfile& profile, int pilot_length);

  int pilot_length() const { return static_cast<int>(pilots_.cols()); }
  int users() const { return static_cast<int>(pilots_.rows()); }
  const CMatrix& pilot_matrix() const { return pilots_; }

 private:
  CMatrix pilots_;
};

/// log2 det(I_K + snr Lambda H^H H), Lambda = diag(alpha).
double ideal_capacity(const CMatrix& h, const PowerProfile& profile, double snr);

struct TrainingResult {
  CMatrix h_hat;                   ///< least-squares channel estimate
  CMatrix x_hat;                   ///< LMMSE data estimate, K x (T - L)
  std::vector<double> per_user_output_snr;
  double rate = 0.0;               ///< sum_k ((T - L)/T) log2(1 + snr_k)
};

/// Pilot-based coherent detection: LS channel estimate from the first L
/// columns of Y, LMMSE detection of the remaining T - L columns, scored
/// against `x_data_true` (K x (T - L)).
TrainingResult training_detect(const ReceivedMatrix& y, const TrainingConfig& tcfg, const PowerProfile& profile,
                               const CMatrix& x_data_true);

/// LMMSE symbol estimate (H^H H + sigma2 C^-1)^-1 H^H Y with C = diag(row_var).
CMatrix lmmse_detect(const CMatrix& h, const CMatrix& y, double sigma2, const RVector& row_var);

}  // namespace pbigamp
