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
#include <vector>

#include "pbigamp/bigamp.hpp"
#include "pbigamp/txrx.hpp"
#include "pbigamp/types.hpp"

namespace pbigamp {

/// Y' = Y V1 together with the orthonormal basis V1 (T x K).
struct ProjectedSignal {
  CMatrix y_prime;
  CMatrix basis;
  RVector singular_values;  ///< all singular values of Y, descending
  bool tie_at_cut = false;  ///< K-th and (K+1)-th singular values coincide to 1e-12 relative
};

/// Keeps the K dominant right-singular directions of Y. Requires T >= K.
ProjectedSignal subspace_project(const ReceivedMatrix& y, int k);

/// Phase/scale estimate per user from the known first symbol:
/// sigma_k = x_k1 / (|x_k1|^2 + var_k) * xhat_k1.
CVector resolve_phase(const CVector& x_hat_first, const CVector& known_first, const RVector& delta_var);

/// Bijection with perm[k] = index of the true row matched to estimated row k,
/// maximizing total normalized correlation magnitude.
std::vector<int> resolve_permutation(const CMatrix& x_bar, const CMatrix& x_true);

/// Normalized correlation matrix used by resolve_permutation.
RMatrix correlation_scores(const CMatrix& x_bar, const CMatrix& x_true);

struct DetectionPriors {
  BgPrior channel;
  GaussPrior symbols;
};

struct DetectionResult {
  CMatrix h_hat;            ///< N x K, in the estimator's own row order and scale
  CMatrix x_bar;            ///< K x (T-1), phase-corrected symbols of columns 2..T
  CVector sigma_hat;        ///< per-user phase/scale factors
  std::vector<int> permutation;  ///< identity until aligned against ground truth
  std::vector<bool> failed_users;  ///< sigma_hat_k == 0, phase unresolvable
  bool projected = false;
  bool svd_tie = false;
  FactorizationDiagnostics diagnostics;
};

struct DetectOptions {
  /// When false, factorize Y directly even for T > K (plain BiG-AMP).
  bool project = true;
  /// Scale the symbol prior by T/K on the projected path. X' = X V1 keeps
  /// nearly all of each row's energy (T alpha_k P) in K entries.
  bool rescale_projected_prior = true;
};

/// Blind joint channel/data estimation: projection onto the estimated signal
/// row space, bilinear factorization, back-projection, phase resolution.
DetectionResult detect(const ReceivedMatrix& y, int k, const DetectionPriors& priors, const BigAmpConfig& cfg,
                       const CVector& known_first_column, std::uint64_t seed, DetectOptions opts = {});

}  // namespace pbigamp
