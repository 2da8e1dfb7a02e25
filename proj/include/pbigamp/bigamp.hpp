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
#include <stdexcept>
#include <vector>

#include "pbigamp/types.hpp"

namespace pbigamp {

inline constexpr double kDefaultVarianceFloor = 1e-13;

/// Bernoulli-Gaussian prior on each channel entry:
/// (1 - rho) delta(h) + rho CN(h; 0, variance).
struct BgPrior {
  double rho;
  double variance;

  BgPrior(double rho, double variance);
};

/// Zero-mean Gaussian prior on the projected symbols, one variance per row.
struct GaussPrior {
  RVector variance_per_row;

  explicit GaussPrior(RVector variance_per_row);
};

struct BigAmpConfig {
  int inner_max = 100;           // L_max
  int outer_max = 10;            // M_max
  double rel_tolerance = 1e-8;   // stopping threshold on the change of p_bar
  double damping = 0.33;         // weight of the new value, in (0, 1]; applied to s, v_s and the posterior means
  double variance_floor = kDefaultVarianceFloor;
  double noise_variance = 1.0;

  void validate() const;  // throws std::invalid_argument
};

/// Every per-entry quantity carried by the iteration. Shapes: h_* and q_*
/// are N x K, x_* and r_* are K x T', everything else N x T'.
struct BigAmpState {
  CMatrix h_mean;
  RMatrix h_var;
  CMatrix x_mean;
  RMatrix x_var;
  CMatrix p_bar;
  RMatrix p_bar_var;
  CMatrix p_hat;
  RMatrix p_var;
  CMatrix z_mean;
  RMatrix z_var;
  CMatrix s_mean;
  RMatrix s_var;
  CMatrix q_mean;
  RMatrix q_var;
  CMatrix r_mean;
  RMatrix r_var;
};

struct FactorizationDiagnostics {
  std::vector<int> iterations;        ///< inner iterations used by each restart
  std::vector<bool> restart_diverged;
  std::vector<double> residual_trace; ///< ||Y - p_bar||^2 / ||Y||^2 at every inner iteration
  double final_residual = 0.0;        ///< ||Y - H X||^2 / ||Y||^2 of the returned estimate
  bool converged = false;             ///< last restart met the stopping test

  int total_iterations() const;
};

struct ScalarPosterior {
  cplx mean;
  double var;
};

/// MMSE estimate of h ~ BG(rho, variance) observed as q = h + CN(0, v_q).
ScalarPosterior bg_posterior(cplx q_hat, double v_q, const BgPrior& prior,
                             double variance_floor = kDefaultVarianceFloor);

/// MMSE estimate of x ~ CN(0, tau) observed as r = x + CN(0, v_r).
ScalarPosterior gaussian_posterior(cplx r_hat, double v_r, double tau);

/// Raised when every restart of a factorization produced non-finite values.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stepwise bilinear AMP on Y ~ H X. Exposed so tests can inspect the state
/// between iterations; `factorize` is the normal entry point.
class BigAmpEngine {
 public:
  BigAmpEngine(CMatrix y, BgPrior h_prior, GaussPrior x_prior, BigAmpConfig cfg, std::uint64_t seed);

  /// One inner iteration. Returns true once the stopping test is met.
  bool step();

  /// Outer restart: keep the symbol estimates, reset the channel estimate.
  void restart();

  bool finite() const;
  const BigAmpState& state() const { return st_; }
  /// Rolls back to a previously captured state (used after divergence).
  void restore(const BigAmpState& snapshot) { st_ = snapshot; }
  int iteration() const { return iter_; }
  double last_residual() const { return last_residual_; }

 private:
  void damp(CMatrix& cur, const CMatrix& prev) const;
  void damp(RMatrix& cur, const RMatrix& prev) const;

  CMatrix y_;
  BgPrior h_prior_;
  GaussPrior x_prior_;
  BigAmpConfig cfg_;
  double y_energy_;
  BigAmpState st_;
  int iter_ = 0;  // inner iterations since the last restart
  double last_residual_ = 0.0;
};

struct Factorization {
  CMatrix h_hat;
  CMatrix x_hat;
  RMatrix x_var;
  BigAmpState state;
  FactorizationDiagnostics diagnostics;
};

/// Runs the inner loop to convergence (or inner_max), then up to outer_max
/// restarts. Throws std::invalid_argument on bad shapes/config and
/// DivergenceError when no restart stayed finite.
Factorization factorize(const CMatrix& yp, const BgPrior& h_prior, const GaussPrior& x_prior,
                        const BigAmpConfig& cfg, std::uint64_t seed);

}  // namespace pbigamp
