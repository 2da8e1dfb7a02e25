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

#include "pbigamp/baselines.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pbigamp/metrics.hpp"

namespace pbigamp {

TrainingConfig::TrainingConfig(CMatrix pilot_matrix) : pilots_(std::move(pilot_matrix)) {
  if (pilots_.rows() < 1 || pilots_.cols() < pilots_.rows())
    throw std::invalid_argument("TrainingConfig: need pilot_length >= K >= 1");
  const CMatrix gram = pilots_ * pilots_.adjoint();
  const double scale = gram.diagonal().real().maxCoeff();
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
      if (i != j && std::abs(gram(i, j)) > 1e-10 * scale)
        throw std::invalid_argument("TrainingConfig: pilot rows are not orthogonal");
}

TrainingConfig TrainingConfig::dft(const PowerProfile& profile, int pilot_length) {
  const int k = profile.users();
  if (pilot_length < k) throw std::invalid_argument("TrainingConfig: pilot length must be at least K");
  CMatrix p(k, pilot_length);
  for (int row = 0; row < k; ++row) {
    const double amp = std::sqrt(profile.alpha(row) * profile.total_power());
    for (int col = 0; col < pilot_length; ++col) {
      const long long idx = (static_cast<long long>(row) * col) % pilot_length;
      p(row, col) = std::polar(amp, -2.0 * std::numbers::pi * static_cast<double>(idx) / pilot_length);
    }
  }
  // Zero-power users give zero rows, which are trivially orthogonal.
  return TrainingConfig(std::move(p));
}

double ideal_capacity(const CMatrix& h, const PowerProfile& profile, double snr) {
  if (!(snr > 0.0)) throw std::invalid_argument("ideal_capacity: SNR must be positive");
  if (h.cols() != profile.users()) throw std::invalid_argument("ideal_capacity: user count mismatch");
  // Symmetrized form I + snr L^1/2 H^H H L^1/2 has the same determinant and is
  // Hermitian positive definite, so Cholesky gives the log-determinant.
  RVector root(profile.users());
  for (int k = 0; k < profile.users(); ++k) root(k) = std::sqrt(profile.alpha(k));
  const CMatrix g = h * root.cast<cplx>().asDiagonal();
  CMatrix m = snr * (g.adjoint() * g);
  m.diagonal().array() += 1.0;
  Eigen::LLT<CMatrix> llt(m);
  if (llt.info() != Eigen::Success) throw std::runtime_error("ideal_capacity: factorization failed");
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) logdet += std::log2(std::real(llt.matrixL()(i, i)));
  return 2.0 * logdet;
}

CMatrix lmmse_detect(const CMatrix& h, const CMatrix& y, double sigma2, const RVector& row_var) {
  if (h.rows() != y.rows() || h.cols() != row_var.size()) throw std::invalid_argument("lmmse_detect: shape mismatch");
  CMatrix a = h.adjoint() * h;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    if (!(row_var(k) > 0.0)) throw std::invalid_argument("lmmse_detect: row variances must be positive");
    a(k, k) += sigma2 / row_var(k);
  }
  return a.ldlt().solve(h.adjoint() * y);
}

TrainingResult training_detect(const ReceivedMatrix& y, const TrainingConfig& tcfg, const PowerProfile& profile,
                               const CMatrix& x_data_true) {
  const int l = tcfg.pilot_length();
  const auto t = y.entries.cols();
  const int k = tcfg.users();
  if (t <= l) throw std::invalid_argument("training_detect: need T > pilot length");
  if (profile.users() != k) throw std::invalid_argument("training_detect: user count mismatch");
  if (x_data_true.rows() != k || x_data_true.cols() != t - l)
    throw std::invalid_argument("training_detect: reference data has wrong shape");

  const CMatrix& p = tcfg.pilot_matrix();
  const CMatrix gram = p * p.adjoint();
  Eigen::LDLT<CMatrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12)
    throw std::runtime_error("training_detect: singular pilot Gram matrix");

  TrainingResult out;
  // H_ls = Y_p P^H (P P^H)^-1
  const CMatrix yp_ph = y.entries.leftCols(l) * p.adjoint();
  out.h_hat = ldlt.solve(yp_ph.adjoint()).adjoint();
  out.x_hat = lmmse_detect(out.h_hat, y.entries.rightCols(t - l), y.noise_variance, profile.row_variances());
  out.per_user_output_snr = output_snr(out.x_hat, x_data_true);
  const double frac = static_cast<double>(t - l) / static_cast<double>(t);
  for (double s : out.per_user_output_snr) out.rate += frac * std::log2(1.0 + s);
  return out;
}

}  // namespace pbigamp
