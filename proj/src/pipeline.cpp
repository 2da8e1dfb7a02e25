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

#include "pbigamp/pipeline.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pbigamp {

ProjectedSignal subspace_project(const ReceivedMatrix& y, int k) {
  const auto t = y.entries.cols();
  if (k < 1) throw std::invalid_argument("subspace_project: K must be positive");
  if (t < k) throw std::invalid_argument("subspace_project: need T >= K");

  Eigen::JacobiSVD<CMatrix> svd(y.entries, Eigen::ComputeFullV);
  ProjectedSignal out;
  out.singular_values = svd.singularValues();
  // Singular values come back in decreasing order; ties keep index order.
  out.basis = svd.matrixV().leftCols(k);
  out.y_prime = y.entries * out.basis;
  const auto& sv = out.singular_values;
  out.tie_at_cut = sv.size() > k && sv(k - 1) - sv(k) <= 1e-12 * sv(0);
  return out;
}

CVector resolve_phase(const CVector& x_hat_first, const CVector& known_first, const RVector& delta_var) {
  if (x_hat_first.size() != known_first.size() || delta_var.size() != known_first.size())
    throw std::invalid_argument("resolve_phase: length mismatch");
  CVector sigma(known_first.size());
  for (Eigen::Index k = 0; k < known_first.size(); ++k) {
    if (known_first(k) == cplx{}) throw std::invalid_argument("resolve_phase: known symbol must be nonzero");
    if (!(delta_var(k) >= 0.0)) throw std::invalid_argument("resolve_phase: negative variance");
    // Unconjugated; identical for the real-valued pilots used here.
    sigma(k) = known_first(k) / (std::norm(known_first(k)) + delta_var(k)) * x_hat_first(k);
  }
  return sigma;
}

RMatrix correlation_scores(const CMatrix& x_bar, const CMatrix& x_true) {
  if (x_bar.rows() != x_true.rows() || x_bar.cols() != x_true.cols())
    throw std::invalid_argument("resolve_permutation: shape mismatch");
  const Eigen::Index k = x_bar.rows();
  RMatrix score(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double ni = x_bar.row(i).norm();
    for (Eigen::Index j = 0; j < k; ++j) {
      const double nj = x_true.row(j).norm();
      score(i, j) = (ni > 0.0 && nj > 0.0) ? std::abs(x_bar.row(i).dot(x_true.row(j))) / (ni * nj) : 0.0;
    }
  }
  return score;
}

namespace {

// Hungarian method (potentials form) for a square minimum-cost assignment.
// Returns assign[row] = column.
std::vector<int> min_cost_assignment(const RMatrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assign(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) assign[p[j] - 1] = j - 1;
  return assign;
}

}  // namespace

std::vector<int> resolve_permutation(const CMatrix& x_bar, const CMatrix& x_true) {
  const RMatrix score = correlation_scores(x_bar, x_true);
  return min_cost_assignment(-score);
}

DetectionResult detect(const ReceivedMatrix& y, int k, const DetectionPriors& priors, const BigAmpConfig& cfg,
                       const CVector& known_first_column, std::uint64_t seed, DetectOptions opts) {
  const auto t = y.entries.cols();
  if (k < 1) throw std::invalid_argument("detect: K must be positive");
  if (t < 2) throw std::invalid_argument("detect: need at least two time slots");
  if (known_first_column.size() != k) throw std::invalid_argument("detect: known column has wrong length");
  if (priors.symbols.variance_per_row.size() != k)
    throw std::invalid_argument("detect: symbol prior has wrong user count");

  BigAmpConfig run_cfg = cfg;
  run_cfg.noise_variance = y.noise_variance;

  DetectionResult out;
  out.projected = opts.project && t > k;

  Factorization fac;
  CMatrix x_hat;
  RVector delta_var(k);
  if (out.projected) {
    ProjectedSignal proj = subspace_project(y, k);
    out.svd_tie = proj.tie_at_cut;
    GaussPrior symbols = priors.symbols;
    if (opts.rescale_projected_prior)
      symbols.variance_per_row *= static_cast<double>(t) / static_cast<double>(k);
    fac = factorize(proj.y_prime, priors.channel, symbols, run_cfg, seed);
    x_hat = fac.x_hat * proj.basis.adjoint();
    // Back-projected per-entry variance, averaged over the block.
    delta_var = fac.x_var.rowwise().sum() / static_cast<double>(t);
  } else {
    fac = factorize(y.entries, priors.channel, priors.symbols, run_cfg, seed);
    x_hat = fac.x_hat;
    delta_var = fac.x_var.rowwise().mean();
  }

  out.sigma_hat = resolve_phase(x_hat.col(0), known_first_column, delta_var);
  out.x_bar = CMatrix::Zero(k, t - 1);
  out.failed_users.assign(static_cast<std::size_t>(k), false);
  for (int row = 0; row < k; ++row) {
    if (out.sigma_hat(row) == cplx{}) {
      out.failed_users[static_cast<std::size_t>(row)] = true;
      continue;
    }
    out.x_bar.row(row) = x_hat.row(row).tail(t - 1) / out.sigma_hat(row);
  }
  out.h_hat = std::move(fac.h_hat);
  out.permutation.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.permutation[static_cast<std::size_t>(i)] = i;
  out.diagnostics = std::move(fac.diagnostics);
  return out;
}

}  // namespace pbigamp
