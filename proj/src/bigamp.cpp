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

#include "pbigamp/bigamp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pbigamp/rng.hpp"

namespace pbigamp {

BgPrior::BgPrior(double rho_, double variance_) : rho(rho_), variance(variance_) {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("BgPrior: rho must lie in (0, 1]");
  if (!(variance > 0.0)) throw std::invalid_argument("BgPrior: variance must be positive");
}

GaussPrior::GaussPrior(RVector v) : variance_per_row(std::move(v)) {
  if (variance_per_row.size() == 0) throw std::invalid_argument("GaussPrior: empty");
  for (double x : variance_per_row)
    if (!(x > 0.0)) throw std::invalid_argument("GaussPrior: variances must be positive");
}

void BigAmpConfig::validate() const {
  if (inner_max < 1 || outer_max < 1) throw std::invalid_argument("BigAmpConfig: iteration limits must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("BigAmpConfig: damping must lie in (0, 1]");
  if (!(rel_tolerance >= 0.0)) throw std::invalid_argument("BigAmpConfig: negative tolerance");
  if (!(variance_floor > 0.0)) throw std::invalid_argument("BigAmpConfig: variance floor must be positive");
  if (!(noise_variance > 0.0)) throw std::invalid_argument("BigAmpConfig: noise variance must be positive");
}

int FactorizationDiagnostics::total_iterations() const {
  return std::accumulate(iterations.begin(), iterations.end(), 0);
}

ScalarPosterior bg_posterior(cplx q_hat, double v_q, const BgPrior& prior, double variance_floor) {
  if (!(v_q > 0.0)) throw std::invalid_argument("bg_posterior: v_q must be positive");
  const double s2 = prior.variance;
  const double total = s2 + v_q;
  // Posterior probability that the entry is active.
  double pi = 1.0;
  if (prior.rho < 1.0) {
    const double expo = -std::norm(q_hat) * s2 / (v_q * total);
    const double odds = (1.0 - prior.rho) / prior.rho * (total / v_q) * std::exp(expo);
    pi = 1.0 / (1.0 + odds);
  }
  const cplx g = q_hat * (s2 / total);
  const double wiener_var = s2 * v_q / total;
  const double var = pi * wiener_var + pi * (1.0 - pi) * std::norm(g);
  return {pi * g, std::max(var, variance_floor)};
}

ScalarPosterior gaussian_posterior(cplx r_hat, double v_r, double tau) {
  if (!(v_r > 0.0) || !(tau > 0.0)) throw std::invalid_argument("gaussian_posterior: variances must be positive");
  const double total = tau + v_r;
  return {r_hat * (tau / total), tau * v_r / total};
}

namespace {

bool all_finite(const CMatrix& m) { return m.allFinite(); }
bool all_finite(const RMatrix& m) { return m.allFinite(); }

}  // namespace

BigAmpEngine::BigAmpEngine(CMatrix y, BgPrior h_prior, GaussPrior x_prior, BigAmpConfig cfg,
                           std::uint64_t seed)
    : y_(std::move(y)), h_prior_(h_prior), x_prior_(std::move(x_prior)), cfg_(cfg) {
  cfg_.validate();
  if (!y_.allFinite()) throw std::invalid_argument("BigAmpEngine: observation contains non-finite values");
  const Eigen::Index n = y_.rows();
  const Eigen::Index t = y_.cols();
  const Eigen::Index k = x_prior_.variance_per_row.size();
  if (n < 1 || t < 1) throw std::invalid_argument("BigAmpEngine: empty observation");
  y_energy_ = y_.squaredNorm();

  const CounterRng rng(seed, streams::kInit);
  st_.x_mean.resize(k, t);
  st_.x_var.resize(k, t);
  for (Eigen::Index col = 0; col < t; ++col) {
    for (Eigen::Index row = 0; row < k; ++row) {
      const double tau = x_prior_.variance_per_row(row);
      st_.x_mean(row, col) = rng.complex_normal(static_cast<std::uint64_t>(col * k + row), tau);
      st_.x_var(row, col) = tau;
    }
  }
  st_.h_mean = CMatrix::Zero(n, k);
  st_.h_var = RMatrix::Ones(n, k);
  st_.p_bar = CMatrix::Zero(n, t);
  st_.p_bar_var = RMatrix::Zero(n, t);
  st_.p_hat = CMatrix::Zero(n, t);
  st_.p_var = RMatrix::Zero(n, t);
  st_.z_mean = CMatrix::Zero(n, t);
  st_.z_var = RMatrix::Zero(n, t);
  st_.s_mean = CMatrix::Zero(n, t);
  st_.s_var = RMatrix::Zero(n, t);
  st_.q_mean = CMatrix::Zero(n, k);
  st_.q_var = RMatrix::Zero(n, k);
  st_.r_mean = CMatrix::Zero(k, t);
  st_.r_var = RMatrix::Zero(k, t);
}

void BigAmpEngine::damp(CMatrix& cur, const CMatrix& prev) const {
  cur = cfg_.damping * cur + (1.0 - cfg_.damping) * prev;
}

void BigAmpEngine::damp(RMatrix& cur, const RMatrix& prev) const {
  cur = cfg_.damping * cur + (1.0 - cfg_.damping) * prev;
}

bool BigAmpEngine::step() {
  const bool first = iter_ == 0;
  const double sigma2 = cfg_.noise_variance;
  const double floor = cfg_.variance_floor;

  const RMatrix h_abs2 = st_.h_mean.cwiseAbs2();
  const RMatrix x_abs2 = st_.x_mean.cwiseAbs2();

  // Plug-in product and its variances.
  RMatrix p_bar_var = h_abs2 * st_.x_var + st_.h_var * x_abs2;
  CMatrix p_bar = st_.h_mean * st_.x_mean;
  RMatrix p_var = p_bar_var + st_.h_var * st_.x_var;
  p_var = p_var.cwiseMax(floor);

  last_residual_ = y_energy_ > 0.0 ? (y_ - p_bar).squaredNorm() / y_energy_ : 0.0;
  // p_bar is left undamped: it feeds the Onsager term, and damping it there
  // breaks the iteration (observed divergence at T' = K).
  const CMatrix p_bar_prev = st_.p_bar;

  // Onsager correction with the previous scaled residual.
  CMatrix p_hat = p_bar - (st_.s_mean.array() * p_bar_var.array()).matrix();

  // Output channel is AWGN with variance sigma2; the generic
  // (1 - v_z/v_p)/v_p and (z - p)/v_p reduce to 1/(v_p + sigma2) and
  // (y - p)/(v_p + sigma2), which avoid cancellation when v_p << sigma2.
  const Eigen::ArrayXXd total = p_var.array() + sigma2;
  st_.z_var = (p_var.array() * sigma2 / total).matrix();
  const CMatrix innov = y_ - p_hat;
  st_.z_mean = ((p_var.array() / total).cast<cplx>() * innov.array()).matrix() + p_hat;
  RMatrix s_var = total.inverse().matrix();
  CMatrix s_mean = (innov.array() / total.cast<cplx>()).matrix();
  if (!first) {
    damp(s_mean, st_.s_mean);
    damp(s_var, st_.s_var);
  }

  // Messages toward the channel entries.
  const RMatrix q_prec = s_var * x_abs2.transpose();
  const RMatrix vs_vx = s_var * st_.x_var.transpose();
  const CMatrix s_xh = s_mean * st_.x_mean.adjoint();
  // Messages toward the symbols.
  const RMatrix r_prec = h_abs2.transpose() * s_var;
  const RMatrix vh_vs = st_.h_var.transpose() * s_var;
  const CMatrix hh_s = st_.h_mean.adjoint() * s_mean;

  const Eigen::Index n = st_.h_mean.rows();
  const Eigen::Index k = st_.h_mean.cols();
  const Eigen::Index t = st_.x_mean.cols();

  CMatrix h_new = st_.h_mean;
  RMatrix h_var_new = st_.h_var;
  for (Eigen::Index col = 0; col < k; ++col) {
    for (Eigen::Index row = 0; row < n; ++row) {
      const double prec = q_prec(row, col);
      // An entry with zero precision receives no message and keeps its estimate.
      if (!(prec > 0.0) || !std::isfinite(prec)) continue;
      const double vq = std::max(1.0 / prec, floor);
      // Gain clipped to [0, 1]; early iterates (v_h = 1, h = 0) otherwise
      // produce large negative gains that blow the estimate up.
      const double gain = std::clamp(1.0 - vq * vs_vx(row, col), 0.0, 1.0);
      const cplx q = st_.h_mean(row, col) * gain + vq * s_xh(row, col);
      st_.q_var(row, col) = vq;
      st_.q_mean(row, col) = q;
      const auto post = bg_posterior(q, vq, h_prior_, floor);
      h_new(row, col) = post.mean;
      h_var_new(row, col) = post.var;
    }
  }

  CMatrix x_new = st_.x_mean;
  RMatrix x_var_new = st_.x_var;
  for (Eigen::Index col = 0; col < t; ++col) {
    for (Eigen::Index row = 0; row < k; ++row) {
      const double prec = r_prec(row, col);
      if (!(prec > 0.0) || !std::isfinite(prec)) continue;
      const double vr = std::max(1.0 / prec, floor);
      const double gain = std::clamp(1.0 - vr * vh_vs(row, col), 0.0, 1.0);
      const cplx r = st_.x_mean(row, col) * gain + vr * hh_s(row, col);
      st_.r_var(row, col) = vr;
      st_.r_mean(row, col) = r;
      const auto post = gaussian_posterior(r, vr, x_prior_.variance_per_row(row));
      x_new(row, col) = post.mean;
      x_var_new(row, col) = std::max(post.var, floor);
    }
  }
  if (!first) {
    damp(h_new, st_.h_mean);
    damp(x_new, st_.x_mean);
  }

  st_.p_bar = std::move(p_bar);
  st_.p_bar_var = std::move(p_bar_var);
  st_.p_hat = std::move(p_hat);
  st_.p_var = std::move(p_var);
  st_.s_mean = std::move(s_mean);
  st_.s_var = std::move(s_var);
  st_.h_mean = std::move(h_new);
  st_.h_var = std::move(h_var_new);
  st_.x_mean = std::move(x_new);
  st_.x_var = std::move(x_var_new);

  const bool can_stop = iter_ > 0;
  ++iter_;
  if (!can_stop) return false;
  const double change = (st_.p_bar - p_bar_prev).squaredNorm();
  return change == 0.0 || change < cfg_.rel_tolerance * st_.p_bar.squaredNorm();
}

void BigAmpEngine::restart() {
  st_.h_mean.setZero();
  st_.h_var.setOnes();
  st_.s_mean.setZero();
  st_.s_var.setZero();
  st_.p_bar.setZero();
  iter_ = 0;
}

bool BigAmpEngine::finite() const {
  return all_finite(st_.h_mean) && all_finite(st_.h_var) && all_finite(st_.x_mean) &&
         all_finite(st_.x_var) && all_finite(st_.s_mean) && all_finite(st_.s_var) &&
         all_finite(st_.p_bar);
}

Factorization factorize(const CMatrix& yp, const BgPrior& h_prior, const GaussPrior& x_prior,
                        const BigAmpConfig& cfg, std::uint64_t seed) {
  BigAmpEngine engine(yp, h_prior, x_prior, cfg, seed);
  FactorizationDiagnostics diag;

  for (int m = 0; m < cfg.outer_max; ++m) {
    if (m > 0) engine.restart();
    int used = 0;
    bool converged = false;
    bool diverged = false;
    for (int l = 0; l < cfg.inner_max; ++l) {
      BigAmpState snapshot = engine.state();
      converged = engine.step();
      ++used;
      if (!engine.finite()) {
        engine.restore(snapshot);
        diverged = true;
        converged = false;
        break;
      }
      diag.residual_trace.push_back(engine.last_residual());
      if (converged) break;
    }
    diag.iterations.push_back(used);
    diag.restart_diverged.push_back(diverged);
    diag.converged = converged;
  }
  if (std::all_of(diag.restart_diverged.begin(), diag.restart_diverged.end(), [](bool d) { return d; }))
    throw DivergenceError("factorize: every restart produced non-finite values");

  Factorization out;
  out.state = engine.state();
  out.h_hat = out.state.h_mean;
  out.x_hat = out.state.x_mean;
  out.x_var = out.state.x_var;
  const double energy = yp.squaredNorm();
  out.diagnostics = std::move(diag);
  out.diagnostics.final_residual = energy > 0.0 ? (yp - out.h_hat * out.x_hat).squaredNorm() / energy : 0.0;
  return out;
}

}  // namespace pbigamp
