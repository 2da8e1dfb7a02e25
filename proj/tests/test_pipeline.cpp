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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "pbigamp/metrics.hpp"
#include "pbigamp/pipeline.hpp"
#include "pbigamp/rng.hpp"

using namespace pbigamp;

namespace {

CMatrix random_matrix(int r, int c, std::uint64_t seed) {
  const CounterRng rng(seed, 0xabc);
  CMatrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = rng.complex_normal(static_cast<std::uint64_t>(j * r + i));
  return m;
}

CMatrix orthonormal_columns(int r, int c, std::uint64_t seed) {
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(r, r, seed));
  return CMatrix(qr.householderQ()).leftCols(c);
}

struct Instance {
  ChannelMatrix h;
  SignalMatrix x;
  ReceivedMatrix y;
};

Instance make_instance(int n, int k, int t, double rho, double sigma2, std::uint64_t seed) {
  const PowerProfile p = PowerProfile::uniform(k);
  Instance in{sample_bg_channel(n, k, rho, 1.0, seed), sample_signal(k, t, p, seed), {}};
  embed_pilot_column(in.x, p);
  in.y = awgn_received(in.h, in.x, sigma2, seed);
  return in;
}

double detect_nmse(const Instance& in, int k, double rho, std::uint64_t seed, DetectOptions opts = {}) {
  const PowerProfile p = PowerProfile::uniform(k);
  const DetectionPriors priors{BgPrior(rho, 1.0), GaussPrior(p.row_variances())};
  const auto det = detect(in.y, k, priors, BigAmpConfig{}, pilot_column(k, p), seed, opts);
  const CMatrix truth = in.x.entries.rightCols(in.x.entries.cols() - 1);
  return nmse_x(align_rows(det.x_bar, resolve_permutation(det.x_bar, truth)), truth);
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("projection of a noise-free rank-K signal is lossless") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const CMatrix y = random_matrix(64, 8, s) * random_matrix(8, 50, s + 100);
    const auto proj = subspace_project(ReceivedMatrix{y, 1.0}, 8);
    CHECK((proj.basis.adjoint() * proj.basis - CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((y - proj.y_prime * proj.basis.adjoint()).norm() <= 1e-10 * y.norm());
    CHECK(proj.singular_values.size() == 50);
    CHECK(!proj.tie_at_cut);
  }
}

TEST_CASE("square case keeps everything") {
  const CMatrix y = random_matrix(20, 6, 4);
  const auto proj = subspace_project(ReceivedMatrix{y, 1.0}, 6);
  CHECK((proj.basis * proj.basis.adjoint() - CMatrix::Identity(6, 6)).norm() < 1e-12);
  CHECK((y - proj.y_prime * proj.basis.adjoint()).norm() < 1e-12 * y.norm());
  CHECK_THROWS_AS(subspace_project(ReceivedMatrix{y, 1.0}, 7), std::invalid_argument);
}

TEST_CASE("recovered basis spans the dominant constructed subspace") {
  const int n = 30, t = 20, k = 4;
  const CMatrix u = orthonormal_columns(n, t, 1);
  const CMatrix v = orthonormal_columns(t, t, 2);
  RVector d(t);
  for (int i = 0; i < t; ++i) d(i) = i < k ? 10.0 - i : 1.0 / (i + 1);
  const CMatrix y = u * d.cast<cplx>().asDiagonal() * v.adjoint();
  const auto proj = subspace_project(ReceivedMatrix{y, 1.0}, k);
  // Cosines of the principal angles are the singular values of V1^H V_top.
  const Eigen::JacobiSVD<CMatrix> cos(proj.basis.adjoint() * v.leftCols(k));
  const double smallest = cos.singularValues().minCoeff();
  CHECK(std::sqrt(std::max(0.0, 1.0 - smallest * smallest)) <= 1e-8);
}

TEST_CASE("tied singular values at the cut are flagged") {
  const int n = 10, t = 6, k = 2;
  const CMatrix u = orthonormal_columns(n, t, 3);
  const CMatrix v = orthonormal_columns(t, t, 4);
  RVector d(t);
  d << 5, 3, 3, 1, 0.5, 0.1;
  const CMatrix y = u * d.cast<cplx>().asDiagonal() * v.adjoint();
  const auto proj = subspace_project(ReceivedMatrix{y, 1.0}, k);
  CHECK(std::abs(proj.singular_values(1) - proj.singular_values(2)) < 1e-12);
  CHECK(proj.tie_at_cut);
}

TEST_CASE("projected noise keeps its per-entry variance") {
  const int n = 200, t = 50, k = 8;
  const double s2 = 0.7;
  const CMatrix w = awgn_received(CMatrix::Zero(n, 1), CMatrix::Zero(1, t), s2, 21).entries;
  const CMatrix v1 = orthonormal_columns(t, k, 22);
  const CMatrix wv = w * v1;
  const double v = wv.squaredNorm() / (n * k);
  CHECK(std::abs(v / s2 - 1.0) < oracle::variance_band(n * k));
}

TEST_CASE("phase resolution") {
  CVector one = CVector::Ones(1);
  CVector xh(1);
  xh(0) = std::polar(1.0, 0.8);
  CHECK(std::abs(resolve_phase(xh, one, RVector::Zero(1))(0) - xh(0)) < 1e-15);
  CHECK(resolve_phase(CVector::Zero(1), one, RVector::Zero(1))(0) == cplx(0, 0));
  xh(0) = cplx(1, 1);
  CHECK(std::abs(resolve_phase(xh, one, RVector::Ones(1))(0) - cplx(0.5, 0.5)) < 1e-15);
  CHECK_THROWS_AS(resolve_phase(xh, CVector::Zero(1), RVector::Zero(1)), std::invalid_argument);
}

TEST_CASE("phase ambiguity is removed exactly when the estimate is exact") {
  const int k = 5, t = 12;
  CMatrix x = random_matrix(k, t, 8);
  x.col(0).setConstant(cplx(1.3, 0));
  CVector sigma(k);
  for (int i = 0; i < k; ++i) sigma(i) = std::polar(0.5 + i, 0.9 * i - 1.0);
  const CMatrix xh = sigma.asDiagonal() * x;
  const CVector est = resolve_phase(xh.col(0), x.col(0), RVector::Zero(k));
  const CMatrix back = est.cwiseInverse().asDiagonal() * xh;
  CHECK((back - x).norm() < 1e-12 * x.norm());
}

TEST_CASE("permutation resolution") {
  const CMatrix x = random_matrix(4, 20, 1);
  std::vector<int> id = {0, 1, 2, 3};
  CHECK(resolve_permutation(x, x) == id);
  CMatrix swapped = x;
  swapped.row(0) = x.row(1);
  swapped.row(1) = x.row(0);
  CHECK(resolve_permutation(swapped, x) == std::vector<int>{1, 0, 2, 3});

  CMatrix with_zero = x;
  with_zero.row(2).setZero();
  const RMatrix sc = correlation_scores(with_zero, x);
  CHECK(sc.row(2).norm() == 0.0);
  auto perm = resolve_permutation(with_zero, x);
  CHECK(std::set<int>(perm.begin(), perm.end()).size() == 4);
}

TEST_CASE("permutation matches brute force for small K") {
  for (int k = 1; k <= 6; ++k) {
    for (std::uint64_t s = 0; s < 15; ++s) {
      const CMatrix a = random_matrix(k, 6, 500 + s * 7 + static_cast<std::uint64_t>(k));
      const CMatrix b = random_matrix(k, 6, 900 + s * 7 + static_cast<std::uint64_t>(k));
      const auto perm = resolve_permutation(a, b);
      REQUIRE(std::set<int>(perm.begin(), perm.end()).size() == static_cast<std::size_t>(k));
      const RMatrix sc = correlation_scores(a, b);
      double value = 0;
      for (int i = 0; i < k; ++i) value += sc(i, perm[static_cast<std::size_t>(i)]);
      CHECK(value == doctest::Approx(oracle::brute_force_assignment(a, b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("single user at the noise floor is recovered") {
  int ok = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Instance in = make_instance(64, 1, 50, 0.2, 1e-8, 300 + s);
    if (in.h.entries.squaredNorm() == 0.0) continue;
    ok += detect_nmse(in, 1, 0.2, s) <= 1e-3 ? 1 : 0;
  }
  MESSAGE("K=1 successes: " << ok << "/10");
  CHECK(ok >= 9);
}

TEST_CASE("noise-floor regime succeeds on a majority of seeds") {
  int ok = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Instance in = make_instance(128, 8, 50, 0.2, 1e-8, 700 + s);
    ok += detect_nmse(in, 8, 0.2, s) <= 1e-3 ? 1 : 0;
  }
  MESSAGE("K=8 noise-floor successes: " << ok << "/50");
  CHECK(ok > 25);
}

TEST_CASE("detect is deterministic and reports its path") {
  const Instance in = make_instance(48, 3, 20, 0.3, 1e-3, 5);
  const PowerProfile p = PowerProfile::uniform(3);
  const DetectionPriors priors{BgPrior(0.3, 1.0), GaussPrior(p.row_variances())};
  const auto a = detect(in.y, 3, priors, BigAmpConfig{}, pilot_column(3, p), 2);
  const auto b = detect(in.y, 3, priors, BigAmpConfig{}, pilot_column(3, p), 2);
  CHECK(a.x_bar == b.x_bar);
  CHECK(a.h_hat == b.h_hat);
  CHECK(a.sigma_hat == b.sigma_hat);
  CHECK(a.projected);
  CHECK(a.x_bar.rows() == 3);
  CHECK(a.x_bar.cols() == 19);
  CHECK(a.permutation == std::vector<int>{0, 1, 2});

  const auto c = detect(in.y, 3, priors, BigAmpConfig{}, pilot_column(3, p), 2, DetectOptions{false, true});
  CHECK(!c.projected);

  const Instance sq = make_instance(48, 3, 3, 0.3, 1e-3, 6);
  CHECK(!detect(sq.y, 3, priors, BigAmpConfig{}, pilot_column(3, p), 2).projected);
  CHECK_THROWS_AS(detect(in.y, 3, priors, BigAmpConfig{}, CVector::Ones(2), 2), std::invalid_argument);
}

TEST_CASE("square problems follow the same path with or without projection enabled") {
  const Instance in = make_instance(48, 3, 3, 0.3, 1e-3, 9);
  const PowerProfile p = PowerProfile::uniform(3);
  const DetectionPriors priors{BgPrior(0.3, 1.0), GaussPrior(p.row_variances())};
  const auto a = detect(in.y, 3, priors, BigAmpConfig{}, pilot_column(3, p), 4, DetectOptions{true, true});
  const auto b = detect(in.y, 3, priors, BigAmpConfig{}, pilot_column(3, p), 4, DetectOptions{false, true});
  CHECK(a.x_bar == b.x_bar);
}

}
