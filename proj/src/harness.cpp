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

#include "pbigamp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pbigamp/baselines.hpp"
#include "pbigamp/channel.hpp"
#include "pbigamp/metrics.hpp"
#include "pbigamp/pipeline.hpp"
#include "pbigamp/rng.hpp"
#include "pbigamp/txrx.hpp"

#ifndef PBIGAMP_VERSION
#define PBIGAMP_VERSION "0.0.0"
#endif

namespace pbigamp {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::mse_vs_snr, "mse_vs_snr"},     {ExperimentKind::phase_transition, "phase_transition"},
      {ExperimentKind::success_vs_n, "success_vs_n"}, {ExperimentKind::rate_vs_t, "rate_vs_t"},
      {ExperimentKind::algo_compare, "algo_compare"}, {ExperimentKind::scheme_compare, "scheme_compare"},
  };
  return names;
}

const std::vector<std::pair<Scheme, std::string>>& scheme_names() {
  static const std::vector<std::pair<Scheme, std::string>> names = {
      {Scheme::ideal_csi, "ideal_csi"},
      {Scheme::training_lmmse, "training_lmmse"},
      {Scheme::bigamp, "bigamp"},
      {Scheme::pbigamp, "pbigamp"},
  };
  return names;
}

std::vector<double> range(double start, double step, double stop) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = start + i * step;
    if (v > stop + 1e-9 * std::max(1.0, std::abs(stop))) break;
    out.push_back(v);
  }
  return out;
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_ms(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return kNan;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("bad number: " + s);
  return v;
}

struct SchemeOutcome {
  double nmse_x = kNan;
  double nmse_h = kNan;
  double rate = 0.0;
  bool converged = false;
  int iterations = 0;
};

double channel_nmse(const CMatrix& h_true, const CMatrix& h_est) {
  const double e = h_true.squaredNorm();
  return e > 0.0 ? (h_true - h_est).squaredNorm() / e : kNan;
}

SchemeOutcome run_blind(const ExperimentConfig& cfg, const GridPoint& p, const PowerProfile& profile,
                        const ChannelMatrix& h, const SignalMatrix& x, const ReceivedMatrix& y, std::uint64_t seed,
                        bool project) {
  SchemeOutcome out;
  const DetectionPriors priors{BgPrior(p.rho, 1.0), GaussPrior(profile.row_variances())};
  const CMatrix x_ref = x.entries.rightCols(p.t - 1);
  try {
    DetectionResult det =
        detect(y, p.k, priors, cfg.algorithm, pilot_column(p.k, profile), seed, DetectOptions{project, true});
    const std::vector<int> perm = resolve_permutation(det.x_bar, x_ref);
    const CMatrix aligned = align_rows(det.x_bar, perm);
    out.nmse_x = nmse_x(aligned, x_ref);
    out.nmse_h = h.entries.squaredNorm() > 0.0 ? nmse_h(det.h_hat, h.entries, perm, det.sigma_hat) : kNan;
    const std::vector<double> snr = output_snr(aligned, x_ref);
    out.rate = achievable_rate(snr, p.k, p.t);
    out.converged = det.diagnostics.converged;
    out.iterations = det.diagnostics.total_iterations();
  } catch (const DivergenceError&) {
    // Recorded as the all-zero estimate.
    out.nmse_x = 1.0;
    out.nmse_h = 1.0;
    out.rate = 0.0;
    out.converged = false;
    out.iterations = cfg.algorithm.inner_max * cfg.algorithm.outer_max;
  }
  return out;
}

SchemeOutcome run_training(const ExperimentConfig& cfg, const GridPoint& p, const PowerProfile& profile,
                           const ChannelMatrix& h, const SignalMatrix& x, double sigma2, std::uint64_t seed) {
  const int l = cfg.pilot_length > 0 ? cfg.pilot_length : p.k;
  const TrainingConfig tcfg = TrainingConfig::dft(profile, l);
  // Same channel, data and noise as the blind schemes; the first L slots
  // carry pilots instead of data.
  SignalMatrix xt = x;
  xt.entries.leftCols(l) = tcfg.pilot_matrix();
  const ReceivedMatrix y = awgn_received(h, xt, sigma2, seed);
  const CMatrix x_ref = x.entries.rightCols(p.t - l);
  const TrainingResult res = training_detect(y, tcfg, profile, x_ref);
  SchemeOutcome out;
  out.nmse_x = nmse_x(res.x_hat, x_ref);
  out.nmse_h = channel_nmse(h.entries, res.h_hat);
  out.rate = res.rate;
  out.converged = true;
  return out;
}

SchemeOutcome run_ideal(const GridPoint& p, const PowerProfile& profile, const ChannelMatrix& h,
                        const SignalMatrix& x, const ReceivedMatrix& y) {
  SchemeOutcome out;
  const CMatrix x_ref = x.entries.rightCols(p.t - 1);
  const CMatrix x_hat =
      lmmse_detect(h.entries, y.entries.rightCols(p.t - 1), y.noise_variance, profile.row_variances());
  out.nmse_x = nmse_x(x_hat, x_ref);
  out.nmse_h = 0.0;
  out.rate = ideal_capacity(h.entries, profile, snr_of(profile, y.noise_variance));
  out.converged = true;
  return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kind_names())
    if (k == kind) return name;
  throw std::invalid_argument("unknown experiment kind");
}

std::string to_string(Scheme scheme) {
  for (const auto& [s, name] : scheme_names())
    if (s == scheme) return name;
  throw std::invalid_argument("unknown scheme");
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& [k, n] : kind_names())
    if (n == name) return k;
  throw std::invalid_argument("unknown experiment kind: " + name);
}

Scheme parse_scheme(const std::string& name) {
  for (const auto& [s, n] : scheme_names())
    if (n == name) return s;
  throw std::invalid_argument("unknown scheme: " + name);
}

const std::vector<ExperimentKind>& all_experiment_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> v;
    for (const auto& [k, name] : kind_names()) v.push_back(k);
    return v;
  }();
  return kinds;
}

std::vector<Scheme> default_schemes(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::mse_vs_snr:
    case ExperimentKind::phase_transition:
    case ExperimentKind::success_vs_n:
      return {Scheme::pbigamp};
    case ExperimentKind::rate_vs_t:
    case ExperimentKind::algo_compare:
      return {Scheme::pbigamp, Scheme::bigamp};
    case ExperimentKind::scheme_compare:
      return {Scheme::ideal_csi, Scheme::training_lmmse, Scheme::bigamp, Scheme::pbigamp};
  }
  return {};
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment_kind = kind;
  c.master_seed = 20240601;
  switch (kind) {
    case ExperimentKind::mse_vs_snr:
      c.N = {64, 128, 256};
      c.K = {8};
      c.T = {50};
      c.rho = {0.2};
      c.snr_db = range(0, 10, 50);
      c.trials = 20;
      break;
    case ExperimentKind::phase_transition:
      c.N = {40, 60, 80, 100, 140, 200};
      c.K = {20};
      c.T = {100};
      c.rho = range(0.05, 0.05, 0.5);
      c.snr_db = {40};
      c.trials = 10;
      break;
    case ExperimentKind::success_vs_n:
      c.N = {50, 100, 150, 200, 300, 400};
      c.K = {10, 15, 20};
      c.T = {100};
      c.rho = {0.2};
      c.snr_db = {40};
      c.trials = 20;
      break;
    case ExperimentKind::rate_vs_t:
      c.N = {128};
      c.K = {8};
      c.T = {8, 12, 16};
      c.rho = {0.3};
      c.snr_db = range(0, 10, 50);
      c.trials = 20;
      break;
    case ExperimentKind::algo_compare:
      c.N = {128};
      c.K = {8};
      c.T = {16};
      c.rho = {0.3};
      c.snr_db = range(0, 10, 50);
      c.trials = 20;
      break;
    case ExperimentKind::scheme_compare:
      c.N = {128};
      c.K = {8};
      c.T = {50};
      c.rho = {0.2};
      c.snr_db = range(0, 10, 50);
      c.trials = 20;
      break;
  }
  c.output = to_string(kind) + ".csv";
  return c;
}

std::vector<Scheme> ExperimentConfig::resolved_schemes() const {
  return schemes.empty() ? default_schemes(experiment_kind) : schemes;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("ExperimentConfig: " + m); };
  if (N.empty() || K.empty() || T.empty() || rho.empty() || snr_db.empty()) fail("every grid axis needs a value");
  for (int v : N)
    if (v < 1) fail("N must be positive");
  for (int v : K)
    if (v < 1) fail("K must be positive");
  for (int v : T)
    if (v < 2) fail("T must be at least 2");
  for (double v : rho)
    if (!(v > 0.0 && v <= 1.0)) fail("rho must lie in (0, 1]");
  for (double v : snr_db)
    if (!std::isfinite(v)) fail("snr_db must be finite");
  if (trials < 1) fail("trials must be >= 1");
  if (!(success_threshold > 0.0)) fail("success_threshold must be positive");
  if (pilot_length < 0) fail("pilot_length must be >= 0");
  algorithm.validate();
  const auto sch = resolved_schemes();
  if (std::find(sch.begin(), sch.end(), Scheme::training_lmmse) != sch.end()) {
    for (int k : K) {
      const int l = pilot_length > 0 ? pilot_length : k;
      if (l < k) fail("pilot_length must be >= K");
      for (int t : T)
        if (t <= l) fail("training baseline needs T > pilot length");
    }
  }
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  std::vector<std::string> schemes;
  for (Scheme s : c.resolved_schemes()) schemes.push_back(to_string(s));
  j = nlohmann::json{
      {"experiment_kind", to_string(c.experiment_kind)},
      {"N", c.N},
      {"K", c.K},
      {"T", c.T},
      {"rho", c.rho},
      {"snr_db", c.snr_db},
      {"trials", c.trials},
      {"master_seed", c.master_seed},
      {"algorithm",
       {{"inner_max", c.algorithm.inner_max},
        {"outer_max", c.algorithm.outer_max},
        {"rel_tolerance", c.algorithm.rel_tolerance},
        {"damping", c.algorithm.damping},
        {"variance_floor", c.algorithm.variance_floor}}},
      {"success_threshold", c.success_threshold},
      {"output", c.output},
      {"schemes", schemes},
      {"pilot_length", c.pilot_length},
      {"record_wall_time", c.record_wall_time},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected an object");
  if (!j.contains("experiment_kind")) throw std::invalid_argument("config: missing experiment_kind");
  static const std::set<std::string> known = {"experiment_kind", "N",      "K",       "T",
                                              "rho",             "snr_db", "trials",  "master_seed",
                                              "algorithm",       "success_threshold", "output",
                                              "schemes",         "pilot_length",      "record_wall_time"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");

  ExperimentConfig c = ExperimentConfig::defaults(parse_experiment_kind(j.at("experiment_kind").get<std::string>()));
  try {
    if (j.contains("N")) c.N = j.at("N").get<std::vector<int>>();
    if (j.contains("K")) c.K = j.at("K").get<std::vector<int>>();
    if (j.contains("T")) c.T = j.at("T").get<std::vector<int>>();
    if (j.contains("rho")) c.rho = j.at("rho").get<std::vector<double>>();
    if (j.contains("snr_db")) c.snr_db = j.at("snr_db").get<std::vector<double>>();
    if (j.contains("trials")) c.trials = j.at("trials").get<int>();
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("success_threshold")) c.success_threshold = j.at("success_threshold").get<double>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("pilot_length")) c.pilot_length = j.at("pilot_length").get<int>();
    if (j.contains("record_wall_time")) c.record_wall_time = j.at("record_wall_time").get<bool>();
    if (j.contains("schemes")) {
      c.schemes.clear();
      for (const auto& s : j.at("schemes")) c.schemes.push_back(parse_scheme(s.get<std::string>()));
    }
    if (j.contains("algorithm")) {
      const auto& a = j.at("algorithm");
      static const std::set<std::string> algo_keys = {"inner_max", "outer_max", "rel_tolerance", "damping",
                                                      "variance_floor"};
      for (const auto& [key, value] : a.items())
        if (!algo_keys.count(key)) throw std::invalid_argument("config: unknown algorithm key '" + key + "'");
      if (a.contains("inner_max")) c.algorithm.inner_max = a.at("inner_max").get<int>();
      if (a.contains("outer_max")) c.algorithm.outer_max = a.at("outer_max").get<int>();
      if (a.contains("rel_tolerance")) c.algorithm.rel_tolerance = a.at("rel_tolerance").get<double>();
      if (a.contains("damping")) c.algorithm.damping = a.at("damping").get<double>();
      if (a.contains("variance_floor")) c.algorithm.variance_floor = a.at("variance_floor").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

std::vector<double> parse_axis(const std::string& spec) {
  auto num = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("bad axis value '" + s + "' in '" + spec + "'");
    }
  };
  std::vector<std::string> parts;
  const char sep = spec.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
  if (sep == ':') {
    if (parts.size() != 3) throw std::invalid_argument("range axis must be start:step:stop, got '" + spec + "'");
    const double start = num(parts[0]), step = num(parts[1]), stop = num(parts[2]);
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("empty or unbounded range '" + spec + "'");
    return range(start, step, stop);
  }
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(num(p));
  if (out.empty()) throw std::invalid_argument("empty axis");
  return out;
}

std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg) {
  std::vector<GridPoint> grid;
  for (int n : cfg.N)
    for (int k : cfg.K)
      for (int t : cfg.T)
        for (double r : cfg.rho)
          for (double s : cfg.snr_db) grid.push_back({n, k, t, r, s});
  return grid;
}

std::uint64_t trial_seed(std::uint64_t master_seed, const GridPoint& p, int trial) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(p.n), static_cast<std::uint64_t>(p.k),
                                   static_cast<std::uint64_t>(p.t), double_bits(p.rho),
                                   static_cast<std::uint64_t>(trial)});
}

std::vector<ResultRow> run_trial(const ExperimentConfig& cfg, const GridPoint& p, int trial) {
  return run_trial_seeded(cfg, p, trial, trial_seed(cfg.master_seed, p, trial));
}

std::vector<ResultRow> run_trial_seeded(const ExperimentConfig& cfg, const GridPoint& p, int trial,
                                        std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  const PowerProfile profile = PowerProfile::uniform(p.k);
  const ChannelMatrix h = sample_bg_channel(p.n, p.k, p.rho, 1.0, seed);
  SignalMatrix x = sample_signal(p.k, p.t, profile, seed);
  embed_pilot_column(x, profile);
  const double sigma2 = snr_db_to_sigma2(p.snr_db, profile);
  const ReceivedMatrix y = awgn_received(h, x, sigma2, seed);

  std::vector<ResultRow> rows;
  for (Scheme scheme : cfg.resolved_schemes()) {
    const auto t0 = clock::now();
    SchemeOutcome o;
    switch (scheme) {
      case Scheme::pbigamp:
        o = run_blind(cfg, p, profile, h, x, y, seed, true);
        break;
      case Scheme::bigamp:
        o = run_blind(cfg, p, profile, h, x, y, seed, false);
        break;
      case Scheme::training_lmmse:
        o = run_training(cfg, p, profile, h, x, sigma2, seed);
        break;
      case Scheme::ideal_csi:
        o = run_ideal(p, profile, h, x, y);
        break;
    }
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    ResultRow r;
    r.experiment = to_string(cfg.experiment_kind);
    r.scheme = to_string(scheme);
    r.n = p.n;
    r.k = p.k;
    r.t = p.t;
    r.rho = p.rho;
    r.snr_db = p.snr_db;
    r.trial = trial;
    r.seed = seed;
    r.nmse_x = o.nmse_x;
    r.nmse_h = o.nmse_h;
    r.rate = o.rate;
    r.success = o.nmse_x < cfg.success_threshold;
    r.converged = o.converged;
    r.iterations = o.iterations;
    r.wall_ms = cfg.record_wall_time ? ms : 0.0;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> run(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const std::vector<GridPoint> grid = expand_grid(cfg);
  const std::size_t items = grid.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<std::vector<ResultRow>> slots(items);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < items; i = next++) {
      try {
        const auto& p = grid[i / static_cast<std::size_t>(cfg.trials)];
        const int trial = static_cast<int>(i % static_cast<std::size_t>(cfg.trials));
        slots[i] = run_trial(cfg, p, trial);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  const int pool = std::max(1, std::min<int>(threads, static_cast<int>(items)));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(static_cast<std::size_t>(pool));
    for (int w = 0; w < pool; ++w) workers.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  std::vector<ResultRow> rows;
  for (auto& s : slots)
    for (auto& r : s) rows.push_back(std::move(r));
  return rows;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.scheme << ',' << r.n << ',' << r.k << ',' << r.t << ',' << fmt_double(r.rho) << ','
       << fmt_double(r.snr_db) << ',' << r.trial << ',' << r.seed << ',' << fmt_double(r.nmse_x) << ','
       << fmt_double(r.nmse_h) << ',' << fmt_double(r.rate) << ',' << (r.success ? 1 : 0) << ','
       << (r.converged ? 1 : 0) << ',' << r.iterations << ',' << fmt_ms(r.wall_ms) << '\n';
  }
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

std::vector<ResultRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::runtime_error("read_csv: unexpected header");
  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
    if (f.size() != 16) throw std::runtime_error("read_csv: wrong field count on line " + std::to_string(line_no));
    try {
      ResultRow r;
      r.experiment = f[0];
      r.scheme = f[1];
      r.n = std::stoi(f[2]);
      r.k = std::stoi(f[3]);
      r.t = std::stoi(f[4]);
      r.rho = parse_double(f[5]);
      r.snr_db = parse_double(f[6]);
      r.trial = std::stoi(f[7]);
      r.seed = std::stoull(f[8]);
      r.nmse_x = parse_double(f[9]);
      r.nmse_h = parse_double(f[10]);
      r.rate = parse_double(f[11]);
      r.success = f[12] == "1";
      r.converged = f[13] == "1";
      r.iterations = std::stoi(f[14]);
      r.wall_ms = parse_double(f[15]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw std::runtime_error("read_csv: malformed value on line " + std::to_string(line_no));
    }
  }
  return rows;
}

std::string metadata_path(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return csv_path + ".json";
  return csv_path.substr(0, dot) + ".json";
}

std::string library_version() { return PBIGAMP_VERSION; }

nlohmann::json metadata(const ExperimentConfig& cfg) {
  return nlohmann::json{{"library", "pbigamp"},
                        {"version", library_version()},
                        {"csv_header", kCsvHeader},
                        {"seed_rule", "trial seed = derive_seed(master_seed, N, K, T, rho bits, trial)"},
                        {"config", cfg}};
}

namespace {

std::string key_value(const ResultRow& r, const std::string& key) {
  if (key == "experiment") return r.experiment;
  if (key == "scheme") return r.scheme;
  if (key == "N") return std::to_string(r.n);
  if (key == "K") return std::to_string(r.k);
  if (key == "T") return std::to_string(r.t);
  if (key == "rho") return fmt_double(r.rho);
  if (key == "snr_db") return fmt_double(r.snr_db);
  if (key == "trial") return std::to_string(r.trial);
  if (key == "seed") return std::to_string(r.seed);
  throw std::invalid_argument("aggregate: unknown group-by key '" + key + "'");
}

struct Stats {
  double median = kNan;
  double mean = kNan;
  double ci95 = kNan;
};

Stats stats_of(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  Stats s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.ci95 = 1.96 * std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  } else {
    s.ci95 = 0.0;
  }
  return s;
}

}  // namespace

std::vector<SummaryRow> aggregate(const std::vector<ResultRow>& rows, const std::vector<std::string>& keys) {
  if (rows.empty()) throw std::invalid_argument("aggregate: empty result table");
  for (const auto& k : keys) key_value(rows.front(), k);

  std::vector<std::vector<std::string>> order;
  std::map<std::vector<std::string>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    std::vector<std::string> id;
    for (const auto& k : keys) id.push_back(key_value(r, k));
    auto [it, inserted] = groups.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.push_back(&r);
  }

  std::vector<SummaryRow> out;
  for (const auto& id : order) {
    const auto& members = groups.at(id);
    std::vector<double> nx, nh, rate;
    int succ = 0, conv = 0;
    for (const ResultRow* r : members) {
      nx.push_back(r->nmse_x);
      nh.push_back(r->nmse_h);
      rate.push_back(r->rate);
      succ += r->success ? 1 : 0;
      conv += r->converged ? 1 : 0;
    }
    SummaryRow s;
    for (std::size_t i = 0; i < keys.size(); ++i) s.keys.emplace_back(keys[i], id[i]);
    s.count = static_cast<int>(members.size());
    const Stats sx = stats_of(nx), sh = stats_of(nh), sr = stats_of(rate);
    s.median_nmse_x = sx.median;
    s.mean_nmse_x = sx.mean;
    s.ci95_nmse_x = sx.ci95;
    s.median_nmse_h = sh.median;
    s.mean_nmse_h = sh.mean;
    s.median_rate = sr.median;
    s.mean_rate = sr.mean;
    s.ci95_rate = sr.ci95;
    s.success_rate = static_cast<double>(succ) / s.count;
    s.converged_rate = static_cast<double>(conv) / s.count;
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  if (rows.empty()) return;
  for (const auto& [k, v] : rows.front().keys) os << k << ',';
  os << "count,median_nmse_x,mean_nmse_x,ci95_nmse_x,median_nmse_h,mean_nmse_h,median_rate,mean_rate,ci95_rate,"
        "success_rate,converged_rate\n";
  for (const auto& s : rows) {
    for (const auto& [k, v] : s.keys) os << v << ',';
    os << s.count << ',' << fmt_double(s.median_nmse_x) << ',' << fmt_double(s.mean_nmse_x) << ','
       << fmt_double(s.ci95_nmse_x) << ',' << fmt_double(s.median_nmse_h) << ',' << fmt_double(s.mean_nmse_h) << ','
       << fmt_double(s.median_rate) << ',' << fmt_double(s.mean_rate) << ',' << fmt_double(s.ci95_rate) << ','
       << fmt_double(s.success_rate) << ',' << fmt_double(s.converged_rate) << '\n';
  }
}

}  // namespace pbigamp
