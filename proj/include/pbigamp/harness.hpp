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
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbigamp/bigamp.hpp"

namespace pbigamp {

enum class ExperimentKind { mse_vs_snr, phase_transition, success_vs_n, rate_vs_t, algo_compare, scheme_compare };

enum class Scheme { ideal_csi, training_lmmse, bigamp, pbigamp };

std::string to_string(ExperimentKind kind);
std::string to_string(Scheme scheme);
ExperimentKind parse_experiment_kind(const std::string& name);  // throws std::invalid_argument
Scheme parse_scheme(const std::string& name);
const std::vector<ExperimentKind>& all_experiment_kinds();

/// Schemes run by default for an experiment kind.
std::vector<Scheme> default_schemes(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind experiment_kind = ExperimentKind::mse_vs_snr;
  std::vector<int> N;
  std::vector<int> K;
  std::vector<int> T;
  std::vector<double> rho;
  std::vector<double> snr_db;
  int trials = 1;
  std::uint64_t master_seed = 1;
  BigAmpConfig algorithm;
  double success_threshold = 1e-3;
  std::string output;
  std::vector<Scheme> schemes;  ///< empty: default_schemes(experiment_kind)
  int pilot_length = 0;         ///< training baseline; 0 means K
  bool record_wall_time = true; ///< false writes wall_ms = 0 for byte-reproducible output

  /// Desk-scale defaults for each kind.
  static ExperimentConfig defaults(ExperimentKind kind);

  std::vector<Scheme> resolved_schemes() const;
  void validate() const;  // throws std::invalid_argument
};

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
/// Reads a config; keys absent from `j` keep the kind's defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Parses "a:step:b" (inclusive), "a,b,c", or a single number.
std::vector<double> parse_axis(const std::string& spec);

struct GridPoint {
  int n;
  int k;
  int t;
  double rho;
  double snr_db;
};

/// Canonical order: N outermost, then K, T, rho, snr_db.
std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg);

/// Seed of one trial. SNR is deliberately excluded so every SNR of a sweep
/// sees the same channel, symbols and unit-variance noise.
std::uint64_t trial_seed(std::uint64_t master_seed, const GridPoint& p, int trial);

struct ResultRow {
  std::string experiment;
  std::string scheme;
  int n = 0;
  int k = 0;
  int t = 0;
  double rho = 0.0;
  double snr_db = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double nmse_x = 0.0;
  double nmse_h = 0.0;
  double rate = 0.0;
  bool success = false;
  bool converged = false;
  int iterations = 0;
  double wall_ms = 0.0;
};

/// Every scheme on one (grid point, trial). Detector failures are recorded
/// in the rows, never thrown.
std::vector<ResultRow> run_trial(const ExperimentConfig& cfg, const GridPoint& p, int trial);
/// Same, with an explicit seed (e.g. to share draws across grid points).
std::vector<ResultRow> run_trial_seeded(const ExperimentConfig& cfg, const GridPoint& p, int trial,
                                        std::uint64_t seed);

/// Whole sweep on a bounded worker pool. Output order is canonical (grid
/// point, then trial, then scheme) regardless of `threads`.
std::vector<ResultRow> run(const ExperimentConfig& cfg, int threads = 1);

inline constexpr const char* kCsvHeader =
    "experiment,scheme,N,K,T,rho,snr_db,trial,seed,nmse_x,nmse_h,rate,success,converged,iterations,wall_ms";

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::string to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& is);  // throws std::runtime_error on malformed input

/// Sidecar path: same basename as the CSV with a .json extension.
std::string metadata_path(const std::string& csv_path);
nlohmann::json metadata(const ExperimentConfig& cfg);
std::string library_version();

struct SummaryRow {
  std::vector<std::pair<std::string, std::string>> keys;
  int count = 0;
  double median_nmse_x = 0.0;
  double mean_nmse_x = 0.0;
  double ci95_nmse_x = 0.0;
  double median_nmse_h = 0.0;
  double mean_nmse_h = 0.0;
  double median_rate = 0.0;
  double mean_rate = 0.0;
  double ci95_rate = 0.0;
  double success_rate = 0.0;
  double converged_rate = 0.0;
};

/// Groups rows by the named CSV columns (first-appearance order). Metrics
/// ignore NaN entries; success counts every row. Throws std::invalid_argument
/// on an empty table or an unknown key.
std::vector<SummaryRow> aggregate(const std::vector<ResultRow>& rows, const std::vector<std::string>& keys);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

}  // namespace pbigamp
