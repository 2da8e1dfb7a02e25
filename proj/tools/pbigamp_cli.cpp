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

// Command-line front end for the experiment harness.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pbigamp/harness.hpp"
#include "pbigamp/metrics.hpp"

namespace {

using pbigamp::ExperimentConfig;
using pbigamp::ExperimentKind;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out;
  int threads = 1;
  std::string snr_db, n, k, t, rho, schemes;
  bool no_timing = false;
  bool quiet = false;
};

std::vector<int> to_ints(const std::vector<double>& v, const char* axis) {
  std::vector<int> out;
  for (double x : v) {
    if (x != std::floor(x)) throw std::invalid_argument(std::string("--") + axis + " needs integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

ExperimentConfig resolve(ExperimentKind kind, const Overrides& o) {
  ExperimentConfig cfg = ExperimentConfig::defaults(kind);
  if (!o.config.empty()) {
    cfg = pbigamp::load_config(o.config);
    if (cfg.experiment_kind != kind)
      throw std::invalid_argument("config file is for '" + pbigamp::to_string(cfg.experiment_kind) + "'");
  }
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (!o.out.empty()) cfg.output = o.out;
  if (!o.snr_db.empty()) cfg.snr_db = pbigamp::parse_axis(o.snr_db);
  if (!o.rho.empty()) cfg.rho = pbigamp::parse_axis(o.rho);
  if (!o.n.empty()) cfg.N = to_ints(pbigamp::parse_axis(o.n), "n");
  if (!o.k.empty()) cfg.K = to_ints(pbigamp::parse_axis(o.k), "k");
  if (!o.t.empty()) cfg.T = to_ints(pbigamp::parse_axis(o.t), "t");
  if (!o.schemes.empty()) {
    cfg.schemes.clear();
    std::stringstream ss(o.schemes);
    for (std::string s; std::getline(ss, s, ',');) cfg.schemes.push_back(pbigamp::parse_scheme(s));
  }
  if (o.no_timing) cfg.record_wall_time = false;
  cfg.validate();
  return cfg;
}

void print_summary(const std::vector<pbigamp::ResultRow>& rows) {
  const auto summary = pbigamp::aggregate(rows, {"scheme", "N", "K", "T", "rho", "snr_db"});
  std::printf("%-15s %5s %4s %4s %6s %7s %6s %13s %10s %8s\n", "scheme", "N", "K", "T", "rho", "snr_db", "count",
              "median_nmse_x", "median_rate", "success");
  for (const auto& s : summary) {
    std::printf("%-15s %5s %4s %4s %6s %7s %6d %13.4e %10.3f %8.3f\n", s.keys[0].second.c_str(),
                s.keys[1].second.c_str(), s.keys[2].second.c_str(), s.keys[3].second.c_str(),
                s.keys[4].second.c_str(), s.keys[5].second.c_str(), s.count, s.median_nmse_x, s.median_rate,
                s.success_rate);
  }
}

int run_experiment(ExperimentKind kind, const Overrides& o) {
  const ExperimentConfig cfg = resolve(kind, o);
  const auto rows = pbigamp::run(cfg, o.threads);
  {
    std::ofstream csv(cfg.output, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + cfg.output);
    pbigamp::write_csv(csv, rows);
  }
  {
    const std::string meta = pbigamp::metadata_path(cfg.output);
    std::ofstream js(meta);
    if (!js) throw std::runtime_error("cannot write " + meta);
    js << pbigamp::metadata(cfg).dump(2) << '\n';
  }
  if (!o.quiet) {
    print_summary(rows);
    std::printf("wrote %zu rows to %s\n", rows.size(), cfg.output.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind sparse massive-MIMO detection simulator (P-BiG-AMP)"};
  app.set_version_flag("--version", pbigamp::library_version());
  app.require_subcommand(1);

  Overrides o;
  for (ExperimentKind kind : pbigamp::all_experiment_kinds()) {
    auto* sub = app.add_subcommand(pbigamp::to_string(kind), "Run the " + pbigamp::to_string(kind) + " sweep");
    sub->add_option("--config", o.config, "JSON config (keys match ExperimentConfig fields)")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--trials", o.trials, "Trials per grid point")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output CSV path; metadata goes to the .json sidecar");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--snr-db", o.snr_db, "SNR axis in dB, e.g. 0:5:50 or 10,40");
    sub->add_option("--n", o.n, "Antenna axis, e.g. 64,128,256");
    sub->add_option("--k", o.k, "User axis");
    sub->add_option("--t", o.t, "Coherence-time axis");
    sub->add_option("--rho", o.rho, "Sparsity axis");
    sub->add_option("--schemes", o.schemes, "Comma list of ideal_csi,training_lmmse,bigamp,pbigamp");
    sub->add_flag("--no-timing", o.no_timing, "Write wall_ms = 0 (byte-reproducible CSV)");
    sub->add_flag("--quiet", o.quiet, "Do not print the summary table");
    sub->callback([kind, &o] { run_experiment(kind, o); });
  }

  std::string agg_in, agg_by = "scheme,N,K,T,rho,snr_db", agg_out;
  auto* agg = app.add_subcommand("aggregate", "Summarize a result CSV");
  agg->add_option("csv", agg_in, "Result CSV")->required()->check(CLI::ExistingFile);
  agg->add_option("--by", agg_by, "Group-by columns");
  agg->add_option("--out", agg_out, "Summary CSV (default: stdout)");
  agg->callback([&] {
    std::ifstream in(agg_in);
    const auto rows = pbigamp::read_csv(in);
    std::vector<std::string> keys;
    std::stringstream ss(agg_by);
    for (std::string s; std::getline(ss, s, ',');) keys.push_back(s);
    const auto summary = pbigamp::aggregate(rows, keys);
    if (agg_out.empty()) {
      pbigamp::write_summary_csv(std::cout, summary);
    } else {
      std::ofstream out(agg_out);
      pbigamp::write_summary_csv(out, summary);
    }
  });

  int dof_k = 20;
  double dof_t = 100, dof_eta = 1e6;
  auto* dof = app.add_subcommand("dof", "Degrees of freedom of ideal, training and blind schemes");
  dof->add_option("--k", dof_k, "Users")->check(CLI::PositiveNumber);
  dof->add_option("--t", dof_t, "Coherence time")->check(CLI::PositiveNumber);
  dof->add_option("--eta", dof_eta, "Sparsity parameter")->check(CLI::PositiveNumber);
  dof->callback([&] {
    const auto d = pbigamp::dof_values(dof_k, dof_t, dof_eta);
    std::printf("ideal=%.12g training=%.12g blind=%.12g\n", d.ideal, d.training, d.blind);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
