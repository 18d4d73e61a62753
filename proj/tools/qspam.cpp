// Copyright 2026 The qspam developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: generate permutation designs, simulate or ingest
// counts, estimate SPAM error parameters with ambiguity intervals, and run
// the two-qubit Pauli eigenvalue-bound pipeline.
//
// Exit codes: 0 success; 2 invalid configuration or input; 3 herald
// impossibility; 4 rank-deficient design; 5 decay fit failure (a partial
// report is still written).

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qspam/cli.hpp"

namespace {

struct FlagValues {
  std::string config;
  int n = 0;
  int d = 0;
  double eps_scale = -1.0;
  std::string model;
  long long shots = 0;
  unsigned long long seed = 0;
  bool heralded = false;
  std::string gauge;
  int bootstrap = -1;
  std::string pipeline;
  std::string out;
  bool svg = false;
  std::string counts_dir;
  std::string spam_report;
  long long cb_shots = 0;
  std::vector<int> cb_depths;
  double channel_error = -1.0;
  std::string channel_file;
};

void add_common_flags(CLI::App* sub, FlagValues& fv) {
  sub->add_option("--config", fv.config, "JSON config file (flags override)");
  sub->add_option("--n", fv.n, "number of qudits");
  sub->add_option("--d", fv.d, "levels per qudit");
  sub->add_option("--eps-scale", fv.eps_scale,
                  "error scale of the seeded random truth model");
  sub->add_option("--model", fv.model, "truth model JSON file");
  sub->add_option("--shots", fv.shots, "shots per circuit");
  sub->add_option("--seed", fv.seed, "master seed");
  sub->add_flag("--heralded", fv.heralded, "condition on a herald measurement");
  sub->add_option("--gauge", fv.gauge,
                  "gauge convention: min_sp_error|zero_residual_gauge|fixed_values");
  sub->add_option("--bootstrap", fv.bootstrap,
                  "bootstrap replicas for standard errors (>= 50, 0 = off)");
  sub->add_option("--pipeline", fv.pipeline, "pipeline: spam|cb|both");
  sub->add_option("--out", fv.out,
                  "output directory (default: $QSPAM_OUT or ./qspam_out)");
  sub->add_flag("--svg", fv.svg, "also write SVG bar charts");
  sub->add_option("--counts-dir", fv.counts_dir,
                  "directory with manifest.json + counts (default: out dir)");
  sub->add_option("--spam-report", fv.spam_report,
                  "estimate report used for decay correction");
  sub->add_option("--cb-shots", fv.cb_shots, "shots per decay point");
  sub->add_option("--cb-depths", fv.cb_depths, "decay depths (t values)");
  sub->add_option("--channel-error", fv.channel_error,
                  "total error rate of the seeded random Pauli channel");
  sub->add_option("--channel-file", fv.channel_file,
                  "Pauli channel eigenvalue JSON file");
}

qspam::RunConfig merge_config(const CLI::App* sub, const FlagValues& fv) {
  qspam::RunConfig cfg;
  if (!fv.config.empty()) cfg = qspam::load_run_config(fv.config);
  auto passed = [&](const std::string& name) {
    return sub->count(name) > 0;
  };
  if (passed("--n")) cfg.n = fv.n;
  if (passed("--d")) cfg.d = fv.d;
  if (passed("--eps-scale")) cfg.eps_scale = fv.eps_scale;
  if (passed("--model")) cfg.model_file = fv.model;
  if (passed("--shots")) cfg.shots = fv.shots;
  if (passed("--seed")) cfg.seed = fv.seed;
  if (passed("--heralded")) cfg.heralded = fv.heralded;
  if (passed("--gauge"))
    cfg.gauge = qspam::gauge_convention_from_string(fv.gauge);
  if (passed("--bootstrap")) cfg.bootstrap = fv.bootstrap;
  if (passed("--pipeline")) cfg.pipeline = fv.pipeline;
  if (passed("--out")) cfg.out = fv.out;
  if (passed("--svg")) cfg.svg = fv.svg;
  if (passed("--counts-dir")) cfg.counts_dir = fv.counts_dir;
  if (passed("--spam-report")) cfg.spam_report = fv.spam_report;
  if (passed("--cb-shots")) cfg.cb.shots = fv.cb_shots;
  if (passed("--cb-depths")) cfg.cb.depths = fv.cb_depths;
  if (passed("--channel-error")) cfg.cb.channel_error = fv.channel_error;
  if (passed("--channel-file")) cfg.cb.channel_file = fv.channel_file;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPAM characterization with gauge-ambiguity intervals and "
               "two-qubit Pauli eigenvalue bounds"};
  app.require_subcommand(1);

  FlagValues fv;
  CLI::App* c_design =
      app.add_subcommand("design", "generate the permutation design");
  CLI::App* c_sim = app.add_subcommand("simulate", "simulate circuit counts");
  CLI::App* c_est =
      app.add_subcommand("estimate", "estimate SPAM errors from counts");
  CLI::App* c_cb =
      app.add_subcommand("cb", "decay pipeline: fit and bound eigenvalues");
  CLI::App* c_run = app.add_subcommand("run", "run the configured pipeline");
  for (CLI::App* sub : {c_design, c_sim, c_est, c_cb, c_run})
    add_common_flags(sub, fv);

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  try {
    qspam::RunConfig cfg = merge_config(sub, fv);
    if (sub == c_design) return qspam::cmd_design(cfg);
    if (sub == c_sim) return qspam::cmd_simulate(cfg);
    if (sub == c_est) return qspam::cmd_estimate(cfg);
    if (sub == c_cb) return qspam::cmd_cb(cfg);
    return qspam::run_pipeline(cfg);
  } catch (const qspam::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qspam::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
