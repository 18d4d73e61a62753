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

#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qspam/design.hpp"
#include "qspam/errors.hpp"
#include "qspam/estimate.hpp"
#include "qspam/gauge.hpp"
#include "qspam/model.hpp"
#include "qspam/pauli.hpp"
#include "qspam/rng.hpp"
#include "qspam/simulate.hpp"

namespace qspam {

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/** Seed streams: every randomized stage derives its own stream from the
 *  master seed, so stages are reproducible independently of each other. */
namespace seed_stream {
constexpr std::uint64_t model = 1;
constexpr std::uint64_t counts = 2;
constexpr std::uint64_t bootstrap = 3;
constexpr std::uint64_t channel = 4;
constexpr std::uint64_t decay = 5;
}  // namespace seed_stream

struct CbSection {
  std::vector<int> depths = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  std::int64_t shots = 100000;
  double channel_error = 0.02;  // total error rate of the random channel
  std::string channel_file;     // optional explicit eigenvalue file
};

struct RunConfig {
  int n = 1;
  int d = 2;
  double eps_scale = 0.01;  // random-model scale when no model file given
  std::string model_file;
  std::int64_t shots = 100000;
  std::uint64_t seed = 1;
  bool heralded = false;
  GaugeConvention gauge = GaugeConvention::min_sp_error;
  std::vector<double> fixed_constants;  // for gauge = fixed_values
  int bootstrap = 0;                    // 0 = off; >= 50 otherwise
  std::string pipeline = "spam";        // spam | cb | both
  std::string out;                      // output directory
  bool svg = false;                     // also emit static SVG bar charts
  std::string counts_dir;       // estimate input (default: out)
  std::string spam_report;      // cb input (default: out/estimate_report.json)
  CbSection cb;
};

/** Output directory resolution: --out flag / config "out", else the
 *  QSPAM_OUT environment variable, else ./qspam_out. */
inline std::string resolve_out_dir(const RunConfig& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  if (const char* env = std::getenv("QSPAM_OUT"); env && *env) return env;
  return "qspam_out";
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  try {
    cfg.n = j.value("n", cfg.n);
    cfg.d = j.value("d", cfg.d);
    cfg.eps_scale = j.value("eps_scale", cfg.eps_scale);
    cfg.model_file = j.value("model_file", cfg.model_file);
    cfg.shots = j.value("shots", cfg.shots);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.heralded = j.value("heralded", cfg.heralded);
    if (j.contains("gauge"))
      cfg.gauge = gauge_convention_from_string(j.at("gauge").get<std::string>());
    if (j.contains("fixed_constants"))
      cfg.fixed_constants = j.at("fixed_constants").get<std::vector<double>>();
    cfg.bootstrap = j.value("bootstrap", cfg.bootstrap);
    cfg.pipeline = j.value("pipeline", cfg.pipeline);
    cfg.out = j.value("out", cfg.out);
    cfg.svg = j.value("svg", cfg.svg);
    cfg.counts_dir = j.value("counts_dir", cfg.counts_dir);
    cfg.spam_report = j.value("spam_report", cfg.spam_report);
    if (j.contains("cb")) {
      const auto& c = j.at("cb");
      cfg.cb.depths = c.value("depths", cfg.cb.depths);
      cfg.cb.shots = c.value("shots", cfg.cb.shots);
      cfg.cb.channel_error = c.value("channel_error", cfg.cb.channel_error);
      cfg.cb.channel_file = c.value("channel_file", cfg.cb.channel_file);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  return run_config_from_json(j);
}

inline void validate_config(const RunConfig& cfg) {
  SystemShape sh(cfg.n, cfg.d);  // throws on a bad shape
  (void)sh;
  if (cfg.shots < 1) throw InvalidConfig("shots must be >= 1");
  if (cfg.bootstrap != 0 && cfg.bootstrap < 50)
    throw InvalidConfig("bootstrap needs B >= 50 replicas (or 0 to disable)");
  if (cfg.pipeline != "spam" && cfg.pipeline != "cb" && cfg.pipeline != "both")
    throw InvalidConfig("pipeline must be one of spam|cb|both");
  if (!cfg.model_file.empty() &&
      !std::filesystem::exists(cfg.model_file))
    throw InvalidConfig("model file does not exist: " + cfg.model_file);
  if (!cfg.cb.channel_file.empty() &&
      !std::filesystem::exists(cfg.cb.channel_file))
    throw InvalidConfig("channel file does not exist: " + cfg.cb.channel_file);
  if (cfg.cb.shots < 1) throw InvalidConfig("cb shots must be >= 1");
  if (cfg.cb.depths.size() < 3)
    throw InvalidConfig("cb needs at least 3 depths");
}

// ---------------------------------------------------------------------------
// Atomic file output
// ---------------------------------------------------------------------------

/** Write-to-temp-then-rename so a crash never leaves a partial file. */
inline void atomic_write_text(const std::filesystem::path& path,
                              const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidConfig("cannot write file: " + tmp.string());
    out << text;
    if (!out) throw InvalidConfig("short write to: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void atomic_write_json(const std::filesystem::path& path,
                              const nlohmann::json& j) {
  atomic_write_text(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// cmd_design
// ---------------------------------------------------------------------------

/** Generate the permutation design and its rank certificate. */
inline int cmd_design(const RunConfig& cfg, std::ostream& log = std::cout) {
  validate_config(cfg);
  SystemShape sh(cfg.n, cfg.d);
  DesignMatrix dm = proposition_design_matrix(sh);
  const std::filesystem::path dir = resolve_out_dir(cfg);
  atomic_write_json(dir / "design.json", design_to_json(dm));
  log << "design: " << dm.circuits.size() << " circuits, rank " << dm.rank
      << " / " << dm.expected_rank() << " -> " << (dir / "design.json").string()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// cmd_simulate
// ---------------------------------------------------------------------------

inline std::string counts_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "counts_%03zu.json", index);
  return buf;
}

/** The truth model for this run: explicit file or seeded random draw. */
inline SpamModel resolve_truth_model(const RunConfig& cfg) {
  SystemShape sh(cfg.n, cfg.d);
  if (!cfg.model_file.empty()) {
    SpamModel m = load_model(cfg.model_file);
    if (m.shape.n != sh.n || m.shape.d != sh.d)
      throw InvalidConfig("model file shape does not match config");
    return m;
  }
  return random_model(sh, cfg.eps_scale, derive_seed(cfg.seed, seed_stream::model));
}

/** Simulate counts for every design circuit; writes one counts file per
 *  circuit plus a manifest (seeds, discard fraction) and the truth model. */
inline int cmd_simulate(const RunConfig& cfg, std::ostream& log = std::cout) {
  validate_config(cfg);
  SystemShape sh(cfg.n, cfg.d);
  SpamModel model = resolve_truth_model(cfg);
  DesignMatrix dm = proposition_design_matrix(sh);
  const std::uint64_t counts_seed = derive_seed(cfg.seed, seed_stream::counts);
  RunResult run = run_design(model, dm.circuits, cfg.shots, counts_seed,
                             cfg.heralded);

  const std::filesystem::path dir = resolve_out_dir(cfg);
  atomic_write_json(dir / "design.json", design_to_json(dm));
  atomic_write_json(dir / "truth_model.json", model_to_json(model));

  nlohmann::json manifest;
  manifest["schema"] = "qspam.manifest/1";
  manifest["n"] = sh.n;
  manifest["d"] = sh.d;
  manifest["design"] = "design.json";
  manifest["model"] = "truth_model.json";
  manifest["shots"] = cfg.shots;
  manifest["seed"] = cfg.seed;
  manifest["heralded"] = cfg.heralded;
  manifest["discard_fraction"] = run.discard_fraction;
  nlohmann::json circuits = nlohmann::json::array();
  for (std::size_t c = 0; c < run.records.size(); ++c) {
    const std::string file = counts_file_name(c);
    atomic_write_json(dir / file, counts_to_json(run.records[c]));
    nlohmann::json entry;
    entry["index"] = c;
    entry["name"] = dm.circuits[c].name();
    entry["file"] = file;
    entry["seed"] = derive_seed(counts_seed, static_cast<std::uint64_t>(c));
    circuits.push_back(entry);
  }
  manifest["circuits"] = circuits;
  atomic_write_json(dir / "manifest.json", manifest);
  log << "simulate: " << run.records.size() << " counts files, discard fraction "
      << run.discard_fraction << " -> " << (dir / "manifest.json").string()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Bar-chart data and SVG
// ---------------------------------------------------------------------------

/** Plot-ready data: per parameter, solid bar = positivity-constrained
 *  ambiguity interval, light bar = the same extended by one standard
 *  error on each side, cross = the minimum-SP-error representative. */
inline nlohmann::json bar_chart_json(const SpamEstimate& est) {
  const SystemShape& sh = est.eps_hat.shape;
  EpsilonVector cross = est.eps_hat;
  if (est.convention != GaugeConvention::min_sp_error &&
      est.meta.pre_clip.size() == sh.num_params())
    cross = representative_under(est, GaugeConvention::min_sp_error);
  nlohmann::json j;
  j["schema"] = "qspam.barchart/1";
  j["n"] = sh.n;
  j["d"] = sh.d;
  nlohmann::json bars = nlohmann::json::array();
  for (int i = 0; i < sh.num_params(); ++i) {
    const double se = est.stderrs.size() > 0 ? est.stderrs[i] : 0.0;
    const double lo = est.intervals.empty()
                          ? est.eps_hat.values[i]
                          : est.intervals[static_cast<std::size_t>(i)].lower;
    const double hi = est.intervals.empty()
                          ? est.eps_hat.values[i]
                          : est.intervals[static_cast<std::size_t>(i)].upper;
    nlohmann::json b;
    b["label"] = param_label_string(sh, param_label(sh, i));
    b["solid_lower"] = lo;
    b["solid_upper"] = hi;
    b["light_lower"] = lo - se;
    b["light_upper"] = hi + se;
    b["cross"] = cross.values[i];
    b["stderr"] = se;
    bars.push_back(b);
  }
  j["bars"] = bars;
  return j;
}

/** Static SVG rendering of the bar-chart data (data-first: the JSON is
 *  the primary artifact, this is a convenience view). */
inline std::string bar_chart_svg(const nlohmann::json& chart) {
  const auto& bars = chart.at("bars");
  double max_x = 1e-6;
  for (const auto& b : bars)
    max_x = std::max(max_x, b.at("light_upper").get<double>());
  max_x *= 1.1;
  const int row_h = 26, left = 110, width = 520, top = 30;
  const int height = top + row_h * static_cast<int>(bars.size()) + 20;
  auto sx = [&](double v) {
    return left + (width - left - 20) * std::max(0.0, v) / max_x;
  };
  char buf[256];
  std::string svg;
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" font-family=\"monospace\" font-size=\"11\">\n",
                width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  int y = top;
  for (const auto& b : bars) {
    const double llo = b.at("light_lower").get<double>();
    const double lhi = b.at("light_upper").get<double>();
    const double slo = b.at("solid_lower").get<double>();
    const double shi = b.at("solid_upper").get<double>();
    const double cx = b.at("cross").get<double>();
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"6\" y=\"%d\">%s</text>\n", y + 14,
                  b.at("label").get<std::string>().c_str());
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.2f\" y=\"%d\" width=\"%.2f\" height=\"14\" "
                  "fill=\"#9ecbff\"/>\n",
                  sx(llo), y + 3, std::max(0.5, sx(lhi) - sx(llo)));
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.2f\" y=\"%d\" width=\"%.2f\" height=\"14\" "
                  "fill=\"#2d7dd2\"/>\n",
                  sx(slo), y + 3, std::max(0.5, sx(shi) - sx(slo)));
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%d\" text-anchor=\"middle\" "
                  "fill=\"#d62828\" font-weight=\"bold\">x</text>\n",
                  sx(cx), y + 15);
    svg += buf;
    y += row_h;
  }
  svg += "</svg>\n";
  return svg;
}

// ---------------------------------------------------------------------------
// cmd_estimate
// ---------------------------------------------------------------------------

struct LoadedCounts {
  DesignMatrix design;
  std::vector<CountsRecord> records;
  bool heralded = false;
  double discard_fraction = 0.0;
};

inline LoadedCounts load_counts_dir(const std::filesystem::path& dir) {
  const std::filesystem::path mpath = dir / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw InvalidConfig("cannot open manifest: " + mpath.string());
  nlohmann::json manifest;
  in >> manifest;
  LoadedCounts out;
  out.design = load_design((dir / manifest.at("design").get<std::string>()).string());
  out.heralded = manifest.value("heralded", false);
  out.discard_fraction = manifest.value("discard_fraction", 0.0);
  for (const auto& entry : manifest.at("circuits"))
    out.records.push_back(
        load_counts((dir / entry.at("file").get<std::string>()).string()));
  return out;
}

/** Estimate from a counts directory; writes the report plus bar-chart
 *  data, and for d=3 the qubit-subspace summary alongside. */
inline int cmd_estimate(const RunConfig& cfg, std::ostream& log = std::cout) {
  validate_config(cfg);
  const std::filesystem::path dir = resolve_out_dir(cfg);
  const std::filesystem::path counts_dir =
      cfg.counts_dir.empty() ? dir : std::filesystem::path(cfg.counts_dir);
  LoadedCounts in = load_counts_dir(counts_dir);

  EstimateOptions opts;
  opts.convention = cfg.gauge;
  opts.fixed_constants = cfg.fixed_constants;
  SpamEstimate est = estimate(in.records, in.design, opts);
  est.meta.heralded = in.heralded;
  if (cfg.bootstrap > 0)
    est.stderrs = bootstrap_errors(in.records, in.design, opts, cfg.bootstrap,
                                   derive_seed(cfg.seed, seed_stream::bootstrap));

  nlohmann::json report = estimate_to_json(est);
  report["discard_fraction"] = in.discard_fraction;
  nlohmann::json chart = bar_chart_json(est);
  if (in.design.shape.d == 3) {
    SpamEstimate sub = qubit_subspace_summary(est);
    report["qubit_subspace"] = estimate_to_json(sub);
    nlohmann::json sub_chart = bar_chart_json(sub);
    atomic_write_json(dir / "barchart_qubit_subspace.json", sub_chart);
    if (cfg.svg)
      atomic_write_text(dir / "barchart_qubit_subspace.svg",
                        bar_chart_svg(sub_chart));
  }
  atomic_write_json(dir / "estimate_report.json", report);
  atomic_write_json(dir / "barchart.json", chart);
  if (cfg.svg) atomic_write_text(dir / "barchart.svg", bar_chart_svg(chart));
  log << "estimate: " << in.design.shape.num_params() << " parameters ("
      << to_string(est.convention) << ") -> "
      << (dir / "estimate_report.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// cmd_cb
// ---------------------------------------------------------------------------

inline PauliChannel resolve_truth_channel(const RunConfig& cfg) {
  if (!cfg.cb.channel_file.empty()) {
    std::ifstream in(cfg.cb.channel_file);
    if (!in)
      throw InvalidConfig("cannot open channel file: " + cfg.cb.channel_file);
    nlohmann::json j;
    in >> j;
    const auto& ev = j.at("eigenvalues");
    Eigen::VectorXd lambda = Eigen::VectorXd::Ones(16);
    for (auto it = ev.begin(); it != ev.end(); ++it)
      lambda[pauli_from_string(it.key()).code()] = it.value().get<double>();
    return channel_from_eigenvalues(2, lambda);
  }
  return random_pauli_channel(2, cfg.cb.channel_error,
                              derive_seed(cfg.seed, seed_stream::channel));
}

/** Two-qubit SPAM truth for decay simulation: the qubit subspace of this
 *  run's truth model (the decay circuits are strictly two-level). */
inline SpamFactors resolve_truth_spam(const RunConfig& cfg) {
  SpamModel m = resolve_truth_model(cfg);
  if (m.shape.n != 2)
    throw InvalidConfig("the decay pipeline needs an n=2 model");
  if (m.shape.d == 2) return spam_factors_from_model(m);
  EpsilonVector eps2 = qubit_subspace_epsilon(to_epsilon(m));
  return spam_factors_from_model(from_epsilon(eps2, 1.0));
}

/** Pull a two-qubit-label SPAM estimate out of an estimate report: either
 *  the report itself (d=2) or its embedded qubit-subspace summary (d=3). */
inline SpamEstimate spam_estimate_for_cb(const nlohmann::json& report) {
  SpamEstimate est;
  if (report.value("d", 0) == 3) {
    if (!report.contains("qubit_subspace"))
      throw InvalidConfig("d=3 report lacks a qubit_subspace section");
    est = estimate_from_json(report.at("qubit_subspace"));
  } else {
    est = estimate_from_json(report);
  }
  if (est.eps_hat.shape.d != 2 || est.eps_hat.shape.n != 2)
    throw InvalidConfig("decay correction needs an n=2 qubit-label estimate");
  return est;
}

/** Simulate decays for all 15 labels, fit, divide out the SPAM factor
 *  from the supplied estimate, and report bounds, CER cross-checks and
 *  the average-fidelity interval. Any per-label fit failure is recorded
 *  in the report and turns the exit code to 5. */
inline int cmd_cb(const RunConfig& cfg, std::ostream& log = std::cout) {
  validate_config(cfg);
  const std::filesystem::path dir = resolve_out_dir(cfg);
  const std::filesystem::path report_path =
      cfg.spam_report.empty() ? dir / "estimate_report.json"
                              : std::filesystem::path(cfg.spam_report);
  std::ifstream rin(report_path);
  if (!rin)
    throw InvalidConfig("cannot open SPAM report: " + report_path.string());
  nlohmann::json spam_report;
  rin >> spam_report;
  SpamEstimate est = spam_estimate_for_cb(spam_report);

  CbTruth truth;
  truth.spam = resolve_truth_spam(cfg);
  truth.channel = resolve_truth_channel(cfg);

  std::filesystem::create_directories(dir / "decays");
  std::vector<DecayRecord> records;
  std::vector<EigenvalueBound> bounds;
  nlohmann::json labels_json = nlohmann::json::object();
  std::vector<std::string> failures;
  auto labels = all_pauli_labels(2, /*include_identity=*/false);
  for (const auto& a : labels) {
    DecayRecord rec = simulate_cb(
        truth, a, cfg.cb.depths, cfg.cb.shots,
        derive_seed(cfg.seed, seed_stream::decay,
                    static_cast<std::uint64_t>(a.code())));
    atomic_write_json(dir / "decays" / ("decay_" + a.to_string() + ".json"),
                      decay_to_json(rec));
    records.push_back(rec);
    nlohmann::json lj;
    lj["identifiable"] = is_identifiable(a, [](const PauliLabel& x) {
      return cz_action(x);
    });
    lj["true_eigenvalue"] = truth.channel.value(a);
    try {
      EigenvalueBound b = corrected_eigenvalue(rec, est, a);
      bounds.push_back(b);
      lj["status"] = "ok";
      lj["point"] = b.point;
      lj["lower"] = b.lower;
      lj["upper"] = b.upper;
      lj["stderr"] = b.stderr_;
    } catch (const Error& e) {
      failures.push_back(a.to_string());
      lj["status"] = "fit_failed";
      lj["error"] = e.what();
    }
    labels_json[a.to_string()] = lj;
  }

  // CER cross-check per conjugation orbit: the decay rate alone fixes
  // sqrt(lambda_a lambda_{G(a)}), compared with the geometric mean of the
  // two SPAM-corrected point estimates.
  auto find_bound = [&](const PauliLabel& a) -> const EigenvalueBound* {
    for (const auto& b : bounds)
      if (b.a == a) return &b;
    return nullptr;
  };
  auto find_record = [&](const PauliLabel& a) -> const DecayRecord* {
    for (const auto& r : records)
      if (r.a == a) return &r;
    return nullptr;
  };
  nlohmann::json cer_json = nlohmann::json::array();
  for (const auto& a : labels) {
    auto [ga, sign] = cz_action(a);
    (void)sign;
    if (ga.code() < a.code()) continue;  // one row per unordered orbit
    const DecayRecord* ra = find_record(a);
    const DecayRecord* rg = find_record(ga);
    if (!ra || !rg) continue;
    nlohmann::json row;
    row["pair"] = {a.to_string(), ga.to_string()};
    try {
      CerEstimate cer = cer_combination(*ra, *rg);
      row["cer"] = cer.value;
      row["cer_stderr"] = cer.stderr_;
      row["rate_first"] = cer.rate_a;
      row["rate_second"] = cer.rate_ga;
      const EigenvalueBound* ba = find_bound(a);
      const EigenvalueBound* bg = find_bound(ga);
      if (ba && bg && ba->point > 0.0 && bg->point > 0.0) {
        const double gm = std::sqrt(ba->point * bg->point);
        const double gse =
            0.5 * gm *
            std::sqrt((ba->stderr_ / ba->point) * (ba->stderr_ / ba->point) +
                      (bg->stderr_ / bg->point) * (bg->stderr_ / bg->point));
        row["geomean"] = gm;
        row["geomean_stderr"] = gse;
      }
      row["true_value"] =
          std::sqrt(truth.channel.value(a) * truth.channel.value(ga));
    } catch (const Error& e) {
      row["status"] = "fit_failed";
      row["error"] = e.what();
    }
    cer_json.push_back(row);
  }

  nlohmann::json report;
  report["schema"] = "qspam.cb_report/1";
  report["spam_report"] = report_path.filename().string();
  report["depths"] = cfg.cb.depths;
  report["shots"] = cfg.cb.shots;
  report["seed"] = cfg.seed;
  report["labels"] = labels_json;
  report["cer"] = cer_json;
  if (failures.empty()) {
    FidelityInterval fid = average_fidelity(bounds);
    nlohmann::json fj;
    fj["point"] = fid.point;
    fj["lower"] = fid.lower;
    fj["upper"] = fid.upper;
    fj["stderr"] = fid.stderr_;
    report["average_fidelity"] = fj;
  } else {
    report["failures"] = failures;
  }
  atomic_write_json(dir / "cb_report.json", report);
  log << "cb: " << bounds.size() << "/15 labels bounded";
  if (!failures.empty()) log << ", " << failures.size() << " fit failures";
  log << " -> " << (dir / "cb_report.json").string() << "\n";
  return failures.empty() ? 0 : 5;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/** Run the selected pipeline stages in order; first failing stage wins. */
inline int run_pipeline(const RunConfig& cfg, std::ostream& log = std::cout) {
  validate_config(cfg);
  if (cfg.pipeline == "spam" || cfg.pipeline == "both") {
    if (int rc = cmd_design(cfg, log)) return rc;
    if (int rc = cmd_simulate(cfg, log)) return rc;
    if (int rc = cmd_estimate(cfg, log)) return rc;
  }
  if (cfg.pipeline == "cb" || cfg.pipeline == "both") {
    if (int rc = cmd_cb(cfg, log)) return rc;
  }
  return 0;
}

/** Map library errors to the documented exit codes. */
inline int exit_code_for(const Error& e) {
  if (dynamic_cast<const HeraldImpossible*>(&e)) return 3;
  if (dynamic_cast<const RankDeficientDesign*>(&e)) return 4;
  if (dynamic_cast<const NonPositiveData*>(&e)) return 5;
  if (dynamic_cast<const DivisionUnstable*>(&e)) return 5;
  return 2;
}

}  // namespace qspam
