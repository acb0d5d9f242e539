// Command-line front end: encode/decode single codewords, emit state
// evolution traces, run seeded Monte Carlo trials and rate sweeps.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparc/amp.hpp"
#include "sparc/channel.hpp"
#include "sparc/design.hpp"
#include "sparc/rng.hpp"
#include "sparc/sim.hpp"
#include "sparc/state_evolution.hpp"

namespace {

using sparc::SimConfig;

struct CliOptions {
  SimConfig cfg;
  std::string alloc = "mod";
  std::string design = "hadamard";
  std::string schedule = "auto";
  std::string out;
  std::string format = "csv";
  std::string diagnostics;
  bool timings = false;
  std::vector<double> rate_fracs{0.75};
};

// Flags shared by every subcommand; names double as config-file keys.
void add_common_options(CLI::App* app, CliOptions& o) {
  app->add_option("--L", o.cfg.L, "number of sections");
  app->add_option("--M", o.cfg.M, "columns per section");
  app->add_option("--snr", o.cfg.snr, "signal-to-noise ratio P/sigma^2");
  app->add_option("--P", o.cfg.P, "average power (default: snr, sigma^2 = 1)");
  app->add_option("--alloc", o.alloc, "power allocation: flat|exp|mod");
  app->add_option("--kappa", o.cfg.kappa,
                  "exponential decay parameter (default 2C)");
  app->add_option("--a", o.cfg.a, "modified allocation decay (default R/C)");
  app->add_option("--f", o.cfg.f,
                  "modified allocation decay fraction (default R/C)");
  app->add_option("--design", o.design, "design matrix: gaussian|hadamard");
  app->add_option("--schedule", o.schedule,
                  "tau^2 schedule source: auto|asymptotic|mc");
  app->add_option("--mc-samples", o.cfg.mc_samples,
                  "Monte Carlo samples per section expectation");
  app->add_option("--t-max", o.cfg.t_max, "iteration cap for mc schedules");
  app->add_option("--seed", o.cfg.seed, "master seed");
  app->add_option("--workers", o.cfg.workers,
                  "worker threads (0 = hardware)");
  app->add_option("--out", o.out, "output path (default: stdout)");
  app->set_config("--config", "", "flat key=value config file; CLI overrides");
}

void finalize(CliOptions& o, bool vector_rate = false) {
  o.cfg.alloc = sparc::parse_alloc_scheme(o.alloc);
  o.cfg.design = sparc::parse_design_kind(o.design);
  o.cfg.schedule = sparc::parse_schedule_source(o.schedule);
  if (!vector_rate) {
    if (o.rate_fracs.size() != 1)
      throw CLI::ValidationError("--rate-frac", "expected a single value");
    o.cfg.rate_frac = o.rate_fracs[0];
  }
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
}

void write_vector(const std::string& path, std::span<const double> v) {
  std::string content;
  content.reserve(v.size() * 24);
  for (double e : v) {
    content += sparc::format_g17(e);
    content += '\n';
  }
  write_output(path, content);
}

std::vector<double> read_vector(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<double> v;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    v.push_back(std::stod(line));
  }
  return v;
}

sparc::Message parse_message(const std::string& text,
                             const sparc::SparcParams& params) {
  sparc::Message msg;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    msg.sections.push_back(static_cast<std::uint32_t>(std::stoul(item)));
  sparc::validate_message(msg, params);
  return msg;
}

nlohmann::ordered_json message_json(const sparc::Message& msg) {
  return nlohmann::ordered_json(msg.sections);
}

nlohmann::ordered_json params_json(const sparc::SparcParams& p) {
  return {
      {"L", p.L},   {"M", p.M},           {"n", p.n},
      {"N", p.N},   {"R", p.R},           {"R_over_C", p.R / p.C},
      {"P", p.P},   {"sigma2", p.sigma2}, {"snr", p.snr},
      {"C", p.C},
  };
}

// Fills the v column of a closed-form trace so the CSV is complete.
void ensure_v(sparc::SeTrace& trace, const sparc::SparcParams& params,
              const sparc::PowerAllocation& alloc, const CliOptions& o) {
  if (!trace.v.empty() || o.cfg.mc_samples == 0) return;
  trace.v = sparc::ser_prediction(
      params, alloc, trace.tau2, o.cfg.mc_samples,
      sparc::derive_seed(o.cfg.seed, {sparc::stream_tag::ser_pred}),
      o.cfg.workers);
}

int run_encode(CliOptions& o, const std::string& message_text,
               std::uint64_t matrix_seed, bool transmit,
               std::uint64_t noise_seed) {
  finalize(o);
  const sparc::SparcParams params = sparc::params_from_config(o.cfg);
  const sparc::PowerAllocation alloc = sparc::alloc_from_config(o.cfg, params);

  sparc::Message msg;
  if (!message_text.empty()) {
    msg = parse_message(message_text, params);
  } else {
    sparc::Rng rng(sparc::derive_seed(o.cfg.seed, {sparc::stream_tag::message}));
    msg = sparc::random_message(params, rng);
  }
  const sparc::BetaVector beta = sparc::message_to_beta(msg, alloc, params);
  const auto design =
      sparc::make_design(o.cfg.design, params.n, params.N, matrix_seed);
  std::vector<double> x(params.n);
  design->forward(beta.values, x);

  double pw = 0.0;
  for (double e : x) pw += e * e;

  nlohmann::ordered_json j;
  j["params"] = params_json(params);
  j["message"] = message_json(msg);
  j["matrix_seed"] = matrix_seed;
  j["codeword_power"] = pw / static_cast<double>(params.n);

  if (transmit) {
    const std::vector<double> y =
        sparc::awgn_transmit(x, {params.sigma2, noise_seed});
    j["noise_seed"] = noise_seed;
    write_vector(o.out, y);
  } else {
    write_vector(o.out, x);
  }
  if (!o.out.empty()) {
    j["out"] = o.out;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cerr << j.dump(2) << "\n";
  }
  return 0;
}

int run_decode(CliOptions& o, const std::string& in_path,
               std::uint64_t matrix_seed, const std::string& truth_text) {
  finalize(o);
  const sparc::SparcParams params = sparc::params_from_config(o.cfg);
  const sparc::PowerAllocation alloc = sparc::alloc_from_config(o.cfg, params);
  const sparc::SeTrace schedule =
      sparc::schedule_from_config(o.cfg, params, alloc);

  const std::vector<double> y = read_vector(in_path);
  if (y.size() != params.n)
    throw std::runtime_error("decode: input has " + std::to_string(y.size()) +
                             " samples, expected n = " +
                             std::to_string(params.n));
  const auto design =
      sparc::make_design(o.cfg.design, params.n, params.N, matrix_seed);

  sparc::DecodeOptions opts;
  sparc::BetaVector beta0;
  sparc::Message truth;
  if (!truth_text.empty()) {
    truth = parse_message(truth_text, params);
    beta0 = sparc::message_to_beta(truth, alloc, params);
    opts.truth = beta0.values;
  }
  const sparc::DecodeResult res =
      sparc::decode(y, *design, alloc, params, schedule, opts);

  nlohmann::ordered_json j;
  j["params"] = params_json(params);
  j["schedule_mode"] = std::string(to_string(schedule.mode));
  j["iterations_run"] = res.iterations;
  j["decoded"] = message_json(res.message);
  if (!truth_text.empty()) {
    j["section_error_rate"] = sparc::section_error_rate(truth, res.message);
    j["bit_errors"] = sparc::bit_error_count(truth, res.message);
  }
  write_output(o.out, j.dump(2) + "\n");

  if (!o.diagnostics.empty() && !truth_text.empty()) {
    std::string csv = "trial,t,nmse,weighted_correct_fraction\n";
    for (const auto& d : res.diagnostics) {
      csv += "0," + std::to_string(d.t) + ',' + sparc::format_g17(d.nmse) +
             ',' + sparc::format_g17(d.weighted_correct) + '\n';
    }
    write_output(o.diagnostics, csv);
  }
  return 0;
}

int run_se(CliOptions& o) {
  finalize(o);
  const sparc::SparcParams params = sparc::params_from_config(o.cfg);
  const sparc::PowerAllocation alloc = sparc::alloc_from_config(o.cfg, params);
  sparc::SeTrace trace = sparc::schedule_from_config(o.cfg, params, alloc);
  ensure_v(trace, params, alloc, o);
  write_output(o.out, sparc::trace_to_csv(trace));
  return 0;
}

int run_alloc_check(CliOptions& o) {
  finalize(o);
  const sparc::SparcParams params = sparc::params_from_config(o.cfg);
  const sparc::PowerAllocation alloc = sparc::alloc_from_config(o.cfg, params);
  const sparc::SeTrace trace =
      sparc::threshold_iteration(params, alloc, o.cfg.t_max);
  write_output(o.out, sparc::trace_to_csv(trace));
  if (trace.t_star)
    std::cerr << "allocation decodable: yes, x reaches 1 at step "
              << *trace.t_star << "\n";
  else
    std::cerr << "allocation decodable: no, x stalls at "
              << trace.x.back() << " within " << o.cfg.t_max << " steps\n";
  return trace.t_star ? 0 : 1;
}

int run_trial(CliOptions& o) {
  finalize(o);
  o.cfg.collect_diagnostics = !o.diagnostics.empty();
  const sparc::SimReport report = sparc::run_trials(o.cfg);
  if (o.format == "json")
    write_output(o.out, sparc::report_to_json(report, o.timings));
  else
    write_output(o.out, sparc::trials_to_csv(report, o.timings));
  if (!o.diagnostics.empty())
    write_output(o.diagnostics, sparc::diagnostics_to_csv(report));
  std::cerr << "trials=" << report.trials.size()
            << " mean_ser=" << sparc::format_g17(report.mean_ser)
            << " zero_error_trials=" << report.zero_error_trials
            << " se_predicted_ser="
            << sparc::format_g17(report.se_predicted_ser) << "\n";
  return 0;
}

int run_sweep(CliOptions& o) {
  finalize(o, /*vector_rate=*/true);
  const std::vector<sparc::SimReport> reports =
      sparc::sweep(o.cfg, o.rate_fracs);
  if (o.format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports)
      arr.push_back(nlohmann::ordered_json::parse(
          sparc::report_to_json(r, o.timings)));
    write_output(o.out, arr.dump(2) + "\n");
  } else {
    write_output(o.out, sparc::sweep_to_csv(reports));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse superposition codes over the AWGN channel with an "
               "approximate message passing decoder"};
  app.require_subcommand(1);

  CliOptions o;
  std::string message_text, truth_text, in_path;
  std::uint64_t matrix_seed = 1;
  std::uint64_t noise_seed = 2;
  bool transmit = false;

  auto* enc = app.add_subcommand("encode", "encode a message to a codeword");
  add_common_options(enc, o);
  enc->add_option("--rate-frac", o.rate_fracs, "target rate as a fraction of C")
      ->delimiter(',');
  enc->add_option("--message", message_text, "comma-separated section indices");
  enc->add_option("--matrix-seed", matrix_seed, "design matrix seed");
  enc->add_flag("--transmit", transmit, "emit the noisy channel output");
  enc->add_option("--noise-seed", noise_seed, "channel noise seed");

  auto* dec = app.add_subcommand("decode", "decode a received vector");
  add_common_options(dec, o);
  dec->add_option("--rate-frac", o.rate_fracs, "target rate as a fraction of C")
      ->delimiter(',');
  dec->add_option("--in", in_path, "received vector, one sample per line")
      ->required();
  dec->add_option("--matrix-seed", matrix_seed, "design matrix seed");
  dec->add_option("--truth", truth_text, "true message for scoring");
  dec->add_option("--diagnostics", o.diagnostics,
                  "per-iteration diagnostics CSV path");

  auto* se = app.add_subcommand("se", "emit a state evolution trace as CSV");
  add_common_options(se, o);
  se->add_option("--rate-frac", o.rate_fracs, "target rate as a fraction of C")
      ->delimiter(',');

  auto* trial = app.add_subcommand("trial", "run seeded Monte Carlo trials");
  add_common_options(trial, o);
  trial->add_option("--rate-frac", o.rate_fracs,
                    "target rate as a fraction of C")
      ->delimiter(',');
  trial->add_option("--trials", o.cfg.trials, "number of trials");
  trial->add_option("--format", o.format, "csv|json");
  trial->add_flag("--timings", o.timings, "include wall times in the output");
  trial->add_option("--diagnostics", o.diagnostics,
                    "per-iteration diagnostics CSV path");

  auto* sw = app.add_subcommand("sweep", "trials across a list of rates");
  add_common_options(sw, o);
  sw->add_option("--rate-frac", o.rate_fracs,
                 "comma-separated rate fractions of C")
      ->delimiter(',');
  sw->add_option("--trials", o.cfg.trials, "number of trials per rate");
  sw->add_option("--format", o.format, "csv|json");
  sw->add_flag("--timings", o.timings, "include wall times in the output");

  auto* ac = app.add_subcommand(
      "alloc-check", "decodability threshold iteration for an allocation");
  add_common_options(ac, o);
  ac->add_option("--rate-frac", o.rate_fracs, "target rate as a fraction of C")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (enc->parsed())
      return run_encode(o, message_text, matrix_seed, transmit, noise_seed);
    if (dec->parsed()) return run_decode(o, in_path, matrix_seed, truth_text);
    if (se->parsed()) return run_se(o);
    if (trial->parsed()) return run_trial(o);
    if (sw->parsed()) return run_sweep(o);
    if (ac->parsed()) return run_alloc_check(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
