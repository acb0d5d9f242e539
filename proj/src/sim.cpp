#include "sparc/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "sparc/parallel.hpp"
#include "sparc/rng.hpp"

namespace sparc {

std::string_view to_string(ScheduleSource src) {
  switch (src) {
    case ScheduleSource::automatic: return "auto";
    case ScheduleSource::mc: return "mc";
    case ScheduleSource::asymptotic: return "asymptotic";
  }
  return "?";
}

ScheduleSource parse_schedule_source(std::string_view name) {
  if (name == "auto" || name == "automatic") return ScheduleSource::automatic;
  if (name == "mc") return ScheduleSource::mc;
  if (name == "asymptotic" || name == "asym") return ScheduleSource::asymptotic;
  throw std::invalid_argument("unknown schedule source: " + std::string(name));
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SparcParams params_from_config(const SimConfig& cfg) {
  if (!(cfg.snr > 0.0))
    throw std::invalid_argument("config: snr must be positive");
  if (!(cfg.rate_frac > 0.0))
    throw std::invalid_argument("config: rate fraction must be positive");
  const double C = 0.5 * std::log2(1.0 + cfg.snr);
  const double P = cfg.P > 0.0 ? cfg.P : cfg.snr;  // default sigma2 = 1
  return derive_params(cfg.L, cfg.M, cfg.rate_frac * C, cfg.snr, P);
}

PowerAllocation alloc_from_config(const SimConfig& cfg,
                                  const SparcParams& params) {
  switch (cfg.alloc) {
    case AllocScheme::flat:
      return flat_allocation(params);
    case AllocScheme::exponential: {
      const double kappa = cfg.kappa > 0.0 ? cfg.kappa : 2.0 * params.C;
      return exponential_allocation(params, kappa);
    }
    case AllocScheme::modified: {
      const double guess = params.R / params.C;  // starting point a = f = R/C
      const double a = cfg.a >= 0.0 ? cfg.a : guess;
      const double f = cfg.f >= 0.0 ? cfg.f : guess;
      return modified_allocation(params, a, f);
    }
  }
  throw std::invalid_argument("unknown allocation scheme");
}

SeTrace schedule_from_config(const SimConfig& cfg, const SparcParams& params,
                             const PowerAllocation& alloc) {
  const auto mc = [&] {
    return mc_state_evolution(params, alloc, cfg.t_max, cfg.mc_samples,
                              derive_seed(cfg.seed, {stream_tag::se}),
                              cfg.workers);
  };
  const bool kappa_is_2c =
      std::abs(alloc.kappa - 2.0 * params.C) <= 1e-9 * (2.0 * params.C);

  switch (cfg.schedule) {
    case ScheduleSource::mc:
      return mc();
    case ScheduleSource::asymptotic:
      if (alloc.scheme == AllocScheme::exponential) {
        if (!kappa_is_2c)
          throw std::invalid_argument(
              "asymptotic schedule for an exponential allocation needs "
              "kappa = 2C; use the mc schedule");
        return asymptotic_se_exponential(params);
      }
      if (alloc.scheme == AllocScheme::modified)
        return asymptotic_se_modified(params, alloc.a, alloc.f);
      return asymptotic_se_modified(params, 0.0, 1.0);  // flat
    case ScheduleSource::automatic:
      if (alloc.scheme == AllocScheme::exponential && kappa_is_2c)
        return asymptotic_se_exponential(params);
      if (alloc.scheme == AllocScheme::modified && alloc.a > 0.0)
        return asymptotic_se_modified(params, alloc.a, alloc.f);
      return mc();
  }
  throw std::invalid_argument("unknown schedule source");
}

namespace {

SimConfig resolve_config(const SimConfig& cfg, const SparcParams& params,
                         const PowerAllocation& alloc) {
  SimConfig r = cfg;
  r.P = params.P;
  r.kappa = alloc.scheme == AllocScheme::exponential ? alloc.kappa : 0.0;
  r.a = alloc.scheme == AllocScheme::modified ? alloc.a : 0.0;
  r.f = alloc.scheme == AllocScheme::modified ? alloc.f : 0.0;
  return r;
}

void check_design_feasible(const SimConfig& cfg, const SparcParams& params) {
  if (cfg.design == DesignKind::hadamard) {
    if (!is_power_of_two(params.N))
      throw std::invalid_argument(
          "hadamard design requires N = M*L to be a power of two");
    if (params.n > params.N - 1)
      throw std::invalid_argument("hadamard design requires n <= N-1");
  } else {
    if (params.n > (std::size_t{1} << 28) / params.N)
      throw std::invalid_argument(
          "gaussian design too large to store; use the hadamard design");
  }
}

}  // namespace

SimReport run_trials(const SimConfig& cfg) {
  SimReport report;
  report.params = params_from_config(cfg);
  const SparcParams& params = report.params;
  if (!(params.R < params.C))
    throw std::invalid_argument("config: realized rate reaches capacity");
  check_design_feasible(cfg, params);

  report.alloc = alloc_from_config(cfg, params);
  validate_allocation(report.alloc, params);
  report.config = resolve_config(cfg, params, report.alloc);
  report.schedule = schedule_from_config(cfg, params, report.alloc);

  const std::size_t T = report.schedule.steps();

  // Section-error-rate prediction 1 - v[T]; Monte Carlo schedules already
  // carry v, closed-form ones need one prediction pass.
  const std::vector<double>* v = &report.schedule.v;
  std::vector<double> v_local;
  if (v->size() < T + 1) {
    v_local = ser_prediction(params, report.alloc, report.schedule.tau2,
                             cfg.mc_samples,
                             derive_seed(cfg.seed, {stream_tag::ser_pred}),
                             cfg.workers);
    v = &v_local;
  }
  report.se_predicted_ser = std::clamp(1.0 - (*v)[T], 0.0, 1.0);

  report.trials.resize(cfg.trials);
  if (cfg.collect_diagnostics) report.diagnostics.resize(cfg.trials);
  std::vector<double> codeword_power(cfg.trials, 0.0);

  parallel_for(cfg.trials, cfg.workers, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t trial_seed = derive_seed(cfg.seed, {i});
    Rng msg_rng(derive_seed(trial_seed, {stream_tag::message}));
    const Message sent = random_message(params, msg_rng);
    const BetaVector beta0 = message_to_beta(sent, report.alloc, params);

    const auto design =
        make_design(cfg.design, params.n, params.N,
                    derive_seed(trial_seed, {stream_tag::matrix}));

    std::vector<double> x(params.n);
    design->forward(beta0.values, x);
    double pw = 0.0;
    for (double e : x) pw += e * e;
    codeword_power[i] = pw / static_cast<double>(params.n);

    const std::vector<double> y = awgn_transmit(
        x, {params.sigma2, derive_seed(trial_seed, {stream_tag::noise})});

    DecodeOptions opts;
    if (cfg.collect_diagnostics) opts.truth = beta0.values;
    DecodeResult res =
        decode(y, *design, report.alloc, params, report.schedule, opts);

    std::uint32_t sec_errors = 0;
    for (std::uint32_t l = 0; l < params.L; ++l)
      if (sent.sections[l] != res.message.sections[l]) ++sec_errors;

    TrialResult& tr = report.trials[i];
    tr.trial = i;
    tr.seed = trial_seed;
    tr.section_errors = sec_errors;
    tr.ser = static_cast<double>(sec_errors) / static_cast<double>(params.L);
    tr.bit_errors = bit_error_count(sent, res.message);
    tr.iterations_run = res.iterations;
    tr.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (cfg.collect_diagnostics)
      report.diagnostics[i] = std::move(res.diagnostics);
  });

  double sum = 0.0;
  for (const TrialResult& tr : report.trials) {
    sum += tr.ser;
    if (tr.section_errors == 0) ++report.zero_error_trials;
  }
  const double nt = static_cast<double>(cfg.trials);
  report.mean_ser = cfg.trials ? sum / nt : 0.0;
  if (cfg.trials > 1) {
    double ss = 0.0;
    for (const TrialResult& tr : report.trials) {
      const double d = tr.ser - report.mean_ser;
      ss += d * d;
    }
    report.stderr_ser = std::sqrt(ss / (nt - 1.0)) / std::sqrt(nt);
  }
  double pw_sum = 0.0;
  for (double p : codeword_power) pw_sum += p;
  report.mean_codeword_power = cfg.trials ? pw_sum / nt : 0.0;
  if (cfg.trials >= 100 &&
      std::abs(report.mean_codeword_power / params.P - 1.0) > 0.02)
    std::fprintf(stderr,
                 "warning: mean codeword power %.6g deviates from P = %.6g "
                 "by more than 2%%\n",
                 report.mean_codeword_power, params.P);
  return report;
}

std::vector<SimReport> sweep(const SimConfig& cfg,
                             std::span<const double> rate_fracs) {
  // Validate every rate before running anything.
  for (double rf : rate_fracs) {
    SimConfig c = cfg;
    c.rate_frac = rf;
    const SparcParams p = params_from_config(c);
    if (!(p.R < p.C))
      throw std::invalid_argument("sweep: rate fraction " + std::to_string(rf) +
                                  " reaches capacity");
  }
  std::vector<SimReport> reports;
  reports.reserve(rate_fracs.size());
  for (double rf : rate_fracs) {
    SimConfig c = cfg;
    c.rate_frac = rf;
    reports.push_back(run_trials(c));
  }
  return reports;
}

namespace {

nlohmann::ordered_json trace_json(const SeTrace& tr) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(tr.mode);
  if (tr.t_star)
    j["t_star"] = *tr.t_star;
  else
    j["t_star"] = nullptr;
  j["tau2"] = tr.tau2;
  j["x"] = tr.x;
  if (!tr.xi.empty()) j["xi"] = tr.xi;
  if (!tr.v.empty()) j["v"] = tr.v;
  return j;
}

}  // namespace

std::string report_to_json(const SimReport& report, bool include_timings) {
  const SimConfig& cfg = report.config;
  nlohmann::ordered_json j;
  j["config"] = {
      {"L", cfg.L},
      {"M", cfg.M},
      {"rate_frac", cfg.rate_frac},
      {"snr", cfg.snr},
      {"P", cfg.P},
      {"alloc", std::string(to_string(cfg.alloc))},
      {"kappa", cfg.kappa},
      {"a", cfg.a},
      {"f", cfg.f},
      {"design", std::string(to_string(cfg.design))},
      {"schedule", std::string(to_string(cfg.schedule))},
      {"trials", cfg.trials},
      {"seed", cfg.seed},
      {"mc_samples", cfg.mc_samples},
      {"t_max", cfg.t_max},
  };
  j["params"] = {
      {"L", report.params.L},       {"M", report.params.M},
      {"n", report.params.n},       {"N", report.params.N},
      {"R", report.params.R},       {"R_over_C", report.params.R /
                                                 report.params.C},
      {"P", report.params.P},       {"sigma2", report.params.sigma2},
      {"snr", report.params.snr},   {"C", report.params.C},
  };
  j["schedule"] = trace_json(report.schedule);
  nlohmann::ordered_json trials = nlohmann::ordered_json::array();
  for (const TrialResult& tr : report.trials) {
    nlohmann::ordered_json t = {
        {"trial", tr.trial},
        {"seed", tr.seed},
        {"section_errors", tr.section_errors},
        {"ser", tr.ser},
        {"bit_errors", tr.bit_errors},
        {"iterations_run", tr.iterations_run},
    };
    if (include_timings) t["wall_time_s"] = tr.wall_time_s;
    trials.push_back(std::move(t));
  }
  j["trials"] = std::move(trials);
  j["aggregate"] = {
      {"trials", report.trials.size()},
      {"mean_ser", report.mean_ser},
      {"stderr_ser", report.stderr_ser},
      {"zero_error_trials", report.zero_error_trials},
      {"se_predicted_ser", report.se_predicted_ser},
      {"mean_codeword_power", report.mean_codeword_power},
  };
  return j.dump(2) + "\n";
}

std::string trials_to_csv(const SimReport& report, bool include_timings) {
  std::string out = "trial,seed,section_errors,ser,bit_errors,iterations_run";
  if (include_timings) out += ",wall_time_s";
  out += '\n';
  for (const TrialResult& tr : report.trials) {
    out += std::to_string(tr.trial);
    out += ',';
    out += std::to_string(tr.seed);
    out += ',';
    out += std::to_string(tr.section_errors);
    out += ',';
    out += format_g17(tr.ser);
    out += ',';
    out += std::to_string(tr.bit_errors);
    out += ',';
    out += std::to_string(tr.iterations_run);
    if (include_timings) {
      out += ',';
      out += format_g17(tr.wall_time_s);
    }
    out += '\n';
  }
  return out;
}

std::string sweep_to_csv(std::span<const SimReport> reports) {
  std::string out =
      "rate_frac,n,mean_ser,stderr,se_predicted_ser,zero_error_trials,"
      "trials\n";
  for (const SimReport& r : reports) {
    out += format_g17(r.config.rate_frac);
    out += ',';
    out += std::to_string(r.params.n);
    out += ',';
    out += format_g17(r.mean_ser);
    out += ',';
    out += format_g17(r.stderr_ser);
    out += ',';
    out += format_g17(r.se_predicted_ser);
    out += ',';
    out += std::to_string(r.zero_error_trials);
    out += ',';
    out += std::to_string(r.trials.size());
    out += '\n';
  }
  return out;
}

std::string diagnostics_to_csv(const SimReport& report) {
  std::string out = "trial,t,nmse,weighted_correct_fraction\n";
  for (std::size_t i = 0; i < report.diagnostics.size(); ++i) {
    for (const IterationDiag& d : report.diagnostics[i]) {
      out += std::to_string(i);
      out += ',';
      out += std::to_string(d.t);
      out += ',';
      out += format_g17(d.nmse);
      out += ',';
      out += format_g17(d.weighted_correct);
      out += '\n';
    }
  }
  return out;
}

}  // namespace sparc
