#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparc/channel.hpp"
#include "sparc/sim.hpp"

using namespace sparc;

TEST_CASE("awgn: deterministic, additive, correct variance") {
  const std::vector<double> x{1.0, -2.0, 0.5, 0.0};
  const auto y1 = awgn_transmit(x, {0.25, 42});
  const auto y2 = awgn_transmit(x, {0.25, 42});
  CHECK(y1 == y2);
  const auto y3 = awgn_transmit(x, {0.25, 43});
  CHECK(y1 != y3);

  // effectively zero noise
  const auto quiet = awgn_transmit(x, {1e-300, 7});
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(std::abs(quiet[i] - x[i]) < 1e-140);

  // sample variance within 1% at n = 10^6
  const std::vector<double> zeros(1000000, 0.0);
  const auto w = awgn_transmit(zeros, {2.0, 123});
  double mean = 0.0;
  for (double e : w) mean += e;
  mean /= w.size();
  double var = 0.0;
  for (double e : w) var += (e - mean) * (e - mean);
  var /= (w.size() - 1);
  CHECK(var == doctest::Approx(2.0).epsilon(0.01));

  CHECK_THROWS_AS(awgn_transmit(x, {0.0, 1}), std::invalid_argument);
}

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.L = 32;
  cfg.M = 16;
  cfg.rate_frac = 0.7;
  cfg.snr = 15.0;
  cfg.alloc = AllocScheme::exponential;
  cfg.design = DesignKind::hadamard;
  cfg.schedule = ScheduleSource::automatic;
  cfg.mc_samples = 100;
  cfg.trials = 12;
  cfg.seed = 2718;
  return cfg;
}

}  // namespace

TEST_CASE("run_trials with zero trials returns an empty report") {
  SimConfig cfg = small_config();
  cfg.trials = 0;
  const SimReport report = run_trials(cfg);
  CHECK(report.trials.empty());
  CHECK(report.mean_ser == 0.0);
  CHECK(report.zero_error_trials == 0);
}

TEST_CASE("run_trials is reproducible and worker-count independent") {
  SimConfig cfg = small_config();
  cfg.workers = 1;
  const SimReport r1 = run_trials(cfg);
  cfg.workers = 2;
  const SimReport r2 = run_trials(cfg);
  cfg.workers = 3;
  const SimReport r3 = run_trials(cfg);

  const std::string j1 = report_to_json(r1);
  CHECK(j1 == report_to_json(r2));
  CHECK(j1 == report_to_json(r3));
  CHECK(trials_to_csv(r1) == trials_to_csv(r2));

  // and a second identical run gives identical bytes
  cfg.workers = 1;
  CHECK(report_to_json(run_trials(cfg)) == j1);
}

TEST_CASE("run_trials aggregates exactly") {
  const SimReport report = run_trials(small_config());
  REQUIRE(report.trials.size() == 12);
  double sum = 0.0;
  std::size_t zero = 0;
  for (const TrialResult& t : report.trials) {
    CHECK(t.ser == static_cast<double>(t.section_errors) / report.params.L);
    CHECK(t.section_errors <= report.params.L);
    sum += t.ser;
    if (t.section_errors == 0) ++zero;
  }
  CHECK(report.mean_ser == sum / 12.0);  // same summation order, exact
  CHECK(report.zero_error_trials == zero);
  CHECK(report.se_predicted_ser >= 0.0);
  CHECK(report.se_predicted_ser <= 1.0);
}

TEST_CASE("run_trials validates the configuration") {
  SimConfig cfg = small_config();
  cfg.rate_frac = 1.1;
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);

  cfg = small_config();
  cfg.L = 3;  // N = 48, not a power of two
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);

  cfg = small_config();
  cfg.design = DesignKind::gaussian;
  cfg.L = 4096;
  cfg.M = 4096;  // dense gaussian at N = 2^24 would need > 2 GiB
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);

  cfg = small_config();
  cfg.snr = -1.0;
  CHECK_THROWS_AS(run_trials(cfg), std::invalid_argument);
}

TEST_CASE("schedule source selection") {
  SimConfig cfg = small_config();
  const SparcParams params = params_from_config(cfg);

  // exponential with default kappa = 2C: closed form
  PowerAllocation alloc = alloc_from_config(cfg, params);
  CHECK(schedule_from_config(cfg, params, alloc).mode ==
        SeMode::asymptotic_exp);

  // exponential with another kappa: Monte Carlo
  cfg.kappa = 2.8;
  alloc = alloc_from_config(cfg, params);
  CHECK(schedule_from_config(cfg, params, alloc).mode == SeMode::mc);
  // ... and the asymptotic source refuses it
  cfg.schedule = ScheduleSource::asymptotic;
  CHECK_THROWS_AS(schedule_from_config(cfg, params, alloc),
                  std::invalid_argument);

  // modified allocation: closed form
  cfg = small_config();
  cfg.alloc = AllocScheme::modified;
  cfg.a = 0.75;
  cfg.f = 0.75;
  alloc = alloc_from_config(cfg, params);
  CHECK(schedule_from_config(cfg, params, alloc).mode ==
        SeMode::asymptotic_mod);

  // flat allocation: Monte Carlo under automatic
  cfg = small_config();
  cfg.alloc = AllocScheme::flat;
  alloc = alloc_from_config(cfg, params);
  CHECK(schedule_from_config(cfg, params, alloc).mode == SeMode::mc);

  // forced Monte Carlo
  cfg = small_config();
  cfg.schedule = ScheduleSource::mc;
  alloc = alloc_from_config(cfg, params);
  CHECK(schedule_from_config(cfg, params, alloc).mode == SeMode::mc);
}

TEST_CASE("config defaults resolve to kappa = 2C and a = f = R/C") {
  SimConfig cfg = small_config();
  const SparcParams params = params_from_config(cfg);
  PowerAllocation alloc = alloc_from_config(cfg, params);
  CHECK(alloc.kappa == doctest::Approx(2.0 * params.C).epsilon(1e-15));

  cfg.alloc = AllocScheme::modified;
  alloc = alloc_from_config(cfg, params);
  CHECK(alloc.a == doctest::Approx(params.R / params.C).epsilon(1e-15));
  CHECK(alloc.f == doctest::Approx(params.R / params.C).epsilon(1e-15));

  // sigma2 defaults to 1 (P = snr)
  CHECK(params.sigma2 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("report json carries the resolved config and aggregates") {
  const SimReport report = run_trials(small_config());
  const auto j = nlohmann::json::parse(report_to_json(report));
  CHECK(j["config"]["L"] == 32);
  CHECK(j["config"]["kappa"].get<double>() ==
        doctest::Approx(2.0 * report.params.C));
  CHECK(j["params"]["n"] == report.params.n);
  CHECK(j["aggregate"]["trials"] == 12);
  CHECK(j["trials"].size() == 12);
  // no timings by default; opt in via the flag
  CHECK(!j["trials"][0].contains("wall_time_s"));
  const auto jt = nlohmann::json::parse(report_to_json(report, true));
  CHECK(jt["trials"][0].contains("wall_time_s"));
}

TEST_CASE("trial csv has one row per trial and 17-digit floats round-trip") {
  const SimReport report = run_trials(small_config());
  const std::string csv = trials_to_csv(report);
  CHECK(csv.rfind("trial,seed,section_errors,ser,bit_errors,iterations_run\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') ==
        static_cast<long>(report.trials.size()) + 1);

  CHECK(std::stod(format_g17(report.mean_ser)) == report.mean_ser);
  CHECK(std::stod(format_g17(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("sweep: single rate equals run_trials, bad rates rejected") {
  SimConfig cfg = small_config();
  cfg.trials = 6;
  const std::vector<double> one_rate{0.7};
  const auto reports = sweep(cfg, one_rate);
  REQUIRE(reports.size() == 1);
  CHECK(report_to_json(reports[0]) == report_to_json(run_trials(cfg)));

  const std::vector<double> bad{0.7, 1.05};
  CHECK_THROWS_AS(sweep(cfg, bad), std::invalid_argument);
}

TEST_CASE("sweep csv matches the fixed schema") {
  SimConfig cfg = small_config();
  cfg.trials = 4;
  const std::vector<double> rates{0.6, 0.7};
  const auto reports = sweep(cfg, rates);
  const std::string csv = sweep_to_csv(reports);
  CHECK(csv.rfind("rate_frac,n,mean_ser,stderr,se_predicted_ser,"
                  "zero_error_trials,trials\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  // per-rate block lengths recomputed from the rate: n = round(128 / (rf*C))
  CHECK(csv.find("0.59999999999999998,107,") != std::string::npos);
  CHECK(csv.find("0.69999999999999996,91,") != std::string::npos);
}

TEST_CASE("sweep output is byte-identical across worker counts") {
  SimConfig cfg = small_config();
  cfg.trials = 8;
  const std::vector<double> rates{0.65, 0.75};
  cfg.workers = 1;
  const std::string csv1 = sweep_to_csv(sweep(cfg, rates));
  cfg.workers = 2;
  const std::string csv2 = sweep_to_csv(sweep(cfg, rates));
  CHECK(csv1 == csv2);
}

TEST_CASE("diagnostics csv schema") {
  SimConfig cfg = small_config();
  cfg.trials = 3;
  cfg.collect_diagnostics = true;
  const SimReport report = run_trials(cfg);
  const std::string csv = diagnostics_to_csv(report);
  CHECK(csv.rfind("trial,t,nmse,weighted_correct_fraction\n", 0) == 0);
  std::size_t rows = 0;
  for (const auto& d : report.diagnostics) rows += d.size();
  CHECK(std::count(csv.begin(), csv.end(), '\n') ==
        static_cast<long>(rows) + 1);
}
