#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparc/amp.hpp"
#include "sparc/channel.hpp"
#include "sparc/design.hpp"
#include "sparc/params.hpp"
#include "sparc/power_alloc.hpp"
#include "sparc/state_evolution.hpp"

namespace sparc {

enum class ScheduleSource { automatic, mc, asymptotic };

std::string_view to_string(ScheduleSource src);
ScheduleSource parse_schedule_source(std::string_view name);

// Full experiment description. Negative values mean "use the default":
// P defaults to snr (sigma2 = 1), kappa to 2C, a and f to R/C.
struct SimConfig {
  std::uint32_t L = 1024;
  std::uint32_t M = 512;
  double rate_frac = 0.75;  // R_target = rate_frac * C
  double snr = 15.0;
  double P = -1.0;
  AllocScheme alloc = AllocScheme::modified;
  double kappa = -1.0;
  double a = -1.0;
  double f = -1.0;
  DesignKind design = DesignKind::hadamard;
  ScheduleSource schedule = ScheduleSource::automatic;
  std::size_t trials = 0;
  std::uint64_t seed = 1;
  std::size_t mc_samples = 1000;
  std::size_t t_max = 32;         // cap for Monte Carlo schedules
  unsigned workers = 0;           // 0 = hardware concurrency
  bool collect_diagnostics = false;
};

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;  // per-trial base seed
  std::uint32_t section_errors = 0;
  double ser = 0.0;
  std::uint64_t bit_errors = 0;
  std::size_t iterations_run = 0;
  double wall_time_s = 0.0;
};

struct SimReport {
  SimConfig config;  // as resolved (defaults substituted)
  SparcParams params;
  PowerAllocation alloc;
  SeTrace schedule;
  std::vector<TrialResult> trials;
  std::vector<std::vector<IterationDiag>> diagnostics;  // per trial, optional
  double mean_ser = 0.0;
  double stderr_ser = 0.0;
  std::size_t zero_error_trials = 0;
  double se_predicted_ser = 0.0;
  double mean_codeword_power = 0.0;
};

// Resolution helpers shared by the simulator and the CLI.
SparcParams params_from_config(const SimConfig& cfg);
PowerAllocation alloc_from_config(const SimConfig& cfg,
                                  const SparcParams& params);
SeTrace schedule_from_config(const SimConfig& cfg, const SparcParams& params,
                             const PowerAllocation& alloc);

// Runs cfg.trials independent seeded trials (sample message, build design,
// encode, transmit, decode, score) and aggregates. Trials execute in
// parallel; the report is identical for any worker count.
SimReport run_trials(const SimConfig& cfg);

// One report per rate fraction. Throws if any rate reaches capacity.
std::vector<SimReport> sweep(const SimConfig& cfg,
                             std::span<const double> rate_fracs);

// Serialization. Reports are deterministic byte-for-byte unless
// include_timings is set (wall times vary run to run).
std::string format_g17(double v);  // %.17g
std::string report_to_json(const SimReport& report,
                           bool include_timings = false);
std::string trials_to_csv(const SimReport& report,
                          bool include_timings = false);
std::string sweep_to_csv(std::span<const SimReport> reports);
std::string diagnostics_to_csv(const SimReport& report);

}  // namespace sparc
