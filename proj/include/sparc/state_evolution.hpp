#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparc/params.hpp"
#include "sparc/power_alloc.hpp"

namespace sparc {

enum class SeMode { mc, asymptotic_exp, asymptotic_mod, threshold };

std::string_view to_string(SeMode mode);

// State-evolution trajectory. tau2[t] and x[t] always satisfy
// tau2[t] = sigma2 + P*(1 - x[t]) with tau2[0] = sigma2 + P and x[0] = 0.
// xi[t] is the decodable-prefix fraction driving x[t+1] (asymptotic and
// threshold modes); v[t] is the unweighted correct-section estimate after
// step t, so 1 - v[t_star] predicts the section error rate. t_star is the
// step at which x reaches 1 (absent when it never does; for Monte Carlo
// traces it is the index where the trace stopped).
struct SeTrace {
  SeMode mode = SeMode::mc;
  std::vector<double> tau2;
  std::vector<double> x;
  std::vector<double> xi;  // empty unless asymptotic
  std::vector<double> v;   // empty unless computed
  std::optional<std::size_t> t_star;

  // Number of decoder steps this trace supports.
  std::size_t steps() const {
    return t_star ? *t_star : (tau2.empty() ? 0 : tau2.size() - 1);
  }
};

// One application of the state-evolution map at effective noise tau2: the
// Monte Carlo estimate of the power-weighted correctly-decoded fraction.
double mc_se_update(const SparcParams& params, const PowerAllocation& alloc,
                    double tau2, std::size_t mc_samples, std::uint64_t seed,
                    unsigned workers = 0);

// Finite-n state evolution with the per-section expectations estimated by
// Monte Carlo (mc_samples independent draws of M standard Gaussians per
// section, one substream per (step, section)). Stops at t_max, when x
// reaches 1, or when it stops increasing. Also fills v from the same draws.
SeTrace mc_state_evolution(const SparcParams& params,
                           const PowerAllocation& alloc, std::size_t t_max,
                           std::size_t mc_samples, std::uint64_t seed,
                           unsigned workers = 0);

// Number of steps until the asymptotic effective noise reaches sigma^2 for
// the exponential kappa = 2C allocation: ceil(2C / log2(C/R)).
// Throws when R >= C (the increment is not positive).
std::size_t t_star_steps(double C, double R);

// Closed-form large-system trace for the exponential kappa = 2C allocation:
// xi grows by log2(C/R)/(2C) per step until it reaches 1, and
// x[t] = ((1+snr) - (1+snr)^(1-xi[t-1])) / snr.
SeTrace asymptotic_se_exponential(const SparcParams& params);

// Closed-form large-system trace for the modified (a, f) allocation. The
// decodable-prefix cutoff is computed from the exponential part of the
// allocation; once it passes f the flat tail is above threshold too and x
// jumps to 1. a = 0 degenerates to the flat allocation: x reaches 1 in one
// step or never.
SeTrace asymptotic_se_modified(const SparcParams& params, double a, double f,
                               std::size_t t_max = 200);

// Finite-L decodability iteration: at each step a section counts as
// decodable iff L*P_l > 2*ln(2)*R*tau2, x becomes the decodable power
// fraction, and tau2 updates as usual. Reports via t_star whether x reached 1
// within t_max steps.
SeTrace threshold_iteration(const SparcParams& params,
                            const PowerAllocation& alloc, std::size_t t_max);

// Unweighted correct-section estimates v[1..] for a given tau^2 schedule
// (v[t+1] uses tau2_schedule[t]; v[0] is the uninformed value 1/M).
std::vector<double> ser_prediction(const SparcParams& params,
                                   const PowerAllocation& alloc,
                                   std::span<const double> tau2_schedule,
                                   std::size_t mc_samples, std::uint64_t seed,
                                   unsigned workers = 0);

// CSV with columns t,tau2,x,xi,v (blank cells where a column is absent).
std::string trace_to_csv(const SeTrace& trace);

}  // namespace sparc
