#include "sparc/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sparc/parallel.hpp"
#include "sparc/rng.hpp"

namespace sparc {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// E[ exp(b(U1+b)) / (exp(b(U1+b)) + sum_{j=2..M} exp(b Uj)) ] with U i.i.d.
// N(0,1), estimated from `samples` independent draws. This is the posterior
// mass the denoiser puts on the sent column at effective noise tau = b'/b.
// Max-subtraction keeps the exponentials finite for any b.
double section_expectation_mc(double b, std::uint32_t M, std::size_t samples,
                              Rng& rng, std::vector<double>& buf) {
  if (M == 1) return 1.0;
  // For b >= 40 the wrong-column odds are below 1 ulp: a competitor needs
  // Uj - U1 > b, and exp(-b*(b+U1-Uj)) underflows even 20 sigmas out.
  if (b >= 40.0) return 1.0;
  buf.resize(M);
  double acc = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::uint32_t j = 0; j < M; ++j) {
      double e = b * rng.normal();
      if (j == 0) e += b * b;
      buf[j] = e;
      if (e > m) m = e;
    }
    double denom = 0.0;
    for (std::uint32_t j = 0; j < M; ++j) denom += std::exp(buf[j] - m);
    acc += std::exp(buf[0] - m) / denom;
  }
  return acc / static_cast<double>(samples);
}

// One Monte Carlo sweep over sections at noise tau2: per-section expectations
// into evals[l], one independent substream per (step, section).
void section_expectations(const SparcParams& params,
                          const PowerAllocation& alloc, double tau2,
                          std::size_t step, std::size_t mc_samples,
                          std::uint64_t seed, unsigned workers,
                          std::vector<double>& evals) {
  evals.resize(params.L);
  const double tau = std::sqrt(tau2);
  const double n = static_cast<double>(params.n);
  parallel_for(params.L, workers, [&](std::size_t l) {
    static thread_local std::vector<double> buf;
    Rng rng(derive_seed(seed, {step, l}));
    const double b = std::sqrt(n * alloc.values[l]) / tau;
    evals[l] = section_expectation_mc(b, params.M, mc_samples, rng, buf);
  });
}

void require_below_capacity(const SparcParams& params) {
  if (!(params.R < params.C))
    throw std::invalid_argument("state evolution requires R < C");
}

}  // namespace

std::string_view to_string(SeMode mode) {
  switch (mode) {
    case SeMode::mc: return "mc";
    case SeMode::asymptotic_exp: return "asymptotic_exp";
    case SeMode::asymptotic_mod: return "asymptotic_mod";
    case SeMode::threshold: return "threshold";
  }
  return "?";
}

std::size_t t_star_steps(double C, double R) {
  if (!(C > 0.0) || !(R > 0.0))
    throw std::invalid_argument("t_star: C and R must be positive");
  if (!(R < C)) throw std::invalid_argument("t_star: requires R < C");
  const double lg = std::log2(C / R);
  if (lg <= 1e-12)
    throw std::invalid_argument("t_star: diverges as R approaches C");
  const double q = 2.0 * C / lg;
  return static_cast<std::size_t>(std::ceil(q - 1e-12));
}

double mc_se_update(const SparcParams& params, const PowerAllocation& alloc,
                    double tau2, std::size_t mc_samples, std::uint64_t seed,
                    unsigned workers) {
  if (!(tau2 > 0.0))
    throw std::invalid_argument("mc_se_update: tau2 must be positive");
  if (alloc.values.size() != params.L)
    throw std::invalid_argument("mc_se_update: allocation length");
  std::vector<double> evals;
  section_expectations(params, alloc, tau2, 0, mc_samples, seed, workers,
                       evals);
  double xw = 0.0;
  for (std::uint32_t l = 0; l < params.L; ++l)
    xw += (alloc.values[l] / params.P) * evals[l];
  return std::min(xw, 1.0);
}

SeTrace mc_state_evolution(const SparcParams& params,
                           const PowerAllocation& alloc, std::size_t t_max,
                           std::size_t mc_samples, std::uint64_t seed,
                           unsigned workers) {
  if (mc_samples < 1)
    throw std::invalid_argument("mc_state_evolution: need mc_samples >= 1");
  if (t_max < 1)
    throw std::invalid_argument("mc_state_evolution: need t_max >= 1");
  if (alloc.values.size() != params.L)
    throw std::invalid_argument("mc_state_evolution: allocation length");

  SeTrace tr;
  tr.mode = SeMode::mc;
  tr.tau2 = {params.sigma2 + params.P};
  tr.x = {0.0};
  tr.v = {1.0 / params.M};

  std::vector<double> evals;
  for (std::size_t t = 0; t < t_max; ++t) {
    section_expectations(params, alloc, tr.tau2[t], t, mc_samples, seed,
                         workers, evals);
    double xw = 0.0;
    double vu = 0.0;
    for (std::uint32_t l = 0; l < params.L; ++l) {
      xw += (alloc.values[l] / params.P) * evals[l];
      vu += evals[l];
    }
    vu /= static_cast<double>(params.L);
    // The exact recursion is monotone; clamping keeps the sampled one so.
    double xn = std::min(xw, 1.0);
    xn = std::max(xn, tr.x[t]);
    tr.x.push_back(xn);
    tr.tau2.push_back(params.sigma2 + params.P * (1.0 - xn));
    tr.v.push_back(std::min(vu, 1.0));
    if (xn >= 1.0 - 1e-12) break;
    if (xn - tr.x[t] <= 1e-12) break;  // no more progress
  }
  tr.t_star = tr.x.size() - 1;
  return tr;
}

SeTrace asymptotic_se_exponential(const SparcParams& params) {
  require_below_capacity(params);
  const std::size_t T = t_star_steps(params.C, params.R);
  const double delta = std::log2(params.C / params.R) / (2.0 * params.C);
  const double snr = params.snr;

  SeTrace tr;
  tr.mode = SeMode::asymptotic_exp;
  tr.tau2.reserve(T + 1);
  tr.x.reserve(T + 1);
  tr.xi.reserve(T + 1);
  tr.x.push_back(0.0);
  tr.tau2.push_back(params.sigma2 + params.P);
  for (std::size_t t = 1; t <= T; ++t) {
    const double xi_prev = std::min(static_cast<double>(t) * delta, 1.0);
    double x;
    if (xi_prev >= 1.0) {
      x = 1.0;
    } else {
      x = ((1.0 + snr) - std::pow(1.0 + snr, 1.0 - xi_prev)) / snr;
      x = std::clamp(x, tr.x.back(), 1.0);
    }
    tr.x.push_back(x);
    tr.tau2.push_back(params.sigma2 + params.P * (1.0 - x));
  }
  for (std::size_t t = 0; t <= T; ++t)
    tr.xi.push_back(std::min(static_cast<double>(t + 1) * delta, 1.0));
  tr.t_star = T;
  return tr;
}

SeTrace asymptotic_se_modified(const SparcParams& params, double a, double f,
                               std::size_t t_max) {
  require_below_capacity(params);
  if (!(a >= 0.0) || !(f >= 0.0 && f <= 1.0))
    throw std::invalid_argument("asymptotic_se_modified: invalid (a, f)");
  if (t_max < 1)
    throw std::invalid_argument("asymptotic_se_modified: need t_max >= 1");

  SeTrace tr;
  tr.mode = SeMode::asymptotic_mod;
  tr.x.push_back(0.0);
  tr.tau2.push_back(params.sigma2 + params.P);

  if (a == 0.0) {
    // Flat allocation: every section has limiting power L*P_l = P, so either
    // all sections clear the threshold at tau_0 and x jumps to 1, or none
    // ever do.
    const bool decodable =
        params.P > 2.0 * kLn2 * params.R * tr.tau2[0];
    tr.xi.push_back(decodable ? 1.0 : 0.0);
    tr.x.push_back(decodable ? 1.0 : 0.0);
    tr.tau2.push_back(params.sigma2 + params.P * (1.0 - tr.x.back()));
    if (decodable) tr.t_star = 1;
    return tr;
  }

  const double twoAC = 2.0 * a * params.C;
  // D = 1 + 2^(-2aCf) ((1-f) 2aC ln2 - 1); the limiting power of section
  // xi*L is (2aC ln2 P / D) 2^(-2aC xi) in the decaying part and the xi = f
  // value beyond it.
  const double D =
      1.0 + std::exp2(-twoAC * f) * ((1.0 - f) * twoAC * kLn2 - 1.0);
  const double bracket = std::exp2(twoAC * f) + (1.0 - f) * twoAC * kLn2 - 1.0;
  const double num = a * params.C * params.P * std::exp2(twoAC * f);

  for (std::size_t t = 0; t < t_max; ++t) {
    const double arg = num / (params.R * tr.tau2[t] * bracket);
    const double xi_u = std::log2(arg) / twoAC;  // unclamped prefix cutoff
    tr.xi.push_back(std::clamp(xi_u, 0.0, 1.0));
    double xn;
    if (xi_u <= 0.0) {
      xn = 0.0;  // even the first section is below threshold
    } else if (xi_u <= f) {
      xn = (1.0 - std::exp2(-twoAC * xi_u)) / D;
    } else {
      // The cutoff passed the junction, so the flat tail is above threshold
      // as well and every section decodes.
      xn = 1.0;
    }
    xn = std::clamp(xn, tr.x[t], 1.0);
    if (xn >= 1.0 - 1e-12) xn = 1.0;
    tr.x.push_back(xn);
    tr.tau2.push_back(params.sigma2 + params.P * (1.0 - xn));
    if (xn == 1.0) {
      tr.t_star = t + 1;
      break;
    }
    if (xn - tr.x[t] <= 1e-15) break;  // stalled below 1
  }
  return tr;
}

SeTrace threshold_iteration(const SparcParams& params,
                            const PowerAllocation& alloc, std::size_t t_max) {
  if (alloc.values.size() != params.L)
    throw std::invalid_argument("threshold_iteration: allocation length");

  // Prefix power mass; the allocation is non-increasing, so the decodable
  // set at any threshold is a prefix.
  std::vector<double> prefix(params.L + 1, 0.0);
  for (std::uint32_t l = 0; l < params.L; ++l)
    prefix[l + 1] = prefix[l] + alloc.values[l];

  const double L = static_cast<double>(params.L);
  SeTrace tr;
  tr.mode = SeMode::threshold;
  tr.x.push_back(0.0);
  tr.tau2.push_back(params.sigma2 + params.P);

  for (std::size_t t = 0; t < t_max; ++t) {
    const double thr = 2.0 * kLn2 * params.R * tr.tau2[t];
    const auto it = std::partition_point(
        alloc.values.begin(), alloc.values.end(),
        [&](double p) { return L * p > thr; });  // strict, per the threshold
    const std::size_t count = static_cast<std::size_t>(
        std::distance(alloc.values.begin(), it));
    tr.xi.push_back(static_cast<double>(count) / L);  // decodable fraction
    double xn = prefix[count] / params.P;
    xn = std::clamp(xn, tr.x[t], 1.0);
    if (xn >= 1.0 - 1e-12) xn = 1.0;
    tr.x.push_back(xn);
    tr.tau2.push_back(params.sigma2 + params.P * (1.0 - xn));
    if (xn == 1.0) {
      tr.t_star = t + 1;
      break;
    }
    if (xn == tr.x[t]) break;  // fixed point below 1
  }
  return tr;
}

std::vector<double> ser_prediction(const SparcParams& params,
                                   const PowerAllocation& alloc,
                                   std::span<const double> tau2_schedule,
                                   std::size_t mc_samples, std::uint64_t seed,
                                   unsigned workers) {
  if (tau2_schedule.empty())
    throw std::invalid_argument("ser_prediction: empty schedule");
  if (mc_samples < 1)
    throw std::invalid_argument("ser_prediction: need mc_samples >= 1");

  std::vector<double> v(tau2_schedule.size());
  v[0] = 1.0 / params.M;  // uninformed prior mass on the sent column
  std::vector<double> evals;
  for (std::size_t t = 0; t + 1 < tau2_schedule.size(); ++t) {
    section_expectations(params, alloc, tau2_schedule[t], t, mc_samples, seed,
                         workers, evals);
    double vu = 0.0;
    for (double e : evals) vu += e;
    v[t + 1] = std::min(vu / static_cast<double>(params.L), 1.0);
  }
  return v;
}

std::string trace_to_csv(const SeTrace& trace) {
  auto g17 = [](double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  std::string out = "t,tau2,x,xi,v\n";
  for (std::size_t t = 0; t < trace.tau2.size(); ++t) {
    out += std::to_string(t);
    out += ',';
    out += g17(trace.tau2[t]);
    out += ',';
    out += g17(trace.x[t]);
    out += ',';
    if (t < trace.xi.size()) out += g17(trace.xi[t]);
    out += ',';
    if (t < trace.v.size()) out += g17(trace.v[t]);
    out += '\n';
  }
  return out;
}

}  // namespace sparc
