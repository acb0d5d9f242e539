#include "sparc/amp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sparc {

void eta_step(std::span<const double> s, const PowerAllocation& alloc,
              const SparcParams& params, double tau2, std::span<double> out) {
  if (!(tau2 > 0.0))
    throw std::invalid_argument("eta_step: tau2 must be positive");
  if (s.size() != params.N || out.size() != params.N)
    throw std::invalid_argument("eta_step: length mismatch");
  if (alloc.values.size() != params.L)
    throw std::invalid_argument("eta_step: allocation length mismatch");

  const double n = static_cast<double>(params.n);
  const std::uint32_t M = params.M;
  for (std::uint32_t l = 0; l < params.L; ++l) {
    const std::size_t base = static_cast<std::size_t>(l) * M;
    const double c = std::sqrt(n * alloc.values[l]);
    const double scale = c / tau2;
    double m = -std::numeric_limits<double>::infinity();
    for (std::uint32_t j = 0; j < M; ++j) {
      const double e = s[base + j] * scale;
      out[base + j] = e;
      if (e > m) m = e;
    }
    double sum = 0.0;
    for (std::uint32_t j = 0; j < M; ++j) {
      const double w = std::exp(out[base + j] - m);
      out[base + j] = w;
      sum += w;
    }
    const double norm = c / sum;
    for (std::uint32_t j = 0; j < M; ++j) out[base + j] *= norm;
  }
}

void residual_step(DecoderState& state, std::span<const double> y,
                   const DesignOperator& design, const SparcParams& params,
                   double tau2_prev, std::vector<double>& az,
                   std::vector<double>& scratch) {
  const std::size_t n = design.rows();
  if (y.size() != n)
    throw std::invalid_argument("residual_step: received length mismatch");
  if (state.beta.size() != design.cols())
    throw std::invalid_argument("residual_step: beta length mismatch");

  az.resize(n);
  design.forward(state.beta, az, scratch);

  double coef = 0.0;
  if (state.t > 0) {
    if (!(tau2_prev > 0.0))
      throw std::invalid_argument("residual_step: tau2_prev must be positive");
    if (state.z.size() != n)
      throw std::invalid_argument("residual_step: residual length mismatch");
    double norm2 = 0.0;
    for (double b : state.beta) norm2 += b * b;
    coef = (params.P - norm2 / static_cast<double>(params.n)) / tau2_prev;
  }

  std::vector<double> znew = std::move(state.z_prev);
  znew.resize(n);
  if (state.t == 0) {
    for (std::size_t i = 0; i < n; ++i) znew[i] = y[i] - az[i];
  } else {
    for (std::size_t i = 0; i < n; ++i)
      znew[i] = y[i] - az[i] + coef * state.z[i];
  }
  state.z_prev = std::move(state.z);
  state.z = std::move(znew);
}

DecodeResult decode(std::span<const double> y, const DesignOperator& design,
                    const PowerAllocation& alloc, const SparcParams& params,
                    const SeTrace& schedule, const DecodeOptions& opts) {
  const std::size_t T = schedule.steps();
  if (T < 1) throw std::invalid_argument("decode: schedule has no steps");
  if (schedule.tau2.size() < T)
    throw std::invalid_argument("decode: schedule shorter than its step count");
  if (y.size() != design.rows() || design.cols() != params.N)
    throw std::invalid_argument("decode: dimension mismatch");
  if (!opts.truth.empty() && opts.truth.size() != params.N)
    throw std::invalid_argument("decode: truth length mismatch");

  DecoderState state;
  state.beta.assign(params.N, 0.0);

  std::vector<double> az, scratch, s(params.N), beta_prev;
  DecodeResult result;
  const double nP = static_cast<double>(params.n) * params.P;

  for (std::size_t t = 0; t < T; ++t) {
    residual_step(state, y, design, params,
                  t > 0 ? schedule.tau2[t - 1] : 0.0, az, scratch);
    design.adjoint(state.z, s, scratch);
    for (std::size_t j = 0; j < params.N; ++j) s[j] += state.beta[j];
    if (opts.early_stop) beta_prev = state.beta;
    eta_step(s, alloc, params, schedule.tau2[t], state.beta);
    state.t++;

    if (!opts.truth.empty()) {
      double dot = 0.0, err2 = 0.0;
      for (std::size_t j = 0; j < params.N; ++j) {
        dot += opts.truth[j] * state.beta[j];
        const double d = state.beta[j] - opts.truth[j];
        err2 += d * d;
      }
      result.diagnostics.push_back(
          {state.t, err2 / static_cast<double>(params.n), dot / nP});
    }

    if (opts.early_stop) {
      double sup = 0.0;
      for (std::size_t j = 0; j < params.N; ++j)
        sup = std::max(sup, std::abs(state.beta[j] - beta_prev[j]));
      if (sup <= 1e-12) break;
    }
  }

  auto [beta_hat, msg] = hard_decision(state.beta, alloc, params);
  result.message = std::move(msg);
  result.beta_hat = std::move(beta_hat);
  result.iterations = state.t;
  return result;
}

}  // namespace sparc
