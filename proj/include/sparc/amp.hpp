#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sparc/design.hpp"
#include "sparc/params.hpp"
#include "sparc/power_alloc.hpp"
#include "sparc/state_evolution.hpp"

namespace sparc {

// AMP iterate. beta starts as the all-zeros vector; the residual with a
// negative index is treated as zero, so the first residual is y itself.
struct DecoderState {
  std::vector<double> beta;    // beta^t, length N
  std::vector<double> z;       // z^t, length n (empty before the first step)
  std::vector<double> z_prev;  // z^(t-1)
  std::size_t t = 0;
};

// Section-wise posterior-mean denoiser: within section l,
// out_i = sqrt(n*P_l) * softmax_i(s_j * sqrt(n*P_l) / tau2). Max-subtracted,
// so arbitrarily large statistics cannot overflow. Output entries lie in
// [0, sqrt(n*P_l)] and sum to sqrt(n*P_l) per section.
void eta_step(std::span<const double> s, const PowerAllocation& alloc,
              const SparcParams& params, double tau2, std::span<double> out);

// Residual update z^t = y - A*beta^t + z^(t-1)/tau2_prev * (P - |beta^t|^2/n).
// At t = 0 the correction term is dropped and z^0 = y exactly. az and scratch
// are caller-owned work buffers.
void residual_step(DecoderState& state, std::span<const double> y,
                   const DesignOperator& design, const SparcParams& params,
                   double tau2_prev, std::vector<double>& az,
                   std::vector<double>& scratch);

struct IterationDiag {
  std::size_t t = 0;
  double nmse = 0.0;              // |beta^t - beta0|^2 / n
  double weighted_correct = 0.0;  // beta0' * beta^t / (n*P)
};

struct DecodeOptions {
  // Stop early once beta stops changing (sup-norm <= 1e-12). Off by default:
  // the decoder runs exactly the scheduled number of steps.
  bool early_stop = false;
  // True coefficient vector; enables per-iteration diagnostics.
  std::span<const double> truth = {};
};

struct DecodeResult {
  Message message;
  BetaVector beta_hat;
  std::size_t iterations = 0;
  std::vector<IterationDiag> diagnostics;
};

// Runs the AMP iteration for schedule.steps() steps against the tau^2
// schedule, then takes the section-wise hard decision.
DecodeResult decode(std::span<const double> y, const DesignOperator& design,
                    const PowerAllocation& alloc, const SparcParams& params,
                    const SeTrace& schedule, const DecodeOptions& opts = {});

}  // namespace sparc
