#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "sparc/amp.hpp"
#include "sparc/channel.hpp"
#include "sparc/design.hpp"
#include "sparc/params.hpp"
#include "sparc/power_alloc.hpp"
#include "sparc/rng.hpp"
#include "sparc/sim.hpp"
#include "sparc/state_evolution.hpp"

using namespace sparc;

TEST_CASE("eta: equal statistics split the section mass evenly") {
  const SparcParams p = derive_params(2, 4, 1.0, 15.0, 15.0);
  const PowerAllocation alloc = exponential_allocation(p, 2.0 * p.C);
  std::vector<double> s(p.N, 0.7), out(p.N);
  eta_step(s, alloc, p, 2.0, out);
  for (std::uint32_t l = 0; l < p.L; ++l) {
    const double c = std::sqrt(p.n * alloc.values[l]);
    for (std::uint32_t j = 0; j < p.M; ++j)
      CHECK(out[l * p.M + j] == doctest::Approx(c / p.M).epsilon(1e-12));
  }
}

TEST_CASE("eta: a dominant statistic takes the whole section mass") {
  const SparcParams p = derive_params(1, 8, 1.0, 15.0, 15.0);
  const PowerAllocation alloc = flat_allocation(p);
  const double c = std::sqrt(p.n * alloc.values[0]);
  std::vector<double> s(p.N, 0.0), out(p.N);
  s[5] = 50.0;  // far beyond tau2 * ln(M) / c
  eta_step(s, alloc, p, 1.0, out);
  CHECK(out[5] == doctest::Approx(c).epsilon(1e-9));
  for (std::uint32_t j = 0; j < 8; ++j)
    if (j != 5) CHECK(out[j] <= 1e-9);
}

TEST_CASE("eta: two-column section is a logistic") {
  const SparcParams p = derive_params(1, 2, 0.5, 15.0, 15.0);
  const PowerAllocation alloc = flat_allocation(p);
  const double c = std::sqrt(p.n * alloc.values[0]);
  const double tau2 = 3.7;
  // s = (x, 0) with x*c/tau2 = 1 gives out_0/c = 1/(1+e^-1)
  std::vector<double> s{tau2 / c, 0.0}, out(2);
  eta_step(s, alloc, p, tau2, out);
  CHECK(out[0] / c == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(out[0] + out[1] == doctest::Approx(c).epsilon(1e-12));
}

TEST_CASE("eta: mass conservation and range under extreme inputs") {
  const SparcParams p = derive_params(16, 32, 1.4, 15.0, 15.0);
  const PowerAllocation alloc = modified_allocation(p, 0.75, 0.75);
  Rng rng(5);
  std::vector<double> s(p.N), out(p.N);
  for (double tau2 : {p.sigma2, 0.3 * (p.sigma2 + p.P), p.sigma2 + p.P}) {
    for (std::size_t j = 0; j < p.N; ++j)
      s[j] = 1e6 * rng.normal();  // large enough to overflow a raw exp
    eta_step(s, alloc, p, tau2, out);
    for (std::uint32_t l = 0; l < p.L; ++l) {
      const double c = std::sqrt(p.n * alloc.values[l]);
      double sum = 0.0;
      for (std::uint32_t j = 0; j < p.M; ++j) {
        const double e = out[std::size_t(l) * p.M + j];
        CHECK(e >= 0.0);
        CHECK(e <= c * (1.0 + 1e-12));
        sum += e;
      }
      CHECK(sum == doctest::Approx(c).epsilon(1e-9));
    }
  }
}

TEST_CASE("eta rejects bad arguments") {
  const SparcParams p = derive_params(2, 4, 1.0, 15.0, 15.0);
  const PowerAllocation alloc = flat_allocation(p);
  std::vector<double> s(p.N), out(p.N);
  CHECK_THROWS_AS(eta_step(s, alloc, p, 0.0, out), std::invalid_argument);
  CHECK_THROWS_AS(eta_step(s, alloc, p, -1.0, out), std::invalid_argument);
  std::vector<double> small(p.N - 1);
  CHECK_THROWS_AS(eta_step(small, alloc, p, 1.0, out), std::invalid_argument);
}

TEST_CASE("residual: the first residual is the received vector, bit for bit") {
  const SparcParams p = derive_params(4, 4, 1.0, 15.0, 15.0);
  GaussianDesign a(p.n, p.N, 3);
  const std::vector<double> y = awgn_transmit(std::vector<double>(p.n, 1.0),
                                              {p.sigma2, 11});
  DecoderState st;
  st.beta.assign(p.N, 0.0);
  std::vector<double> az, scratch;
  residual_step(st, y, a, p, 0.0, az, scratch);
  CHECK(st.z == y);
}

TEST_CASE("residual: exact codeword power kills the correction term") {
  const SparcParams p = derive_params(8, 8, 1.0, 15.0, 15.0);
  const PowerAllocation alloc = flat_allocation(p);
  GaussianDesign a(p.n, p.N, 9);
  Rng rng(17);
  const Message msg = random_message(p, rng);
  const BetaVector beta0 = message_to_beta(msg, alloc, p);

  std::vector<double> y(p.n);
  for (double& e : y) e = rng.normal();

  DecoderState st;
  st.beta = beta0.values;
  st.z.assign(p.n, 0.0);
  for (double& e : st.z) e = rng.normal();
  st.t = 1;
  const std::vector<double> z_old = st.z;

  std::vector<double> az(p.n), scratch;
  a.forward(st.beta, az, scratch);
  residual_step(st, y, a, p, 2.5, az, scratch);
  for (std::size_t i = 0; i < p.n; ++i)
    CHECK(st.z[i] == doctest::Approx(y[i] - az[i]).epsilon(1e-10));
  (void)z_old;
}

TEST_CASE("residual matches a literal transcription on a small instance") {
  const SparcParams p = derive_params(4, 4, 2.0, 15.0, 15.0);
  REQUIRE(p.n == 4);
  GaussianDesign a(p.n, p.N, 23);
  Rng rng(31);

  DecoderState st;
  st.beta.resize(p.N);
  for (double& e : st.beta) e = rng.normal();
  st.z.resize(p.n);
  for (double& e : st.z) e = rng.normal();
  st.t = 3;

  std::vector<double> y(p.n);
  for (double& e : y) e = rng.normal();
  const double tau2_prev = 1.7;
  const std::vector<double> expected = oracle::residual_literal(
      y, a, st.beta, st.z, tau2_prev, p.P, p.n);

  std::vector<double> az, scratch;
  residual_step(st, y, a, p, tau2_prev, az, scratch);
  for (std::size_t i = 0; i < p.n; ++i)
    CHECK(st.z[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("decode recovers every message of a tiny code without noise") {
  // sigma2 = 1e-12: the channel is effectively noiseless.
  const SparcParams p = derive_params(2, 2, 0.0625, 1e12, 1.0);
  REQUIRE(p.n == 32);
  const PowerAllocation alloc = flat_allocation(p);
  const SeTrace schedule = mc_state_evolution(p, alloc, 8, 100, 2);
  GaussianDesign a(p.n, p.N, 77);

  for (std::uint32_t m0 = 0; m0 < 2; ++m0) {
    for (std::uint32_t m1 = 0; m1 < 2; ++m1) {
      const Message msg{{m0, m1}};
      const BetaVector beta0 = message_to_beta(msg, alloc, p);
      std::vector<double> x(p.n);
      a.forward(beta0.values, x);
      const std::vector<double> y = awgn_transmit(x, {p.sigma2, 5});
      const DecodeResult res = decode(y, a, alloc, p, schedule);
      CHECK(res.message.sections == msg.sections);
    }
  }
}

TEST_CASE("decode validates the schedule and dimensions") {
  const SparcParams p = derive_params(2, 2, 0.5, 15.0, 15.0);
  const PowerAllocation alloc = flat_allocation(p);
  GaussianDesign a(p.n, p.N, 1);
  std::vector<double> y(p.n, 0.0);

  SeTrace bad;
  bad.tau2 = {16.0, 12.0};
  bad.x = {0.0, 0.25};
  bad.t_star = 5;  // claims more steps than it has entries
  CHECK_THROWS_AS(decode(y, a, alloc, p, bad), std::invalid_argument);

  SeTrace empty;
  CHECK_THROWS_AS(decode(y, a, alloc, p, empty), std::invalid_argument);

  const SeTrace ok = mc_state_evolution(p, alloc, 4, 50, 2);
  std::vector<double> y_short(p.n - 1, 0.0);
  CHECK_THROWS_AS(decode(y_short, a, alloc, p, ok), std::invalid_argument);
}

TEST_CASE("decode diagnostics track the power-weighted correct fraction") {
  const SparcParams p = derive_params(32, 16, 1.0, 15.0, 15.0);
  const PowerAllocation alloc = exponential_allocation(p, 2.0 * p.C);
  const SeTrace schedule = mc_state_evolution(p, alloc, 10, 150, 4);
  HadamardDesign a(p.n, p.N, 12);

  Rng rng(6);
  const Message msg = random_message(p, rng);
  const BetaVector beta0 = message_to_beta(msg, alloc, p);
  std::vector<double> x(p.n);
  a.forward(beta0.values, x);
  const std::vector<double> y = awgn_transmit(x, {p.sigma2, 8});

  DecodeOptions opts;
  opts.truth = beta0.values;
  const DecodeResult res = decode(y, a, alloc, p, schedule, opts);
  REQUIRE(res.diagnostics.size() == res.iterations);
  for (const IterationDiag& d : res.diagnostics) {
    CHECK(d.weighted_correct >= -0.5);
    CHECK(d.weighted_correct <= 1.5);
    CHECK(d.nmse >= 0.0);
  }
  // nmse and the correct fraction tell the same story: 1 - x ~ nmse / P
  const IterationDiag& last = res.diagnostics.back();
  CHECK(last.nmse / p.P ==
        doctest::Approx(1.0 - last.weighted_correct).epsilon(0.35));
}

TEST_CASE("test statistic variance at t = 0 is close to sigma2 + P") {
  // s0 - beta0 = (A^T A - I) beta0 + A^T w has entrywise variance about
  // tau0^2 = sigma2 + P for an i.i.d. Gaussian design.
  const SparcParams p = derive_params(64, 256, 0.5, 15.0, 15.0);
  REQUIRE(p.N == 16384);
  const PowerAllocation alloc = exponential_allocation(p, 2.0 * p.C);
  GaussianDesign a(p.n, p.N, 2024);

  Rng rng(55);
  const Message msg = random_message(p, rng);
  const BetaVector beta0 = message_to_beta(msg, alloc, p);
  std::vector<double> x(p.n);
  a.forward(beta0.values, x);
  const std::vector<double> y = awgn_transmit(x, {p.sigma2, 66});

  std::vector<double> s(p.N);
  a.adjoint(y, s);  // beta^0 = 0, so s^0 = A^T y
  double mean = 0.0;
  for (std::size_t j = 0; j < p.N; ++j) mean += s[j] - beta0.values[j];
  mean /= p.N;
  double var = 0.0;
  for (std::size_t j = 0; j < p.N; ++j) {
    const double d = s[j] - beta0.values[j] - mean;
    var += d * d;
  }
  var /= (p.N - 1);
  const double tau2 = p.sigma2 + p.P;
  MESSAGE("empirical variance ", var, " vs tau0^2 ", tau2);
  CHECK(std::abs(var - tau2) < 0.1 * tau2);
}

TEST_CASE("gaussian and hadamard designs perform alike" *
          doctest::timeout(600)) {
  // Two-proportion z-test on section errors at alpha = 0.01; the designs
  // should be statistically indistinguishable at matched parameters.
  SimConfig cfg;
  cfg.L = 256;
  cfg.M = 32;
  cfg.rate_frac = 0.6;
  cfg.snr = 15.0;
  cfg.alloc = AllocScheme::exponential;
  cfg.schedule = ScheduleSource::mc;
  cfg.mc_samples = 200;
  cfg.trials = 200;
  cfg.seed = 424242;

  cfg.design = DesignKind::gaussian;
  const SimReport gauss = run_trials(cfg);
  cfg.design = DesignKind::hadamard;
  const SimReport had = run_trials(cfg);

  const double n_sections = static_cast<double>(cfg.trials) * cfg.L;
  std::uint64_t e1 = 0, e2 = 0;
  for (const TrialResult& t : gauss.trials) e1 += t.section_errors;
  for (const TrialResult& t : had.trials) e2 += t.section_errors;
  const double p1 = e1 / n_sections;
  const double p2 = e2 / n_sections;
  const double pooled = (e1 + e2) / (2.0 * n_sections);
  const double se =
      std::sqrt(pooled * (1.0 - pooled) * (2.0 / n_sections));
  const double z = se > 0.0 ? (p1 - p2) / se : 0.0;
  MESSAGE("gaussian ser = ", p1, ", hadamard ser = ", p2, ", z = ", z);
  CHECK(std::abs(z) < 2.576);
}

TEST_CASE("beta error usually shrinks every iteration at moderate rates" *
          doctest::timeout(300)) {
  // meaningful in the regime where the decoder converges; tiny codes at high
  // rates plateau with wobbles instead
  SimConfig cfg;
  cfg.L = 512;
  cfg.M = 512;
  cfg.rate_frac = 0.7;
  cfg.snr = 15.0;
  cfg.alloc = AllocScheme::modified;  // a = f = R/C
  cfg.trials = 30;
  cfg.seed = 99;
  cfg.design = DesignKind::hadamard;
  cfg.mc_samples = 200;
  cfg.collect_diagnostics = true;
  const SimReport report = run_trials(cfg);

  std::size_t monotone = 0;
  for (const auto& diag : report.diagnostics) {
    bool ok = true;
    for (std::size_t t = 1; t < diag.size(); ++t)
      if (diag[t].nmse > diag[t - 1].nmse * (1.0 + 1e-9) + 1e-9) ok = false;
    if (ok) ++monotone;
  }
  const double frac =
      static_cast<double>(monotone) / report.diagnostics.size();
  // soft property: logged, expected >= 0.9 in typical runs, not asserted hard
  MESSAGE("monotone nmse fraction = ", frac);
  WARN(frac >= 0.9);
}
