#include "sparc/params.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "sparc/power_alloc.hpp"
#include "sparc/rng.hpp"

namespace sparc {

SparcParams derive_params(std::uint32_t L, std::uint32_t M, double R_target,
                          double snr, double P) {
  if (L < 1) throw std::invalid_argument("derive_params: L must be >= 1");
  if (M < 2) throw std::invalid_argument("derive_params: M must be >= 2");
  if (!(R_target > 0.0))
    throw std::invalid_argument("derive_params: rate must be positive");
  if (!(snr > 0.0))
    throw std::invalid_argument("derive_params: snr must be positive");
  if (!(P > 0.0))
    throw std::invalid_argument("derive_params: P must be positive");

  const double message_bits = static_cast<double>(L) * std::log2(M);
  const long long n = std::llround(message_bits / R_target);
  if (n < 1)
    throw std::invalid_argument(
        "derive_params: block length rounds to zero at this rate");

  SparcParams p;
  p.L = L;
  p.M = M;
  p.n = static_cast<std::size_t>(n);
  p.N = static_cast<std::size_t>(M) * L;
  p.R = message_bits / static_cast<double>(n);  // realized rate
  p.P = P;
  p.snr = snr;
  p.sigma2 = P / snr;
  p.C = 0.5 * std::log2(1.0 + snr);
  return p;
}

std::uint32_t bits_per_section(const SparcParams& params) {
  if (!is_power_of_two(params.M))
    throw std::invalid_argument(
        "bits_per_section: bit mapping requires M to be a power of two");
  return static_cast<std::uint32_t>(std::bit_width(std::uint64_t{params.M}) -
                                    1);
}

void validate_message(const Message& msg, const SparcParams& params) {
  if (msg.sections.size() != params.L)
    throw std::invalid_argument("message: wrong number of sections");
  for (std::uint32_t s : msg.sections)
    if (s >= params.M)
      throw std::invalid_argument("message: section index out of range");
}

Message bits_to_message(std::span<const std::uint8_t> bits,
                        const SparcParams& params) {
  const std::uint32_t b = bits_per_section(params);
  if (bits.size() != static_cast<std::size_t>(b) * params.L)
    throw std::invalid_argument("bits_to_message: wrong bit count");
  Message msg;
  msg.sections.resize(params.L);
  for (std::uint32_t l = 0; l < params.L; ++l) {
    std::uint32_t v = 0;
    for (std::uint32_t k = 0; k < b; ++k) {
      const std::uint8_t bit = bits[static_cast<std::size_t>(l) * b + k];
      if (bit > 1)
        throw std::invalid_argument("bits_to_message: bits must be 0 or 1");
      v = (v << 1) | bit;
    }
    msg.sections[l] = v;
  }
  return msg;
}

std::vector<std::uint8_t> message_to_bits(const Message& msg,
                                          const SparcParams& params) {
  validate_message(msg, params);
  const std::uint32_t b = bits_per_section(params);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(b) * params.L);
  for (std::uint32_t l = 0; l < params.L; ++l)
    for (std::uint32_t k = 0; k < b; ++k)
      bits[static_cast<std::size_t>(l) * b + k] =
          static_cast<std::uint8_t>((msg.sections[l] >> (b - 1 - k)) & 1u);
  return bits;
}

Message random_message(const SparcParams& params, Rng& rng) {
  Message msg;
  msg.sections.resize(params.L);
  for (std::uint32_t l = 0; l < params.L; ++l)
    msg.sections[l] = static_cast<std::uint32_t>(rng.uniform_below(params.M));
  return msg;
}

BetaVector message_to_beta(const Message& msg, const PowerAllocation& alloc,
                           const SparcParams& params) {
  validate_message(msg, params);
  if (alloc.values.size() != params.L)
    throw std::invalid_argument("message_to_beta: allocation length mismatch");
  BetaVector beta;
  beta.values.assign(params.N, 0.0);
  for (std::uint32_t l = 0; l < params.L; ++l) {
    const std::size_t idx =
        static_cast<std::size_t>(l) * params.M + msg.sections[l];
    beta.values[idx] = std::sqrt(static_cast<double>(params.n) *
                                 alloc.values[l]);
  }
  return beta;
}

std::pair<BetaVector, Message> hard_decision(std::span<const double> beta_t,
                                             const PowerAllocation& alloc,
                                             const SparcParams& params) {
  if (beta_t.size() != params.N)
    throw std::invalid_argument("hard_decision: input length mismatch");
  if (alloc.values.size() != params.L)
    throw std::invalid_argument("hard_decision: allocation length mismatch");
  BetaVector beta;
  beta.values.assign(params.N, 0.0);
  Message msg;
  msg.sections.resize(params.L);
  for (std::uint32_t l = 0; l < params.L; ++l) {
    const std::size_t base = static_cast<std::size_t>(l) * params.M;
    std::uint32_t best = 0;
    double best_val = beta_t[base];
    for (std::uint32_t j = 1; j < params.M; ++j) {
      if (beta_t[base + j] > best_val) {  // ties keep the lowest index
        best_val = beta_t[base + j];
        best = j;
      }
    }
    msg.sections[l] = best;
    beta.values[base + best] =
        std::sqrt(static_cast<double>(params.n) * alloc.values[l]);
  }
  return {std::move(beta), std::move(msg)};
}

double section_error_rate(const Message& sent, const Message& decoded) {
  if (sent.sections.size() != decoded.sections.size())
    throw std::invalid_argument("section_error_rate: length mismatch");
  if (sent.sections.empty()) return 0.0;
  std::size_t errors = 0;
  for (std::size_t l = 0; l < sent.sections.size(); ++l)
    if (sent.sections[l] != decoded.sections[l]) ++errors;
  return static_cast<double>(errors) /
         static_cast<double>(sent.sections.size());
}

std::uint64_t bit_error_count(const Message& sent, const Message& decoded) {
  if (sent.sections.size() != decoded.sections.size())
    throw std::invalid_argument("bit_error_count: length mismatch");
  std::uint64_t errors = 0;
  for (std::size_t l = 0; l < sent.sections.size(); ++l)
    errors += std::popcount(sent.sections[l] ^ decoded.sections[l]);
  return errors;
}

}  // namespace sparc
