#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sparc {

struct PowerAllocation;
class Rng;

// Code geometry and channel parameters; the single source of truth for the
// relations N = M*L, R = L*log2(M)/n, snr = P/sigma2, C = log2(1+snr)/2.
struct SparcParams {
  std::uint32_t L = 0;  // number of sections
  std::uint32_t M = 0;  // columns per section
  std::size_t n = 0;    // block length (channel uses)
  std::size_t N = 0;    // M*L, total columns
  double R = 0.0;       // realized rate, bits per channel use
  double P = 0.0;       // average input power
  double sigma2 = 0.0;  // noise variance
  double snr = 0.0;     // P / sigma2
  double C = 0.0;       // 0.5*log2(1+snr), bits per channel use
};

// Picks the block length n = round(L*log2(M)/R_target) and stores the rate
// actually realized by that integer n. Throws std::invalid_argument on
// non-positive inputs or when n rounds to zero.
SparcParams derive_params(std::uint32_t L, std::uint32_t M, double R_target,
                          double snr, double P);

// One column index per section, each in [0, M).
struct Message {
  std::vector<std::uint32_t> sections;
};

// Dense length-N coefficient vector. Codebook members have exactly one
// nonzero per section, equal to sqrt(n*P_l).
struct BetaVector {
  std::vector<double> values;
};

constexpr bool is_power_of_two(std::uint64_t v) {
  return v != 0 && (v & (v - 1)) == 0;
}

// log2(M); defined only when M is a power of two.
std::uint32_t bits_per_section(const SparcParams& params);

void validate_message(const Message& msg, const SparcParams& params);

// Segment-wise binary mapping, most-significant bit first. Requires M to be
// a power of two; use the Message-level API otherwise.
Message bits_to_message(std::span<const std::uint8_t> bits,
                        const SparcParams& params);
std::vector<std::uint8_t> message_to_bits(const Message& msg,
                                          const SparcParams& params);

Message random_message(const SparcParams& params, Rng& rng);

BetaVector message_to_beta(const Message& msg, const PowerAllocation& alloc,
                           const SparcParams& params);

// Per section, keeps the largest entry (ties: lowest index), sets it to
// sqrt(n*P_l) and zeroes the rest.
std::pair<BetaVector, Message> hard_decision(std::span<const double> beta_t,
                                             const PowerAllocation& alloc,
                                             const SparcParams& params);

// Fraction of sections whose decoded index differs from the sent one.
double section_error_rate(const Message& sent, const Message& decoded);

// Differing bits between the binary representations of matching sections.
std::uint64_t bit_error_count(const Message& sent, const Message& decoded);

}  // namespace sparc
