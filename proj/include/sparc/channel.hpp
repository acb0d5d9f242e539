#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sparc {

struct ChannelConfig {
  double sigma2 = 1.0;    // noise variance, must be > 0
  std::uint64_t seed = 0;
};

// y_i = x_i + w_i with w_i i.i.d. N(0, sigma2); deterministic given the seed.
std::vector<double> awgn_transmit(std::span<const double> x,
                                  const ChannelConfig& cfg);

}  // namespace sparc
