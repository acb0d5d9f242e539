#include "sparc/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "sparc/rng.hpp"

namespace sparc {

std::vector<double> awgn_transmit(std::span<const double> x,
                                  const ChannelConfig& cfg) {
  if (!(cfg.sigma2 > 0.0))
    throw std::invalid_argument("awgn: sigma2 must be positive");
  Rng rng(cfg.seed);
  const double sd = std::sqrt(cfg.sigma2);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + sd * rng.normal();
  return y;
}

}  // namespace sparc
