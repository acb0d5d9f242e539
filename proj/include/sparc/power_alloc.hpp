#pragma once

#include <string_view>
#include <vector>

#include "sparc/params.hpp"

namespace sparc {

enum class AllocScheme { flat, exponential, modified };

std::string_view to_string(AllocScheme scheme);
AllocScheme parse_alloc_scheme(std::string_view name);

// Per-section powers {P_l}. Invariants: sum(P_l) = P, every P_l > 0, and the
// sequence is non-increasing in l.
struct PowerAllocation {
  std::vector<double> values;
  AllocScheme scheme = AllocScheme::flat;
  double kappa = 0.0;  // exponential decay parameter
  double a = 0.0;      // modified: decay strength
  double f = 0.0;      // modified: fraction of sections in the decaying part

  double total() const;
};

// P_l = P/L for every section.
PowerAllocation flat_allocation(const SparcParams& params);

// P_l proportional to 2^(-kappa*l/L), normalized to total power P.
PowerAllocation exponential_allocation(const SparcParams& params, double kappa);

// Exponential decay 2^(-2*a*C*l/L) for sections l <= floor(f*L), then flat at
// the junction value. a = 0 gives the flat allocation; a = 1, f = 1 gives the
// exponential allocation with kappa = 2C.
PowerAllocation modified_allocation(const SparcParams& params, double a,
                                    double f);

// Checks the allocation invariants; throws std::invalid_argument on failure.
void validate_allocation(const PowerAllocation& alloc,
                         const SparcParams& params);

}  // namespace sparc
