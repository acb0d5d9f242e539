#include "sparc/power_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sparc {

std::string_view to_string(AllocScheme scheme) {
  switch (scheme) {
    case AllocScheme::flat: return "flat";
    case AllocScheme::exponential: return "exp";
    case AllocScheme::modified: return "mod";
  }
  return "?";
}

AllocScheme parse_alloc_scheme(std::string_view name) {
  if (name == "flat") return AllocScheme::flat;
  if (name == "exp" || name == "exponential") return AllocScheme::exponential;
  if (name == "mod" || name == "modified") return AllocScheme::modified;
  throw std::invalid_argument("unknown allocation scheme: " +
                              std::string(name));
}

double PowerAllocation::total() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

namespace {

// Scales the raw profile so the section powers sum to P exactly (up to
// rounding in the final multiply).
void normalize_to(std::vector<double>& values, double P) {
  const double sum = std::accumulate(values.begin(), values.end(), 0.0);
  const double scale = P / sum;
  for (double& v : values) v *= scale;
}

}  // namespace

PowerAllocation flat_allocation(const SparcParams& params) {
  PowerAllocation alloc;
  alloc.scheme = AllocScheme::flat;
  alloc.values.assign(params.L, params.P / static_cast<double>(params.L));
  return alloc;
}

PowerAllocation exponential_allocation(const SparcParams& params,
                                       double kappa) {
  if (!(kappa > 0.0))
    throw std::invalid_argument(
        "exponential_allocation: kappa must be positive");
  PowerAllocation alloc;
  alloc.scheme = AllocScheme::exponential;
  alloc.kappa = kappa;
  alloc.values.resize(params.L);
  const double L = static_cast<double>(params.L);
  for (std::uint32_t l = 0; l < params.L; ++l)
    alloc.values[l] = std::exp2(-kappa * static_cast<double>(l + 1) / L);
  normalize_to(alloc.values, params.P);
  return alloc;
}

PowerAllocation modified_allocation(const SparcParams& params, double a,
                                    double f) {
  if (!(a >= 0.0))
    throw std::invalid_argument("modified_allocation: a must be >= 0");
  if (!(f >= 0.0 && f <= 1.0))
    throw std::invalid_argument("modified_allocation: f must be in [0, 1]");

  PowerAllocation alloc;
  alloc.scheme = AllocScheme::modified;
  alloc.a = a;
  alloc.f = f;

  if (a == 0.0) {  // exponent collapses; every section gets P/L
    alloc.values.assign(params.L, params.P / static_cast<double>(params.L));
    return alloc;
  }

  const double L = static_cast<double>(params.L);
  // Junction index: sections 1..k decay, k+1..L stay at the section-k value.
  // The flat value reuses the exact junction exponent so the allocation is
  // continuous to the last bit.
  const std::uint32_t k = static_cast<std::uint32_t>(std::min(
      L, std::floor(f * L + 1e-9)));
  const double rate_exp = 2.0 * a * params.C / L;
  const double flat_value = std::exp2(-rate_exp * static_cast<double>(k));

  alloc.values.resize(params.L);
  for (std::uint32_t l = 0; l < params.L; ++l)
    alloc.values[l] = (l + 1 <= k)
                          ? std::exp2(-rate_exp * static_cast<double>(l + 1))
                          : flat_value;
  normalize_to(alloc.values, params.P);
  return alloc;
}

void validate_allocation(const PowerAllocation& alloc,
                         const SparcParams& params) {
  if (alloc.values.size() != params.L)
    throw std::invalid_argument("allocation: length != L");
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (double v : alloc.values) {
    if (!(v > 0.0))
      throw std::invalid_argument("allocation: non-positive section power");
    if (v > prev * (1.0 + 1e-12))
      throw std::invalid_argument("allocation: not non-increasing");
    prev = v;
    sum += v;
  }
  if (std::abs(sum - params.P) > 1e-9 * params.P)
    throw std::invalid_argument("allocation: total power != P");
}

}  // namespace sparc
