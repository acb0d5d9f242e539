#include "sparc/design.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "sparc/params.hpp"
#include "sparc/rng.hpp"

namespace sparc {

void fwht_in_place(std::span<double> v) {
  const std::size_t n = v.size();
  if (!is_power_of_two(n))
    throw std::invalid_argument("fwht: length must be a power of two");
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = v[j];
        const double y = v[j + h];
        v[j] = x + y;
        v[j + h] = x - y;
      }
    }
  }
}

DesignOperator::DesignOperator(std::size_t n, std::size_t N) : n_(n), N_(N) {
  if (n == 0 || N == 0)
    throw std::invalid_argument("design: dimensions must be positive");
}

void DesignOperator::forward(std::span<const double> beta,
                             std::span<double> y) const {
  std::vector<double> scratch;
  forward(beta, y, scratch);
}

void DesignOperator::forward(std::span<const double> beta, std::span<double> y,
                             std::vector<double>& scratch) const {
  if (beta.size() != N_ || y.size() != n_)
    throw std::invalid_argument("design forward: dimension mismatch");
  do_forward(beta, y, scratch);
}

void DesignOperator::adjoint(std::span<const double> z,
                             std::span<double> out) const {
  std::vector<double> scratch;
  adjoint(z, out, scratch);
}

void DesignOperator::adjoint(std::span<const double> z, std::span<double> out,
                             std::vector<double>& scratch) const {
  if (z.size() != n_ || out.size() != N_)
    throw std::invalid_argument("design adjoint: dimension mismatch");
  do_adjoint(z, out, scratch);
}

GaussianDesign::GaussianDesign(std::size_t n, std::size_t N,
                               std::uint64_t seed)
    : DesignOperator(n, N), seed_(seed) {
  // 2^28 doubles = 2 GiB; beyond that the dense matrix is not a sane choice.
  if (n > (std::size_t{1} << 28) / N)
    throw std::invalid_argument(
        "gaussian design too large to store densely; use the hadamard "
        "design");
  a_.resize(n * N);
  Rng rng(seed);
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  for (double& e : a_) e = sd * rng.normal();
}

double GaussianDesign::entry(std::size_t i, std::size_t j) const {
  return a_[i * cols() + j];
}

void GaussianDesign::do_forward(std::span<const double> beta,
                                std::span<double> y,
                                std::vector<double>&) const {
  const std::size_t N = cols();
  const double* row = a_.data();
  for (std::size_t i = 0; i < rows(); ++i, row += N) {
    double acc = 0.0;
    for (std::size_t j = 0; j < N; ++j) acc += row[j] * beta[j];
    y[i] = acc;
  }
}

void GaussianDesign::do_adjoint(std::span<const double> z,
                                std::span<double> out,
                                std::vector<double>&) const {
  const std::size_t N = cols();
  std::fill(out.begin(), out.end(), 0.0);
  const double* row = a_.data();
  for (std::size_t i = 0; i < rows(); ++i, row += N) {
    const double zi = z[i];
    for (std::size_t j = 0; j < N; ++j) out[j] += zi * row[j];
  }
}

HadamardDesign::HadamardDesign(std::size_t n, std::size_t N,
                               std::uint64_t seed)
    : DesignOperator(n, N), seed_(seed) {
  if (!is_power_of_two(N))
    throw std::invalid_argument(
        "hadamard design: N = M*L must be a power of two");
  if (n > N - 1)
    throw std::invalid_argument(
        "hadamard design: need n <= N-1 rows (row 0 is excluded)");
  inv_sqrt_n_ = 1.0 / std::sqrt(static_cast<double>(n));

  // Floyd's sampling of n distinct rows from {1, ..., N-1}.
  Rng rng(seed);
  std::unordered_set<std::uint32_t> chosen;
  chosen.reserve(n * 2);
  for (std::uint64_t j = N - n; j <= N - 1; ++j) {
    const std::uint32_t t =
        static_cast<std::uint32_t>(1 + rng.uniform_below(j));
    if (!chosen.insert(t).second) chosen.insert(static_cast<std::uint32_t>(j));
  }
  rows_.assign(chosen.begin(), chosen.end());
  std::sort(rows_.begin(), rows_.end());
}

double HadamardDesign::entry(std::size_t i, std::size_t j) const {
  const std::uint32_t bits = rows_[i] & static_cast<std::uint32_t>(j);
  return (std::popcount(bits) & 1) ? -inv_sqrt_n_ : inv_sqrt_n_;
}

void HadamardDesign::do_forward(std::span<const double> beta,
                                std::span<double> y,
                                std::vector<double>& scratch) const {
  scratch.assign(beta.begin(), beta.end());
  fwht_in_place(scratch);
  for (std::size_t k = 0; k < rows(); ++k)
    y[k] = scratch[rows_[k]] * inv_sqrt_n_;
}

void HadamardDesign::do_adjoint(std::span<const double> z,
                                std::span<double> out,
                                std::vector<double>&) const {
  // Embed z at the sampled row positions, transform, scale; H is symmetric.
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < rows(); ++k) out[rows_[k]] = z[k];
  fwht_in_place(out);
  for (double& e : out) e *= inv_sqrt_n_;
}

std::string_view to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::gaussian: return "gaussian";
    case DesignKind::hadamard: return "hadamard";
  }
  return "?";
}

DesignKind parse_design_kind(std::string_view name) {
  if (name == "gaussian") return DesignKind::gaussian;
  if (name == "hadamard") return DesignKind::hadamard;
  throw std::invalid_argument("unknown design kind: " + std::string(name));
}

std::unique_ptr<DesignOperator> make_design(DesignKind kind, std::size_t n,
                                            std::size_t N,
                                            std::uint64_t seed) {
  switch (kind) {
    case DesignKind::gaussian:
      return std::make_unique<GaussianDesign>(n, N, seed);
    case DesignKind::hadamard:
      return std::make_unique<HadamardDesign>(n, N, seed);
  }
  throw std::invalid_argument("unknown design kind");
}

}  // namespace sparc
