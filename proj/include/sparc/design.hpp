#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace sparc {

// In-place unnormalized Walsh-Hadamard transform: v <- H_m * v for the
// Sylvester ordering (H_0 = [1], H_m = [[H, H], [H, -H]]). Applying it twice
// multiplies the input by the length. O(N log N).
void fwht_in_place(std::span<double> v);

// Abstract n x N design matrix exposed as forward (A*beta) and adjoint
// (A^T*z) products. Implementations are immutable after construction and
// safe to share across threads; scratch space is caller-owned.
class DesignOperator {
 public:
  virtual ~DesignOperator() = default;

  std::size_t rows() const { return n_; }  // n
  std::size_t cols() const { return N_; }  // N

  void forward(std::span<const double> beta, std::span<double> y) const;
  void forward(std::span<const double> beta, std::span<double> y,
               std::vector<double>& scratch) const;
  void adjoint(std::span<const double> z, std::span<double> out) const;
  void adjoint(std::span<const double> z, std::span<double> out,
               std::vector<double>& scratch) const;

  // Single matrix entry, for oracles and spot checks.
  virtual double entry(std::size_t i, std::size_t j) const = 0;

 protected:
  DesignOperator(std::size_t n, std::size_t N);

 private:
  virtual void do_forward(std::span<const double> beta, std::span<double> y,
                          std::vector<double>& scratch) const = 0;
  virtual void do_adjoint(std::span<const double> z, std::span<double> out,
                          std::vector<double>& scratch) const = 0;

  std::size_t n_;
  std::size_t N_;
};

// Dense matrix with i.i.d. N(0, 1/n) entries, reproducible from the seed.
// Stores all n*N entries; memory is the bottleneck for large codes.
class GaussianDesign final : public DesignOperator {
 public:
  GaussianDesign(std::size_t n, std::size_t N, std::uint64_t seed);

  double entry(std::size_t i, std::size_t j) const override;
  std::uint64_t seed() const { return seed_; }

 private:
  void do_forward(std::span<const double> beta, std::span<double> y,
                  std::vector<double>& scratch) const override;
  void do_adjoint(std::span<const double> z, std::span<double> out,
                  std::vector<double>& scratch) const override;

  std::vector<double> a_;  // row-major n x N
  std::uint64_t seed_;
};

// n rows sampled without replacement from the N x N Sylvester-Hadamard
// matrix (excluding the all-ones row 0), scaled by 1/sqrt(n) so every column
// has unit norm. Products run through the fast transform: O(N log N) time,
// O(N) memory, nothing stored but the row indices.
class HadamardDesign final : public DesignOperator {
 public:
  HadamardDesign(std::size_t n, std::size_t N, std::uint64_t seed);

  double entry(std::size_t i, std::size_t j) const override;
  const std::vector<std::uint32_t>& row_indices() const { return rows_; }
  std::uint64_t seed() const { return seed_; }

 private:
  void do_forward(std::span<const double> beta, std::span<double> y,
                  std::vector<double>& scratch) const override;
  void do_adjoint(std::span<const double> z, std::span<double> out,
                  std::vector<double>& scratch) const override;

  std::vector<std::uint32_t> rows_;  // sorted, distinct, in {1, ..., N-1}
  double inv_sqrt_n_;
  std::uint64_t seed_;
};

enum class DesignKind { gaussian, hadamard };

std::string_view to_string(DesignKind kind);
DesignKind parse_design_kind(std::string_view name);

std::unique_ptr<DesignOperator> make_design(DesignKind kind, std::size_t n,
                                            std::size_t N, std::uint64_t seed);

}  // namespace sparc
