#pragma once

// Integer kernel: Kronecker symbols, sieves, multiplicative functions,
// Mertens sums and the Euler product constant of the twisted second moment.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace qdl {

// Odd square-free d; the family member with character chi_{8d} = (8d / .).
class FamilyIndex {
 public:
  constexpr FamilyIndex() noexcept : d_(1) {}
  // Throws DomainError unless d is positive, odd and square-free.
  static FamilyIndex make(std::uint64_t d);
  // No validation; for callers that produced d from the family sieve.
  static constexpr FamilyIndex trusted(std::uint64_t d) noexcept { return FamilyIndex(d); }

  constexpr std::uint64_t d() const noexcept { return d_; }
  constexpr std::uint64_t modulus() const noexcept { return 8 * d_; }

  friend constexpr bool operator==(FamilyIndex a, FamilyIndex b) noexcept { return a.d_ == b.d_; }
  friend constexpr auto operator<=>(FamilyIndex a, FamilyIndex b) noexcept { return a.d_ <=> b.d_; }

 private:
  constexpr explicit FamilyIndex(std::uint64_t d) noexcept : d_(d) {}
  std::uint64_t d_;
};

// Jacobi symbol (a/n) for odd n >= 1.
int jacobi(std::uint64_t a, std::uint64_t n) noexcept;

// Kronecker symbol (m/n). Throws DomainError when m = n = 0.
int kronecker(std::int64_t m, std::int64_t n);

// chi_{8d}(n) for n >= 1.
inline int chi(FamilyIndex d, std::uint64_t n) noexcept {
  if ((n & 1U) == 0) return 0;
  return jacobi((8 * d.d()) % n, n);
}

bool is_squarefree(std::uint64_t n) noexcept;

// Default budget for sieve bit arrays (bytes).
inline constexpr std::size_t kDefaultSieveBudget = std::size_t{1} << 30;

// All odd square-free d in [1, limit], ascending.
std::vector<FamilyIndex> sieve_family(std::uint64_t limit,
                                      std::size_t memory_budget = kDefaultSieveBudget);
// All odd square-free d in [lo, hi], ascending.
std::vector<FamilyIndex> sieve_family_range(std::uint64_t lo, std::uint64_t hi,
                                            std::size_t memory_budget = kDefaultSieveBudget);
std::uint64_t count_family(std::uint64_t lo, std::uint64_t hi);

std::vector<std::uint64_t> sieve_primes(std::uint64_t limit,
                                        std::size_t memory_budget = kDefaultSieveBudget);
// Segmented sieve; calls fn(p) for every prime p <= limit in ascending order.
void for_each_prime(std::uint64_t limit, const std::function<void(std::uint64_t)>& fn);

using Factorization = std::vector<std::pair<std::uint64_t, int>>;  // (p, exponent), ascending p

Factorization factorize(std::uint64_t n);

// Smallest-prime-factor table; immutable after construction.
class SpfTable {
 public:
  explicit SpfTable(std::uint32_t limit);
  std::uint32_t limit() const noexcept { return limit_; }
  std::uint32_t spf(std::uint32_t n) const noexcept { return spf_[n]; }
  bool is_prime(std::uint32_t n) const noexcept { return n >= 2 && spf_[n] == n; }
  // Falls back to trial division above limit().
  Factorization factorize(std::uint64_t n) const;

 private:
  std::uint32_t limit_;
  std::vector<std::uint32_t> spf_;
};

struct MultiplicativeProfile {
  std::uint64_t n = 1;
  int omega_big = 0;           // prime factors counted with multiplicity
  int omega_distinct = 0;
  std::uint64_t w = 1;         // prod alpha! over p^alpha || n
  std::uint64_t tau = 1;       // divisor count
  std::uint64_t sigma = 1;     // divisor sum
  mpq_class h = 1;             // h(p^k) = 1 + 1/p + 1/p^2 - 4/(p(p+1))
  std::uint64_t squarefree_part = 1;
  std::uint64_t square_root_part = 1;  // n = squarefree_part * square_root_part^2
};

MultiplicativeProfile multiplicative_profile(std::uint64_t n);
MultiplicativeProfile multiplicative_profile(std::uint64_t n, const SpfTable& table);

// h at a prime (any positive power), exact.
mpq_class h_prime(std::uint64_t p);

// Coefficient of n^{-s} in (-1)^j zeta^{(j)}(s) / zeta(s), 0 <= j <= 3.
double lambda_j(std::uint64_t n, int j);
inline double von_mangoldt(std::uint64_t n) { return lambda_j(n, 1); }

// sum_{p <= x} (log p)^j / p, compensated.
double mertens_sum(double x, int j);

struct EulerConstant {
  double value = 0.0;
  double tail_bound = 0.0;  // true constant lies in [value - tail_bound, value]
};

// (1/8) prod_{3 <= p <= p_limit} (1 - 1/p) h(p), with a rigorous truncation bound.
EulerConstant constant_D(std::uint64_t p_limit);

}  // namespace qdl
