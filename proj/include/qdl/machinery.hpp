#pragma once

// Truncated exponentials, prime blocks and the mollifier-style pointwise bounds.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gmpxx.h>

#include "qdl/arith.hpp"

namespace qdl {

// E_ell(x) = sum_{j=0}^{ell} x^j / j!, ell even (DomainError otherwise).
double truncated_exp(int ell, double x);
long double truncated_exp(int ell, long double x);
mpq_class truncated_exp(int ell, const mpq_class& x);
// Rounding bound for the long double evaluation: c * eps * sum |x|^j / j!.
long double truncated_exp_rounding(int ell, long double x);

struct MomentParameters {
  double n = 2.0;  // outer exponent
  double k = 0.5;  // interpolation parameter in [0, 1]

  static MomentParameters make(double n, double k);
  double effective() const noexcept { return n * k; }
  double alpha_A() const noexcept { return (k - 1.0) * n; }
  double alpha_B() const noexcept { return n * k; }
};

// (lower, upper] on the real line; the first block is the odd primes <= upper.
struct PrimeBlock {
  double lower = 2.0;
  double upper = 2.0;
};

struct BlockFlags {
  bool monotone_decreasing = false;
  bool square_gap = false;      // ell_j > ell_{j+1}^2 for all j < R
  bool tail_condition = false;  // ell_R > tail threshold
  friend bool operator==(const BlockFlags&, const BlockFlags&) = default;
};

enum class BlockMode { Paper, Custom };

struct BlockStructure {
  BlockMode mode = BlockMode::Custom;
  double log_X = 0.0;            // paper mode only
  double c = 100.0;              // paper mode recurrence constant
  double tail_threshold = 1e4;
  std::vector<int> generated;    // paper mode: every recurrence term, including the one that stopped it
  std::vector<int> ells;         // ell_1 .. ell_R
  std::vector<PrimeBlock> blocks;
  BlockFlags flags;
  std::string explanation;

  std::size_t R() const noexcept { return ells.size(); }
};

BlockFlags compute_block_flags(std::span<const int> ells, double tail_threshold);

// ell_1 = 2 ceil(c log log X), ell_{j+1} = 2 ceil(c log ell_j); keeps the terms above the
// threshold while the sequence decreases; b_j = X^{1/ell_j^2}.
BlockStructure ell_sequence(double X, double c = 100.0, double tail_threshold = 1e4);
// Same, for X too large for a double.
BlockStructure ell_sequence_log(double log_X, double c = 100.0, double tail_threshold = 1e4);

// boundaries[j] is the upper end of block j; block 0 holds the odd primes <= boundaries[0].
BlockStructure custom_blocks(std::vector<int> ells, std::vector<double> boundaries,
                             double tail_threshold = 1e4);

// Prime lists of every block, materialized by sieving.
struct ResolvedBlocks {
  std::vector<int> ells;
  std::vector<std::vector<std::uint64_t>> primes;

  std::size_t R() const noexcept { return ells.size(); }
};

inline constexpr std::uint64_t kDefaultBlockSieveLimit = 100'000'000;

// DomainError when a block reaches beyond sieve_limit.
ResolvedBlocks resolve_blocks(const BlockStructure& bs,
                              std::uint64_t sieve_limit = kDefaultBlockSieveLimit);

// sum_{p in block} chi_{8d}(p) / sqrt(p)
double prime_block_sum(FamilyIndex d, std::span<const std::uint64_t> primes);
std::vector<double> prime_block_sums(FamilyIndex d, const ResolvedBlocks& rb);

struct MollifierValue {
  std::vector<double> per_block;  // E_{ell_j}(alpha P_j(d))
  double product = 1.0;
};

MollifierValue mollifier(FamilyIndex d, double alpha, const ResolvedBlocks& rb);
MollifierValue mollifier_from_sums(std::span<const double> block_sums, std::span<const int> ells,
                                   double alpha);
inline MollifierValue mollifier_A(FamilyIndex d, const MomentParameters& mp, const ResolvedBlocks& rb) {
  return mollifier(d, mp.alpha_A(), rb);
}
inline MollifierValue mollifier_B(FamilyIndex d, const MomentParameters& mp, const ResolvedBlocks& rb) {
  return mollifier(d, mp.alpha_B(), rb);
}

// exp((e^{-ell_1} + ... + e^{-ell_R}) / 16)
double block_constant(std::span<const int> ells);

// Right side of the two-product bound on y^k:
//   C k y prod E((k-1)x_j) + C (1-k) prod E(k x_j)
//   + sum_r (C k y prod_{j<=r} E((k-1)x_j) + C (1-k) prod_{j<=r} E(k x_j)) (e^2 x_{r+1}/ell_{r+1})^{ell_{r+1}}
double two_product_bound(double y, double k, std::span<const double> x, std::span<const int> ells);

struct PointwiseBound {
  double lhs = 0.0;  // (|L|^n (log d)^{-n/2})^k
  double rhs = 0.0;
  bool holds(double rel_slack = 1e-9) const noexcept { return lhs <= rhs * (1.0 + rel_slack); }
};

// DomainError for d < 3 or R = 0.
PointwiseBound pointwise_rhs(FamilyIndex d, double L, const MomentParameters& mp,
                             const ResolvedBlocks& rb);
PointwiseBound pointwise_rhs_from_sums(FamilyIndex d, double L, const MomentParameters& mp,
                                       std::span<const double> block_sums, std::span<const int> ells);

struct LemmaCheck {
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  std::string witness;  // first failing input, empty if none
};

struct ELemmaReport {
  LemmaCheck positivity_and_lower;  // E > 0 and E >= e^x for x <= 0
  LemmaCheck upper;                 // e^x <= (1 + e^{-ell}/16) E(x) for x <= ell/e^2
  LemmaCheck two_product;           // full two-product bound, R <= 4
  LemmaCheck reflection;            // E(x)E(-x) >= 1, exact rationals, ell <= 20, |x| <= 10
  bool passed() const noexcept {
    return positivity_and_lower.failures + upper.failures + two_product.failures +
               reflection.failures == 0;
  }
};

ELemmaReport verify_e_lemmas(std::uint64_t trials, std::uint64_t seed);

enum class ExpansionKind { B, PPower };

// n -> coefficient; n composed of primes from one block. Quad precision because the
// series can cancel down to values far below its term sizes.
using SeriesCoefficient = boost::multiprecision::cpp_bin_float_quad;
using SparseSeries = std::map<std::uint64_t, SeriesCoefficient>;

inline constexpr std::size_t kDefaultSupportBudget = std::size_t{1} << 22;

// B:      E_ell(alpha P(d))   = sum alpha^{Omega(n)} / (w(n) sqrt n) chi(n), Omega(n) <= ell
// PPower: P(d)^ell / ell!     = sum 1 / (w(n) sqrt n) chi(n),                 Omega(n) == ell
// ResourceError if the support exceeds max_support or n overflows 64 bits.
SparseSeries dirichlet_expansion(ExpansionKind kind, double alpha,
                                 std::span<const std::uint64_t> primes, int ell,
                                 std::size_t max_support = kDefaultSupportBudget);
// Block j of rb; B uses alpha = n k.
SparseSeries dirichlet_expansion(ExpansionKind kind, const MomentParameters& mp,
                                 const ResolvedBlocks& rb, std::size_t j,
                                 std::size_t max_support = kDefaultSupportBudget);

double evaluate_series(const SparseSeries& series, FamilyIndex d);

struct HeuristicConfig {
  double z = 2.0;
  // z = X^{1/(log log X)^2}, clamped to [2, X]; X must exceed e.
  static HeuristicConfig paper(double X);
};

struct LogProxy {
  double lambda_sum = 0.0;  // sum_{n <= z} Lambda(n) chi(n) / sqrt(n)
  double p_sum = 0.0;       // sum_{p <= z} chi(p) / sqrt(p)
};

LogProxy log_proxy(FamilyIndex d, const HeuristicConfig& cfg);

}  // namespace qdl
