#include <cmath>
#include <string>

#include "qdl/errors.hpp"
#include "qdl/machinery.hpp"

namespace qdl {

namespace {

struct Expander {
  ExpansionKind kind;
  double alpha;
  std::span<const std::uint64_t> primes;
  int ell;
  std::size_t max_support;
  SparseSeries out;
  std::size_t visited = 0;

  void visit(std::size_t start, std::uint64_t n, int omega, const SeriesCoefficient& w) {
    if (++visited > max_support) {
      throw ResourceError("Dirichlet expansion support exceeds budget of " +
                          std::to_string(max_support) + " terms");
    }
    if (kind == ExpansionKind::B || omega == ell) {
      SeriesCoefficient a = 1;
      if (kind == ExpansionKind::B) a = boost::multiprecision::pow(SeriesCoefficient(alpha), omega);
      out.emplace(n, a / (w * boost::multiprecision::sqrt(SeriesCoefficient(n))));
    }
    if (omega == ell) return;
    for (std::size_t i = start; i < primes.size(); ++i) {
      const std::uint64_t p = primes[i];
      std::uint64_t m = n;
      SeriesCoefficient fact = 1;
      for (int e = 1; omega + e <= ell; ++e) {
        if (__builtin_mul_overflow(m, p, &m)) {
          throw ResourceError("Dirichlet expansion index overflows 64 bits");
        }
        fact *= e;
        visit(i + 1, m, omega + e, w * fact);
      }
    }
  }
};

}  // namespace

SparseSeries dirichlet_expansion(ExpansionKind kind, double alpha,
                                 std::span<const std::uint64_t> primes, int ell,
                                 std::size_t max_support) {
  if (ell < 0 || ell % 2 != 0) throw DomainError("expansion degree must be even and >= 0");
  Expander ex{kind, alpha, primes, ell, max_support, {}, 0};
  ex.visit(0, 1, 0, SeriesCoefficient(1));
  return std::move(ex.out);
}

SparseSeries dirichlet_expansion(ExpansionKind kind, const MomentParameters& mp,
                                 const ResolvedBlocks& rb, std::size_t j, std::size_t max_support) {
  if (j >= rb.R()) throw DomainError("block index out of range");
  return dirichlet_expansion(kind, mp.alpha_B(), rb.primes[j], rb.ells[j], max_support);
}

double evaluate_series(const SparseSeries& series, FamilyIndex d) {
  SeriesCoefficient sum = 0;
  for (const auto& [n, c] : series) {
    const int x = chi(d, n);
    if (x > 0) sum += c;
    else if (x < 0) sum -= c;
  }
  return sum.convert_to<double>();
}

}  // namespace qdl
