#include "qdl/machinery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qdl/errors.hpp"
#include "qdl/summation.hpp"

namespace qdl {

namespace {

void require_even(int ell) {
  if (ell < 0 || ell % 2 != 0) {
    throw DomainError("truncated exponential needs a non-negative even degree, got " +
                      std::to_string(ell));
  }
}

double int_pow(double base, int e) {
  double r = 1.0;
  for (;;) {
    if (e & 1) r *= base;
    e >>= 1;
    if (e == 0) return r;
    base *= base;
  }
}

}  // namespace

double truncated_exp(int ell, double x) {
  require_even(ell);
  double r = 1.0;
  for (int j = ell; j >= 1; --j) r = 1.0 + r * x / j;
  return r;
}

long double truncated_exp(int ell, long double x) {
  require_even(ell);
  long double r = 1.0L;
  for (int j = ell; j >= 1; --j) r = 1.0L + r * x / j;
  return r;
}

mpq_class truncated_exp(int ell, const mpq_class& x) {
  require_even(ell);
  mpq_class r = 1;
  for (int j = ell; j >= 1; --j) {
    r = 1 + r * x / j;
  }
  r.canonicalize();
  return r;
}

long double truncated_exp_rounding(int ell, long double x) {
  require_even(ell);
  const long double ax = std::fabs(x);
  long double term = 1.0L, mass = 1.0L;
  for (int j = 1; j <= ell; ++j) {
    term *= ax / j;
    mass += term;
  }
  return 4.0L * (ell + 1) * std::numeric_limits<long double>::epsilon() * mass;
}

MomentParameters MomentParameters::make(double n, double k) {
  if (!(n > 0.0)) throw DomainError("moment parameter n must be positive");
  if (!(k >= 0.0 && k <= 1.0)) throw DomainError("moment parameter k must lie in [0, 1]");
  return MomentParameters{n, k};
}

// ---------------------------------------------------------------------------
// Blocks

BlockFlags compute_block_flags(std::span<const int> ells, double tail_threshold) {
  BlockFlags f;
  if (ells.empty()) return f;
  f.monotone_decreasing = true;
  f.square_gap = true;
  for (std::size_t j = 0; j + 1 < ells.size(); ++j) {
    if (!(ells[j] > ells[j + 1])) f.monotone_decreasing = false;
    const auto next = static_cast<long long>(ells[j + 1]);
    if (!(static_cast<long long>(ells[j]) > next * next)) f.square_gap = false;
  }
  f.tail_condition = static_cast<double>(ells.back()) > tail_threshold;
  return f;
}

namespace {

std::string describe_flags(const BlockStructure& bs) {
  std::ostringstream os;
  if (bs.R() == 0) {
    os << "R = 0: no recurrence term exceeds the tail threshold " << bs.tail_threshold;
    return os.str();
  }
  if (!bs.flags.monotone_decreasing) os << "ells not strictly decreasing; ";
  if (!bs.flags.square_gap) os << "ell_j > ell_{j+1}^2 fails; ";
  if (!bs.flags.tail_condition) os << "ell_R does not exceed the tail threshold; ";
  std::string s = os.str();
  if (s.empty()) return "all size conditions hold";
  s.resize(s.size() - 2);
  return s;
}

}  // namespace

BlockStructure ell_sequence_log(double log_X, double c, double tail_threshold) {
  if (!(log_X >= std::log(16.0))) throw DomainError("ell_sequence requires X >= 16");
  if (!(c > 0.0)) throw DomainError("ell_sequence requires c > 0");
  BlockStructure bs;
  bs.mode = BlockMode::Paper;
  bs.log_X = log_X;
  bs.c = c;
  bs.tail_threshold = tail_threshold;
  auto even_ceil = [&](double v) { return 2 * static_cast<int>(std::ceil(c * v)); };
  bs.generated.push_back(even_ceil(std::log(log_X)));
  while (static_cast<double>(bs.generated.back()) > tail_threshold) {
    const int next = even_ceil(std::log(static_cast<double>(bs.generated.back())));
    bs.generated.push_back(next);
    if (next >= bs.generated[bs.generated.size() - 2]) break;  // fixed point above threshold
  }
  for (int ell : bs.generated) {
    if (static_cast<double>(ell) <= tail_threshold) break;
    if (!bs.ells.empty() && ell >= bs.ells.back()) break;
    bs.ells.push_back(ell);
  }
  double lower = 2.0;
  for (int ell : bs.ells) {
    const double e = static_cast<double>(ell);
    const double upper = std::exp(log_X / (e * e));
    bs.blocks.push_back({lower, upper});
    lower = upper;
  }
  bs.flags = compute_block_flags(bs.ells, tail_threshold);
  bs.explanation = describe_flags(bs);
  return bs;
}

BlockStructure ell_sequence(double X, double c, double tail_threshold) {
  if (!(X >= 16.0)) throw DomainError("ell_sequence requires X >= 16");
  return ell_sequence_log(std::log(X), c, tail_threshold);
}

BlockStructure custom_blocks(std::vector<int> ells, std::vector<double> boundaries,
                             double tail_threshold) {
  if (ells.size() != boundaries.size()) {
    throw DomainError("custom blocks need one boundary per ell");
  }
  for (int ell : ells) {
    if (ell < 2 || ell % 2 != 0) {
      throw DomainError("custom block degree must be even and >= 2, got " + std::to_string(ell));
    }
  }
  double lower = 2.0;
  BlockStructure bs;
  bs.mode = BlockMode::Custom;
  bs.tail_threshold = tail_threshold;
  for (double b : boundaries) {
    if (!(b > lower)) throw DomainError("custom block boundaries must be ascending and > 2");
    bs.blocks.push_back({lower, b});
    lower = b;
  }
  bs.ells = std::move(ells);
  bs.flags = compute_block_flags(bs.ells, tail_threshold);
  bs.explanation = describe_flags(bs);
  return bs;
}

ResolvedBlocks resolve_blocks(const BlockStructure& bs, std::uint64_t sieve_limit) {
  ResolvedBlocks rb;
  rb.ells = bs.ells;
  rb.primes.resize(bs.R());
  if (bs.R() == 0) return rb;
  const double top = bs.blocks.back().upper;
  if (!(top <= static_cast<double>(sieve_limit))) {
    throw DomainError("prime block reaches beyond the sieved range " + std::to_string(sieve_limit));
  }
  std::size_t j = 0;
  for_each_prime(static_cast<std::uint64_t>(std::floor(top)), [&](std::uint64_t p) {
    if (p == 2) return;
    const double pd = static_cast<double>(p);
    while (j < bs.R() && pd > bs.blocks[j].upper) ++j;
    if (j < bs.R() && pd > bs.blocks[j].lower) rb.primes[j].push_back(p);
  });
  return rb;
}

double prime_block_sum(FamilyIndex d, std::span<const std::uint64_t> primes) {
  CompensatedSum s;
  for (std::uint64_t p : primes) {
    const int c = chi(d, p);
    if (c != 0) s.add(c / std::sqrt(static_cast<double>(p)));
  }
  return s.value();
}

std::vector<double> prime_block_sums(FamilyIndex d, const ResolvedBlocks& rb) {
  std::vector<double> out(rb.R());
  for (std::size_t j = 0; j < rb.R(); ++j) out[j] = prime_block_sum(d, rb.primes[j]);
  return out;
}

MollifierValue mollifier_from_sums(std::span<const double> block_sums, std::span<const int> ells,
                                   double alpha) {
  MollifierValue m;
  m.per_block.resize(ells.size());
  for (std::size_t j = 0; j < ells.size(); ++j) {
    m.per_block[j] = truncated_exp(ells[j], alpha * block_sums[j]);
    m.product *= m.per_block[j];
  }
  return m;
}

MollifierValue mollifier(FamilyIndex d, double alpha, const ResolvedBlocks& rb) {
  const std::vector<double> sums = prime_block_sums(d, rb);
  return mollifier_from_sums(sums, rb.ells, alpha);
}

double block_constant(std::span<const int> ells) {
  double s = 0.0;
  for (int ell : ells) s += std::exp(-static_cast<double>(ell));
  return std::exp(s / 16.0);
}

double two_product_bound(double y, double k, std::span<const double> x, std::span<const int> ells) {
  const double C = block_constant(ells);
  const double e2 = std::exp(2.0);
  double prod_a = 1.0;  // prod_{j < r} E((k-1) x_j)
  double prod_b = 1.0;  // prod_{j < r} E(k x_j)
  double corrections = 0.0;
  for (std::size_t r = 0; r < ells.size(); ++r) {
    const double lead = C * k * y * prod_a + C * (1.0 - k) * prod_b;
    corrections += lead * int_pow(e2 * x[r] / ells[r], ells[r]);
    prod_a *= truncated_exp(ells[r], (k - 1.0) * x[r]);
    prod_b *= truncated_exp(ells[r], k * x[r]);
  }
  return C * k * y * prod_a + C * (1.0 - k) * prod_b + corrections;
}

PointwiseBound pointwise_rhs_from_sums(FamilyIndex d, double L, const MomentParameters& mp,
                                       std::span<const double> block_sums, std::span<const int> ells) {
  if (d.d() < 3) throw DomainError("pointwise bound needs d >= 3 (log d normalisation)");
  if (ells.empty()) throw DomainError("pointwise bound needs at least one block");
  const double logd = std::log(static_cast<double>(d.d()));
  const double y = std::pow(std::fabs(L), mp.n) * std::pow(logd, -mp.n / 2.0);
  std::vector<double> x(block_sums.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = mp.n * block_sums[j];
  PointwiseBound out;
  out.lhs = std::pow(y, mp.k);
  out.rhs = two_product_bound(y, mp.k, x, ells);
  return out;
}

PointwiseBound pointwise_rhs(FamilyIndex d, double L, const MomentParameters& mp,
                             const ResolvedBlocks& rb) {
  if (d.d() < 3) throw DomainError("pointwise bound needs d >= 3 (log d normalisation)");
  const std::vector<double> sums = prime_block_sums(d, rb);
  return pointwise_rhs_from_sums(d, L, mp, sums, rb.ells);
}

// ---------------------------------------------------------------------------
// Heuristic proxy

HeuristicConfig HeuristicConfig::paper(double X) {
  if (!(X > std::numbers::e)) throw DomainError("heuristic cutoff needs X > e");
  const double ll = std::log(std::log(X));
  double z = std::exp(std::log(X) / (ll * ll));
  z = std::clamp(z, 2.0, X);
  return HeuristicConfig{z};
}

LogProxy log_proxy(FamilyIndex d, const HeuristicConfig& cfg) {
  LogProxy out;
  if (cfg.z < 2.0) return out;
  CompensatedSum lambda, psum;
  const auto z = static_cast<std::uint64_t>(std::floor(cfg.z));
  for_each_prime(z, [&](std::uint64_t p) {
    const int c = chi(d, p);
    if (c == 0) return;
    const double pd = static_cast<double>(p);
    const double logp = std::log(pd);
    psum.add(c / std::sqrt(pd));
    int sign = 1;
    for (std::uint64_t pk = p; pk <= z; pk *= p) {
      sign *= c;
      lambda.add(sign * logp / std::sqrt(static_cast<double>(pk)));
      if (pk > z / p) break;
    }
  });
  out.lambda_sum = lambda.value();
  out.p_sum = psum.value();
  return out;
}

}  // namespace qdl
