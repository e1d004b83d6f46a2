#include "qdl/arith.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "qdl/errors.hpp"
#include "qdl/summation.hpp"

namespace qdl {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw ResourceError(std::string("64-bit overflow computing ") + what);
  }
  return r;
}

std::uint64_t isqrt(std::uint64_t n) noexcept {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

void check_budget(std::uint64_t bits, std::size_t budget) {
  if (bits / 8 + 1 > budget) {
    throw ResourceError("sieve of " + std::to_string(bits) + " bits exceeds memory budget of " +
                        std::to_string(budget) + " bytes");
  }
}

// Small primes up to sqrt bound, plain Eratosthenes.
std::vector<std::uint64_t> base_primes(std::uint64_t limit) {
  std::vector<bool> composite(limit + 1, false);
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    out.push_back(i);
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return out;
}

}  // namespace

FamilyIndex FamilyIndex::make(std::uint64_t d) {
  if (d == 0 || (d & 1U) == 0) {
    throw DomainError("family index must be a positive odd integer, got " + std::to_string(d));
  }
  if (!is_squarefree(d)) {
    throw DomainError("family index must be square-free, got " + std::to_string(d));
  }
  return FamilyIndex(d);
}

int jacobi(std::uint64_t a, std::uint64_t n) noexcept {
  a %= n;
  int t = 1;
  while (a != 0) {
    const int z = __builtin_ctzll(a);
    a >>= z;
    const unsigned r8 = static_cast<unsigned>(n & 7U);
    if ((z & 1) && (r8 == 3 || r8 == 5)) t = -t;
    if ((a & 3U) == 3 && (n & 3U) == 3) t = -t;
    std::swap(a, n);
    a %= n;
  }
  return n == 1 ? t : 0;
}

int kronecker(std::int64_t m, std::int64_t n) {
  if (m == 0 && n == 0) throw DomainError("kronecker(0, 0) is undefined");
  if (n == 0) return (m == 1 || m == -1) ? 1 : 0;
  int sign = 1;
  std::uint64_t un;
  if (n < 0) {
    un = static_cast<std::uint64_t>(-(n + 1)) + 1;
    if (m < 0) sign = -1;
  } else {
    un = static_cast<std::uint64_t>(n);
  }
  const int v = __builtin_ctzll(un);
  un >>= v;
  if (v > 0) {
    if ((m & 1) == 0) return 0;
    const auto r8 = static_cast<int>(((m % 8) + 8) % 8);
    if ((v & 1) && (r8 == 3 || r8 == 5)) sign = -sign;
  }
  if (un == 1) return sign;
  const auto mod = static_cast<std::int64_t>(un);
  const auto a = static_cast<std::uint64_t>(((m % mod) + mod) % mod);
  return sign * jacobi(a, un);
}

bool is_squarefree(std::uint64_t n) noexcept {
  if (n == 0) return false;
  if (n % 4 == 0) return false;
  for (std::uint64_t p = 3; p * p <= n; p += 2) {
    if (n % (p * p) == 0) return false;
    if (n % p == 0) n /= p;
  }
  return true;
}

std::vector<FamilyIndex> sieve_family_range(std::uint64_t lo, std::uint64_t hi,
                                            std::size_t memory_budget) {
  std::vector<FamilyIndex> out;
  if (lo < 1) lo = 1;
  if (hi < lo) return out;
  const std::uint64_t span = hi - lo + 1;
  check_budget(span, memory_budget);
  std::vector<bool> bad(span, false);
  const std::uint64_t root = isqrt(hi);
  for (std::uint64_t p : base_primes(root)) {
    if (p == 2) continue;
    const std::uint64_t sq = p * p;
    std::uint64_t start = ((lo + sq - 1) / sq) * sq;
    for (std::uint64_t m = start; m <= hi; m += sq) bad[m - lo] = true;
  }
  out.reserve(span / 2 * 8 / 10 + 1);
  for (std::uint64_t d = (lo | 1U); d <= hi; d += 2) {
    if (!bad[d - lo]) out.push_back(FamilyIndex::trusted(d));
  }
  return out;
}

std::vector<FamilyIndex> sieve_family(std::uint64_t limit, std::size_t memory_budget) {
  if (limit < 1) throw DomainError("sieve_family requires limit >= 1");
  return sieve_family_range(1, limit, memory_budget);
}

std::uint64_t count_family(std::uint64_t lo, std::uint64_t hi) {
  // Segmented to keep memory bounded for large ranges.
  constexpr std::uint64_t kSeg = std::uint64_t{1} << 22;
  std::uint64_t total = 0;
  for (std::uint64_t a = std::max<std::uint64_t>(lo, 1); a <= hi; a += kSeg) {
    const std::uint64_t b = std::min(hi, a + kSeg - 1);
    total += sieve_family_range(a, b).size();
    if (b == hi) break;
  }
  return total;
}

void for_each_prime(std::uint64_t limit, const std::function<void(std::uint64_t)>& fn) {
  if (limit < 2) return;
  const std::uint64_t root = isqrt(limit);
  const std::vector<std::uint64_t> small = base_primes(root);
  constexpr std::uint64_t kSeg = std::uint64_t{1} << 18;
  std::vector<char> composite(kSeg);
  for (std::uint64_t lo = 0; lo <= limit; lo += kSeg) {
    const std::uint64_t hi = std::min(limit, lo + kSeg - 1);
    std::fill(composite.begin(), composite.end(), 0);
    for (std::uint64_t p : small) {
      std::uint64_t start = std::max(p * p, ((lo + p - 1) / p) * p);
      for (std::uint64_t m = start; m <= hi; m += p) composite[m - lo] = 1;
    }
    for (std::uint64_t n = std::max<std::uint64_t>(lo, 2); n <= hi; ++n) {
      if (!composite[n - lo]) fn(n);
    }
    if (hi == limit) break;
  }
}

std::vector<std::uint64_t> sieve_primes(std::uint64_t limit, std::size_t memory_budget) {
  if (limit < 2) throw DomainError("sieve_primes requires limit >= 2");
  // Output storage dominates; pi(x) < 1.26 x / ln x.
  const double expected = 1.26 * static_cast<double>(limit) / std::log(static_cast<double>(limit)) + 2;
  check_budget(static_cast<std::uint64_t>(expected * 64), memory_budget);
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(expected));
  for_each_prime(limit, [&](std::uint64_t p) { out.push_back(p); });
  return out;
}

Factorization factorize(std::uint64_t n) {
  Factorization f;
  if (n <= 1) return f;
  auto strip = [&](std::uint64_t p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e > 0) f.emplace_back(p, e);
  };
  strip(2);
  strip(3);
  for (std::uint64_t p = 5; p * p <= n; p += 6) {
    strip(p);
    strip(p + 2);
  }
  if (n > 1) f.emplace_back(n, 1);
  return f;
}

SpfTable::SpfTable(std::uint32_t limit) : limit_(limit), spf_(std::size_t{limit} + 1, 0) {
  for (std::uint32_t i = 2; i <= limit; ++i) {
    if (spf_[i] != 0) continue;
    spf_[i] = i;
    for (std::uint64_t j = std::uint64_t{i} * i; j <= limit; j += i) {
      if (spf_[j] == 0) spf_[j] = i;
    }
  }
}

Factorization SpfTable::factorize(std::uint64_t n) const {
  if (n > limit_) return qdl::factorize(n);
  Factorization f;
  auto m = static_cast<std::uint32_t>(n);
  while (m > 1) {
    const std::uint32_t p = spf_[m];
    int e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    f.emplace_back(p, e);
  }
  return f;
}

mpq_class h_prime(std::uint64_t p) {
  mpz_class pz(static_cast<unsigned long>(p));
  mpq_class inv_p(1, pz);
  mpq_class r = 1 + inv_p + inv_p * inv_p - mpq_class(4, pz * (pz + 1));
  r.canonicalize();
  return r;
}

namespace {

MultiplicativeProfile profile_from(std::uint64_t n, const Factorization& f) {
  MultiplicativeProfile mp;
  mp.n = n;
  for (const auto& [p, e] : f) {
    mp.omega_big += e;
    mp.omega_distinct += 1;
    std::uint64_t fact = 1;
    for (int i = 2; i <= e; ++i) fact = checked_mul(fact, static_cast<std::uint64_t>(i), "w(n)");
    mp.w = checked_mul(mp.w, fact, "w(n)");
    mp.tau = checked_mul(mp.tau, static_cast<std::uint64_t>(e + 1), "d(n)");
    std::uint64_t term = 1, s = 1;
    for (int i = 0; i < e; ++i) {
      term = checked_mul(term, p, "sigma(n)");
      s += term;
    }
    mp.sigma = checked_mul(mp.sigma, s, "sigma(n)");
    mp.h *= h_prime(p);
    if (e % 2 == 1) mp.squarefree_part *= p;
    for (int i = 0; i < e / 2; ++i) mp.square_root_part *= p;
  }
  mp.h.canonicalize();
  return mp;
}

}  // namespace

MultiplicativeProfile multiplicative_profile(std::uint64_t n) {
  if (n == 0) throw DomainError("multiplicative_profile requires n >= 1");
  return profile_from(n, factorize(n));
}

MultiplicativeProfile multiplicative_profile(std::uint64_t n, const SpfTable& table) {
  if (n == 0) throw DomainError("multiplicative_profile requires n >= 1");
  return profile_from(n, table.factorize(n));
}

double lambda_j(std::uint64_t n, int j) {
  if (j < 0 || j > 3) throw DomainError("lambda_j supports 0 <= j <= 3, got " + std::to_string(j));
  if (n == 0) throw DomainError("lambda_j requires n >= 1");
  if (j == 0) return n == 1 ? 1.0 : 0.0;
  const Factorization f = factorize(n);
  if (static_cast<int>(f.size()) > j) return 0.0;

  // Enumerate divisors with their exponent vectors; recursion runs over divisors of n only.
  std::vector<std::uint64_t> divisors{1};
  for (const auto& [p, e] : f) {
    const std::size_t cur = divisors.size();
    std::uint64_t pk = 1;
    for (int i = 1; i <= e; ++i) {
      pk *= p;
      for (std::size_t t = 0; t < cur; ++t) divisors.push_back(divisors[t] * pk);
    }
  }
  std::sort(divisors.begin(), divisors.end());
  std::map<std::uint64_t, std::size_t> index;
  for (std::size_t i = 0; i < divisors.size(); ++i) index[divisors[i]] = i;

  // Prime-power divisors a and Lambda(a).
  std::vector<std::pair<std::uint64_t, double>> prime_powers;
  for (const auto& [p, e] : f) {
    std::uint64_t pk = 1;
    for (int i = 1; i <= e; ++i) {
      pk *= p;
      prime_powers.emplace_back(pk, std::log(static_cast<double>(p)));
    }
  }

  std::vector<double> cur(divisors.size(), 0.0);
  cur[0] = 1.0;  // Lambda_0
  for (int step = 0; step < j; ++step) {
    std::vector<double> next(divisors.size(), 0.0);
    for (std::size_t i = 0; i < divisors.size(); ++i) {
      const std::uint64_t m = divisors[i];
      double v = cur[i] * std::log(static_cast<double>(m));
      for (const auto& [a, log_p] : prime_powers) {
        if (m % a == 0) v += log_p * cur[index.at(m / a)];
      }
      next[i] = v;
    }
    cur = std::move(next);
  }
  return cur.back();
}

double mertens_sum(double x, int j) {
  if (x < 2) throw DomainError("mertens_sum requires x >= 2");
  if (j < 0) throw DomainError("mertens_sum requires j >= 0");
  CompensatedSum s;
  for_each_prime(static_cast<std::uint64_t>(std::floor(x)), [&](std::uint64_t p) {
    const double pd = static_cast<double>(p);
    s.add(std::pow(std::log(pd), j) / pd);
  });
  return s.value();
}

EulerConstant constant_D(std::uint64_t p_limit) {
  if (p_limit < 3) throw DomainError("constant_D requires p_limit >= 3");
  CompensatedSum log_prod;
  for_each_prime(p_limit, [&](std::uint64_t p) {
    if (p == 2) return;
    const double pd = static_cast<double>(p);
    // (1 - 1/p) h(p) = 1 - eps_p, eps_p = 1/p^3 + 4(p-1)/(p^2 (p+1))
    const double eps = 1.0 / (pd * pd * pd) + 4.0 * (pd - 1.0) / (pd * pd * (pd + 1.0));
    log_prod.add(std::log1p(-eps));
  });
  EulerConstant out;
  out.value = std::exp(log_prod.value()) / 8.0;
  // Tail: eps_p <= (4 + 1/P)/p^2, -log(1 - eps) <= eps/(1 - 5/P^2), and
  // sum_{p > P} p^{-2} <= 2 * 1.25506 / (P log P) from pi(t) < 1.25506 t / log t.
  const double P = static_cast<double>(p_limit);
  const double prime_tail = 2.0 * 1.25506 / (P * std::log(P));
  const double log_tail = (4.0 + 1.0 / P) * prime_tail / (1.0 - 5.0 / (P * P));
  out.tail_bound = out.value * (-std::expm1(-log_tail)) + 4.0 * std::numeric_limits<double>::epsilon() * out.value;
  return out;
}

}  // namespace qdl
