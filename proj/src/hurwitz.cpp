// Extended-precision reference values for L(1/2, chi_{8d}).
//
//   L(1/2, chi) = q^{-1/2} sum_{a=1}^{q} chi(a) zeta(1/2, a/q)
//
// Each zeta(1/2, a/q) is shifted by N whole steps and finished with Euler-Maclaurin:
//   zeta(s, x) ~ x^{1-s}/(s-1) + x^{-s}/2 + sum_j B_{2j}/(2j)! (s)_{2j-1} x^{-s-2j+1}.
// The shifted partial sums over all residues collapse to sum_{m <= Nq} chi(m) m^{-1/2}.

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <mpfr.h>

#include "qdl/errors.hpp"
#include "qdl/lvalues.hpp"

namespace qdl {

namespace {

class Mp {
 public:
  explicit Mp(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~Mp() { mpfr_clear(v_); }
  Mp(const Mp&) = delete;
  Mp& operator=(const Mp&) = delete;
  mpfr_ptr get() noexcept { return v_; }
  mpfr_srcptr get() const noexcept { return v_; }

 private:
  mpfr_t v_;
};

// B_0 .. B_{n} via the Akiyama-Tanigawa transform.
std::vector<mpq_class> bernoulli_numbers(int n) {
  std::vector<mpq_class> a(n + 1);
  std::vector<mpq_class> out(n + 1);
  for (int m = 0; m <= n; ++m) {
    a[m] = mpq_class(1, m + 1);
    for (int j = m; j >= 1; --j) {
      a[j - 1] = j * (a[j - 1] - a[j]);
      a[j - 1].canonicalize();
    }
    out[m] = a[0];
  }
  out[1] = mpq_class(-1, 2);  // convention irrelevant here; only even indices are used
  return out;
}

const std::vector<mpq_class>& bernoulli_cache() {
  static const std::vector<mpq_class> cache = bernoulli_numbers(2 * 120);
  return cache;
}

// log |B_{2j}/(2j)! (1/2)_{2j-1} x^{-2j+1/2}| for planning the truncation.
double log_em_term(int j, double x) {
  const double two_j = 2.0 * j;
  // zeta(s) <= 1 + 2^{-s} + 2^{1-s}/(s-1)
  const double zeta = 1.0 + std::pow(2.0, -two_j) + std::pow(2.0, 1.0 - two_j) / (two_j - 1.0);
  return std::log(2.0 * zeta) - two_j * std::log(2.0 * M_PI) + std::lgamma(two_j - 0.5) -
         std::lgamma(0.5) - (two_j - 0.5) * std::log(x);
}

}  // namespace

OracleValue central_value_hurwitz(FamilyIndex d, int digits) {
  if (digits < 1 || digits > 50) throw DomainError("hurwitz oracle supports 1 <= digits <= 50");
  const std::uint64_t q = d.modulus();
  if (q > 100000) {
    throw ResourceError("hurwitz oracle limited to modulus <= 1e5, got " + std::to_string(q));
  }
  const int working_digits = std::max(50, digits + 15);
  const auto prec = static_cast<mpfr_prec_t>(std::ceil(working_digits * 3.3219280948873623) + 16);

  const std::vector<int> chi = character_table(d);
  std::uint64_t active = 0;
  for (int c : chi) active += (c != 0);

  // Pick the shift N and the number J of Bernoulli corrections so that
  // q^{-1/2} * active * 2|T_{J+1}(N)| <= 10^{-(digits+3)}.
  const double log_target = -(digits + 3) * std::log(10.0) + 0.5 * std::log(static_cast<double>(q)) -
                            std::log(2.0 * static_cast<double>(active));
  int shift = 2;
  int terms = 0;
  const int max_terms = 119;
  for (;; ++shift) {
    const double x = static_cast<double>(shift);
    int j = 1;
    for (; j <= max_terms; ++j) {
      if (log_em_term(j + 1, x) <= log_target) break;
      if (j > 2 && log_em_term(j + 1, x) > log_em_term(j, x)) {
        j = max_terms + 1;
        break;
      }
    }
    if (j <= max_terms) {
      terms = j;
      break;
    }
  }
  const double em_bound = 2.0 * std::exp(log_em_term(terms + 1, static_cast<double>(shift))) *
                          static_cast<double>(active) / std::sqrt(static_cast<double>(q));

  // coeff_j = B_{2j}/(2j)! * (1/2)(3/2)...(2j - 3/2)
  const std::vector<mpq_class>& bern = bernoulli_cache();
  std::vector<std::unique_ptr<Mp>> coeff;
  coeff.reserve(static_cast<std::size_t>(terms));
  {
    mpq_class poch = mpq_class(1, 2);  // (1/2)_1
    mpz_class fact = 2;                // (2j)!
    for (int j = 1; j <= terms; ++j) {
      if (j > 1) {
        poch *= mpq_class(4 * j - 5, 2) * mpq_class(4 * j - 3, 2);  // (2j-5/2)(2j-3/2)
        fact *= (2 * j - 1) * (2 * j);
      }
      mpq_class c = bern[2 * j] * poch / fact;
      c.canonicalize();
      coeff.push_back(std::make_unique<Mp>(prec));
      mpfr_set_q(coeff.back()->get(), c.get_mpq_t(), MPFR_RNDN);
    }
  }

  Mp direct(prec), tails(prec), tmp(prec), x(prec), rx(prec), y2(prec), poly(prec), tail(prec);

  // sum_{m <= N q} chi(m) m^{-1/2}
  mpfr_set_zero(direct.get(), 1);
  const std::uint64_t limit = static_cast<std::uint64_t>(shift) * q;
  for (std::uint64_t m = 1; m <= limit; ++m) {
    const int c = chi[m % q];
    if (c == 0) continue;
    mpfr_set_ui(tmp.get(), m, MPFR_RNDN);
    mpfr_rec_sqrt(tmp.get(), tmp.get(), MPFR_RNDN);
    if (c > 0) {
      mpfr_add(direct.get(), direct.get(), tmp.get(), MPFR_RNDN);
    } else {
      mpfr_sub(direct.get(), direct.get(), tmp.get(), MPFR_RNDN);
    }
  }

  // sum_a chi(a) T(N + a/q),  T(x) = -2 sqrt(x) + x^{-1/2}/2 + x^{-1/2} sum_j coeff_j x^{1-2j}
  mpfr_set_zero(tails.get(), 1);
  for (std::uint64_t a = 1; a <= q; ++a) {
    const int c = chi[a % q];
    if (c == 0) continue;
    mpfr_set_ui(x.get(), a, MPFR_RNDN);
    mpfr_div_ui(x.get(), x.get(), q, MPFR_RNDN);
    mpfr_add_ui(x.get(), x.get(), static_cast<unsigned long>(shift), MPFR_RNDN);
    mpfr_rec_sqrt(rx.get(), x.get(), MPFR_RNDN);
    mpfr_ui_div(y2.get(), 1, x.get(), MPFR_RNDN);
    mpfr_sqr(y2.get(), y2.get(), MPFR_RNDN);
    // poly = sum_j coeff_j y2^{j-1}, Horner
    mpfr_set(poly.get(), coeff[terms - 1]->get(), MPFR_RNDN);
    for (int j = terms - 2; j >= 0; --j) {
      mpfr_mul(poly.get(), poly.get(), y2.get(), MPFR_RNDN);
      mpfr_add(poly.get(), poly.get(), coeff[j]->get(), MPFR_RNDN);
    }
    mpfr_div(poly.get(), poly.get(), x.get(), MPFR_RNDN);  // * x^{-1}
    mpfr_add_d(poly.get(), poly.get(), 0.5, MPFR_RNDN);
    mpfr_mul(tail.get(), poly.get(), rx.get(), MPFR_RNDN);
    // -2 sqrt(x) = -2 x * x^{-1/2}
    mpfr_mul(tmp.get(), x.get(), rx.get(), MPFR_RNDN);
    mpfr_mul_2ui(tmp.get(), tmp.get(), 1, MPFR_RNDN);
    mpfr_sub(tail.get(), tail.get(), tmp.get(), MPFR_RNDN);
    if (c > 0) {
      mpfr_add(tails.get(), tails.get(), tail.get(), MPFR_RNDN);
    } else {
      mpfr_sub(tails.get(), tails.get(), tail.get(), MPFR_RNDN);
    }
  }
  mpfr_set_ui(tmp.get(), q, MPFR_RNDN);
  mpfr_rec_sqrt(tmp.get(), tmp.get(), MPFR_RNDN);
  mpfr_mul(tails.get(), tails.get(), tmp.get(), MPFR_RNDN);
  mpfr_add(direct.get(), direct.get(), tails.get(), MPFR_RNDN);

  // Each accumulated term carries O(terms) roundings of relative size 2^{-prec};
  // magnitudes are bounded by 2 sqrt(Nq) (direct) and 4 sqrt(q (N+1)) (tails).
  const double magnitude = 2.0 * std::sqrt(static_cast<double>(limit)) +
                           4.0 * std::sqrt(static_cast<double>(q) * (shift + 1));
  const double rounding = static_cast<double>(terms + 8) * static_cast<double>(limit + q) *
                          std::ldexp(1.0, -static_cast<int>(prec)) * magnitude;

  OracleValue out;
  out.record.d = d;
  out.record.value = mpfr_get_d(direct.get(), MPFR_RNDN);
  out.record.abs_error = em_bound + rounding +
                         0.5 * std::fabs(std::nextafter(out.record.value, 1e300) - out.record.value);
  out.record.method = LMethod::Hurwitz;
  const int len = mpfr_snprintf(nullptr, 0, "%.*RNf", digits, direct.get());
  std::string buf(static_cast<std::size_t>(len) + 1, '\0');
  mpfr_snprintf(buf.data(), buf.size(), "%.*RNf", digits, direct.get());
  buf.resize(static_cast<std::size_t>(len));
  out.decimal = std::move(buf);
  return out;
}

}  // namespace qdl
