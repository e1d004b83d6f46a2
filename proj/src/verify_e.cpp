// Randomized checks of the truncated-exponential inequalities.

#include <cmath>
#include <random>
#include <sstream>

#include "qdl/machinery.hpp"

namespace qdl {

namespace {

constexpr double kSlack = 1e-9;

int random_even(std::mt19937_64& rng, int lo, int hi) {
  std::uniform_int_distribution<int> half(lo / 2, hi / 2);
  return 2 * half(rng);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void record(LemmaCheck& c, bool ok, const std::string& witness) {
  ++c.trials;
  if (ok) return;
  if (c.failures++ == 0) c.witness = witness;
}

}  // namespace

ELemmaReport verify_e_lemmas(std::uint64_t trials, std::uint64_t seed) {
  ELemmaReport rep;
  // Independent streams so one part's draw count does not shift another's inputs.
  std::mt19937_64 rng_a(seed * 4 + 0), rng_b(seed * 4 + 1), rng_c(seed * 4 + 2), rng_d(seed * 4 + 3);

  for (std::uint64_t t = 0; t < trials; ++t) {
    // (a) positivity and E >= e^x on x <= 0
    {
      const int ell = random_even(rng_a, 0, 40);
      const long double x = uniform(rng_a, -(3.0 * ell + 10.0), 0.0);
      const long double e = truncated_exp(ell, x);
      const long double rb = truncated_exp_rounding(ell, x);
      const long double ex = std::exp(x);
      const bool ok = e > 0.0L && e + rb >= ex * (1.0L - kSlack);
      std::ostringstream w;
      if (!ok) w.precision(17), w << "ell=" << ell << " x=" << static_cast<double>(x);
      record(rep.positivity_and_lower, ok, w.str());
    }
    // (b) e^x <= (1 + e^{-ell}/16) E(x) for x <= ell/e^2
    {
      const int ell = random_even(rng_b, 0, 40);
      const double hi = ell / std::exp(2.0);
      const long double x = uniform(rng_b, -(2.0 * ell + 5.0), hi);
      const long double e = truncated_exp(ell, x);
      const long double rb = truncated_exp_rounding(ell, x);
      const long double factor = 1.0L + std::exp(-static_cast<long double>(ell)) / 16.0L;
      const bool ok = std::exp(x) <= factor * (e + rb) * (1.0L + kSlack);
      std::ostringstream w;
      if (!ok) w.precision(17), w << "ell=" << ell << " x=" << static_cast<double>(x);
      record(rep.upper, ok, w.str());
    }
    // (c) the two-product bound
    {
      const int R = std::uniform_int_distribution<int>(1, 4)(rng_c);
      std::vector<int> ells(R);
      std::vector<double> x(R);
      for (int j = 0; j < R; ++j) {
        ells[j] = random_even(rng_c, 2, 30);
        const double scale = uniform(rng_c, 0.0, 1.0) < 0.5 ? ells[j] / std::exp(2.0) : ells[j] / 2.0;
        x[j] = uniform(rng_c, -scale, scale);
      }
      double k;
      const double sel = uniform(rng_c, 0.0, 1.0);
      if (sel < 0.05) k = 0.0;
      else if (sel < 0.10) k = 1.0;
      else k = uniform(rng_c, 0.0, 1.0);
      const double y = uniform(rng_c, 0.0, 1.0) < 0.05 ? 0.0 : std::exp(uniform(rng_c, -8.0, 8.0));
      const double lhs = std::pow(y, k);
      const double rhs = two_product_bound(y, k, x, ells);
      const bool ok = lhs <= rhs * (1.0 + kSlack);
      std::ostringstream w;
      if (!ok) {
        w.precision(17);
        w << "y=" << y << " k=" << k << " ells=[";
        for (int j = 0; j < R; ++j) w << (j ? "," : "") << ells[j];
        w << "] x=[";
        for (int j = 0; j < R; ++j) w << (j ? "," : "") << x[j];
        w << "] lhs=" << lhs << " rhs=" << rhs;
      }
      record(rep.two_product, ok, w.str());
    }
    // (d) E(x) E(-x) >= 1 exactly
    {
      const int ell = random_even(rng_d, 0, 20);
      const long den = std::uniform_int_distribution<long>(1, 1000)(rng_d);
      const long num = std::uniform_int_distribution<long>(-10 * den, 10 * den)(rng_d);
      mpq_class xq(num, den);
      xq.canonicalize();
      const mpq_class prod = truncated_exp(ell, xq) * truncated_exp(ell, mpq_class(-xq));
      const bool ok = cmp(prod, 1) >= 0;
      record(rep.reflection, ok, ok ? "" : "ell=" + std::to_string(ell) + " x=" + xq.get_str());
    }
  }
  return rep;
}

}  // namespace qdl
