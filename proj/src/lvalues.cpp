#include "qdl/lvalues.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <mutex>
#include <thread>
#include <exception>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qdl/errors.hpp"
#include "qdl/summation.hpp"

namespace qdl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// 2 / Gamma(1/4)
const double kPrefactor = 2.0 / std::tgamma(0.25);

double integrate(const auto& f, double a, double b, double tol) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol, &err);
}

}  // namespace

// ---------------------------------------------------------------------------
// Smoothing weight

SmoothingWeight::SmoothingWeight(WeightKind kind, double tol)
    : kind_(kind), tol_(tol), mellin_at_1_(0.0) {
  mellin_at_1_ = mellin(1.0);
}

SmoothingWeight SmoothingWeight::make(WeightKind kind, double tol) {
  if (!(tol > 0.0 && tol <= 1e-6)) {
    throw DomainError("smoothing weight quadrature tolerance must lie in (0, 1e-6]");
  }
  return SmoothingWeight(kind, tol);
}

double SmoothingWeight::ramp(double t) noexcept {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double g0 = std::exp(-1.0 / t);
  const double g1 = std::exp(-1.0 / (1.0 - t));
  return g0 / (g0 + g1);
}

double SmoothingWeight::operator()(double x) const noexcept {
  if (x <= support_lo || x >= support_hi) return 0.0;
  if (x < plateau_lo) return ramp(2.0 * x - 1.0);
  if (x <= plateau_hi) return 1.0;
  return ramp(5.0 - 2.0 * x);
}

double SmoothingWeight::mellin(double s) const {
  const auto f = [&](double x) { return (*this)(x) * std::pow(x, s - 1.0); };
  // Relative tolerance per piece; pieces are O(1).
  const double rel = tol_ / 4.0;
  const double left = integrate(f, support_lo, plateau_lo, rel);
  const double right = integrate(f, plateau_hi, support_hi, rel);
  const double middle = s == 0.0 ? std::log(2.0) : (std::pow(2.0, s) - 1.0) / s;
  return left + middle + right;
}

// ---------------------------------------------------------------------------
// Theta-series engine

std::shared_ptr<const QuarterGammaTable> default_quarter_gamma_table() {
  static const std::shared_ptr<const QuarterGammaTable> table =
      std::make_shared<const QuarterGammaTable>();
  return table;
}

double AfeEngine::tail_bound(std::uint64_t modulus, std::uint64_t terms) {
  const double q = static_cast<double>(modulus);
  const double n0 = static_cast<double>(terms + 1);
  const double x0 = std::numbers::pi * n0 * n0 / q;
  if (x0 < 1.0) return std::numeric_limits<double>::infinity();
  // Gamma(1/4, x) <= x^{-3/4} e^{-x}; consecutive ratios beyond terms+1 are
  // at most exp(-pi (2 terms + 3) / q).
  const double first = kPrefactor * std::pow(x0, -0.75) * std::exp(-x0) / std::sqrt(n0);
  const double ratio = std::exp(-std::numbers::pi * (2.0 * static_cast<double>(terms) + 3.0) / q);
  return first / (1.0 - ratio);
}

double AfeEngine::term_weight(std::uint64_t modulus, std::uint64_t n) {
  const double nd = static_cast<double>(n);
  const double x = std::numbers::pi * nd * nd / static_cast<double>(modulus);
  return kPrefactor * upper_incomplete_gamma(0.25, x) / std::sqrt(nd);
}

namespace {

std::uint64_t truncation_for(std::uint64_t modulus, double tail_tol) {
  const double q = static_cast<double>(modulus);
  auto lo = static_cast<std::uint64_t>(std::ceil(std::sqrt(q / std::numbers::pi)));
  std::uint64_t hi = std::max<std::uint64_t>(lo, 1);
  while (AfeEngine::tail_bound(modulus, hi) > tail_tol) hi *= 2;
  if (lo > hi) lo = hi;
  // Least N in [lo, hi] with tail_bound(N) <= tail_tol; tail_bound is decreasing.
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (AfeEngine::tail_bound(modulus, mid) <= tail_tol) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace

AfeEngine::AfeEngine(std::uint64_t max_d)
    : max_d_(max_d),
      max_terms_(truncation_for(8 * std::max<std::uint64_t>(max_d, 1), 0.25e-12) + 16),
      spf_(static_cast<std::uint32_t>(max_terms_)),
      sqrt_(max_terms_ + 1),
      rsqrt_(max_terms_ + 1),
      table_(default_quarter_gamma_table()) {
  for (std::uint64_t n = 1; n <= max_terms_; ++n) {
    sqrt_[n] = std::sqrt(static_cast<double>(n));
    rsqrt_[n] = 1.0 / sqrt_[n];
  }
}

std::uint64_t AfeEngine::truncation_point(FamilyIndex d, double tail_tol) const {
  return truncation_for(d.modulus(), tail_tol);
}

void AfeEngine::fill_characters(FamilyIndex d, std::uint64_t terms,
                                std::vector<signed char>& chi) const {
  chi.assign(terms + 1, 0);
  if (terms >= 1) chi[1] = 1;
  const std::uint64_t q = d.modulus();
  for (std::uint64_t n = 3; n <= terms; n += 2) {
    const std::uint32_t p = spf_.spf(static_cast<std::uint32_t>(n));
    if (p == n) {
      chi[n] = static_cast<signed char>(jacobi(q % p, p));
    } else {
      chi[n] = static_cast<signed char>(chi[p] * chi[n / p]);
    }
  }
}

LValueRecord AfeEngine::evaluate(FamilyIndex d, double tol) const {
  if (!(tol > 0.0) || tol > 1e-6) throw DomainError("AFE tolerance must lie in [1e-12, 1e-6]");
  if (tol < 1e-12) throw PrecisionError("AFE tolerance below 1e-12 is not reachable in binary64");
  if (d.d() > max_d_) {
    throw DomainError("d = " + std::to_string(d.d()) + " exceeds engine range " +
                      std::to_string(max_d_));
  }
  const std::uint64_t q = d.modulus();
  const double tail_budget = tol / 2.0;
  const std::uint64_t terms = truncation_point(d, tail_budget);
  const double tail = tail_bound(q, terms);

  thread_local std::vector<signed char> chi;
  fill_characters(d, terms, chi);

  const double c = std::pow(std::numbers::pi / static_cast<double>(q), 0.25);  // u = c sqrt(n)
  const QuarterGammaTable& table = *table_;
  const double table_err = table.error_bound();
  const double exact_err = 256.0 * kEps;
  // sum_{n <= N odd} n^{-1/2} <= sqrt(N) + 1
  const double weight_mass = kPrefactor * (sqrt_[terms] + 1.0);
  const bool use_table = table_err * weight_mass <= tol / 4.0;

  CompensatedSum sum;
  double abs_mass = 0.0;
  double gamma_err = 0.0;
  for (std::uint64_t n = 1; n <= terms; n += 2) {
    const int s = chi[n];
    if (s == 0) continue;
    const double u = c * sqrt_[n];
    double g;
    if (use_table && u <= table.u_max()) {
      g = table(u);
      gamma_err += table_err * rsqrt_[n];
    } else {
      const double u2 = u * u;
      g = upper_incomplete_gamma(0.25, u2 * u2);
      gamma_err += exact_err * rsqrt_[n];
    }
    const double t = g * rsqrt_[n];
    abs_mass += t;
    sum.add(s > 0 ? t : -t);
  }

  const double rounding = 8.0 * kEps * kPrefactor * abs_mass;
  const double approx = kPrefactor * gamma_err;
  if (rounding + approx > tol / 2.0) {
    throw PrecisionError("rounding floor for d = " + std::to_string(d.d()) +
                         " exceeds tolerance " + std::to_string(tol));
  }
  LValueRecord rec;
  rec.d = d;
  rec.value = kPrefactor * sum.value();
  rec.abs_error = tail + rounding + approx;
  rec.method = LMethod::Afe;
  return rec;
}

double AfeEngine::truncated_sum(FamilyIndex d, std::uint64_t terms) const {
  const std::uint64_t q = d.modulus();
  CompensatedSum sum;
  for (std::uint64_t n = 1; n <= terms; n += 2) {
    const int s = chi(d, n);
    if (s == 0) continue;
    sum.add(s * term_weight(q, n));
  }
  return sum.value();
}

LValueRecord central_value_afe(FamilyIndex d, double tol) {
  const AfeEngine engine(d.d());
  return engine.evaluate(d, tol);
}

std::vector<int> character_table(FamilyIndex d) {
  const std::uint64_t q = d.modulus();
  std::vector<int> out(q, 0);
  for (std::uint64_t a = 1; a < q; ++a) out[a] = chi(d, a);
  return out;
}

// ---------------------------------------------------------------------------
// Sweep

std::vector<LValueRecord> family_sweep(std::uint64_t x_min, std::uint64_t x_max, double tol,
                                       unsigned workers) {
  if (x_min > x_max) throw DomainError("family_sweep requires x_min <= x_max");
  const std::vector<FamilyIndex> family = sieve_family_range(x_min, x_max);
  std::vector<LValueRecord> out(family.size());
  if (family.empty()) return out;
  const AfeEngine engine(family.back().d());

  constexpr std::size_t kChunk = 512;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(kChunk);
        if (begin >= family.size() || failed.load()) return;
        const std::size_t end = std::min(family.size(), begin + kChunk);
        for (std::size_t i = begin; i < end; ++i) out[i] = engine.evaluate(family[i], tol);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      failed = true;
    }
  };
  workers = std::max(1U, workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace qdl
