#pragma once

// Central values L(1/2, chi_{8d}): smoothing weight, theta-series engine,
// extended-precision Hurwitz oracle, family sweep and the binary cache.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qdl/arith.hpp"
#include "qdl/special.hpp"

namespace qdl {

enum class WeightKind { Canonical };

// Smooth bump: 0 outside [1/2, 5/2], 1 on [1, 2], shoulders
// psi(t) = g(t) / (g(t) + g(1 - t)), g(t) = exp(-1/t).
class SmoothingWeight {
 public:
  // tol in (0, 1e-6]: quadrature tolerance for the Mellin transform.
  static SmoothingWeight make(WeightKind kind = WeightKind::Canonical, double tol = 1e-10);

  double operator()(double x) const noexcept;
  // int_0^inf Phi(x) x^{s-1} dx
  double mellin(double s) const;
  double mellin_at_1() const noexcept { return mellin_at_1_; }
  double quadrature_tolerance() const noexcept { return tol_; }

  static constexpr double support_lo = 0.5;
  static constexpr double support_hi = 2.5;
  static constexpr double plateau_lo = 1.0;
  static constexpr double plateau_hi = 2.0;

  static double ramp(double t) noexcept;

 private:
  SmoothingWeight(WeightKind kind, double tol);
  WeightKind kind_;
  double tol_;
  double mellin_at_1_;
};

enum class LMethod { Afe, Hurwitz };

struct LValueRecord {
  FamilyIndex d;
  double value = 0.0;
  double abs_error = 0.0;
  LMethod method = LMethod::Afe;
};

// Production evaluator. Tables are immutable after construction and shared by all
// callers; evaluate() is safe to call concurrently.
//
//   L(1/2, chi) = (2 / Gamma(1/4)) sum_{n >= 1} chi(n) n^{-1/2} Gamma(1/4, pi n^2 / q),  q = 8d.
class AfeEngine {
 public:
  explicit AfeEngine(std::uint64_t max_d);

  std::uint64_t max_d() const noexcept { return max_d_; }

  // tol in [1e-12, 1e-6]; the returned abs_error is <= tol.
  LValueRecord evaluate(FamilyIndex d, double tol) const;

  // Least N with certified tail sum_{n > N} (weights) <= tail_tol.
  std::uint64_t truncation_point(FamilyIndex d, double tail_tol) const;
  // Bound on sum_{n > terms} |(2/Gamma(1/4)) n^{-1/2} Gamma(1/4, pi n^2/q)|.
  static double tail_bound(std::uint64_t modulus, std::uint64_t terms);

  // Plain truncated series with explicit term count and exact incomplete gamma.
  // terms may exceed the table range.
  double truncated_sum(FamilyIndex d, std::uint64_t terms) const;

  // n-th weight (2/Gamma(1/4)) n^{-1/2} Gamma(1/4, pi n^2/q), exact incomplete gamma.
  static double term_weight(std::uint64_t modulus, std::uint64_t n);

 private:
  void fill_characters(FamilyIndex d, std::uint64_t terms, std::vector<signed char>& chi) const;

  std::uint64_t max_d_;
  std::uint64_t max_terms_;
  SpfTable spf_;
  std::vector<double> sqrt_;
  std::vector<double> rsqrt_;
  std::shared_ptr<const QuarterGammaTable> table_;
};

std::shared_ptr<const QuarterGammaTable> default_quarter_gamma_table();

LValueRecord central_value_afe(FamilyIndex d, double tol);

struct OracleValue {
  LValueRecord record;
  std::string decimal;  // value rounded to the requested number of decimals
};

// Extended-precision oracle: q^{-1/2} sum_{a=1}^{q} chi(a) zeta(1/2, a/q), Hurwitz zeta
// by Euler-Maclaurin. Requires 8d <= 1e5 and 1 <= digits <= 50.
OracleValue central_value_hurwitz(FamilyIndex d, int digits);

// chi_{8d}(a) for a = 0 .. q-1.
std::vector<int> character_table(FamilyIndex d);

// Records for every odd square-free d in [x_min, x_max], ascending; content does not
// depend on the worker count.
std::vector<LValueRecord> family_sweep(std::uint64_t x_min, std::uint64_t x_max, double tol,
                                       unsigned workers);

// Binary cache: "QLM1", u32 version = 1, u64 count, then count x (u64 d, f64 value,
// f64 abs_error), all little-endian, ascending d.
void cache_store(std::span<const LValueRecord> records, const std::filesystem::path& path);
std::vector<LValueRecord> cache_load(const std::filesystem::path& path);
std::vector<unsigned char> cache_encode(std::span<const LValueRecord> records);
std::vector<LValueRecord> cache_decode(std::span<const unsigned char> bytes);

}  // namespace qdl
