#pragma once

// Family averages over cached central values: character sums, moments, the twisted
// second moment, growth exponents, averaged bounds, Hoelder variant, distributions.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qdl/lvalues.hpp"
#include "qdl/machinery.hpp"

namespace qdl {

// Sorted in-memory view of a cache file.
class FamilyCache {
 public:
  FamilyCache() = default;
  // Records must be strictly ascending in d (StorageError otherwise).
  explicit FamilyCache(std::vector<LValueRecord> records);
  // CoverageError when the file is missing.
  static FamilyCache load(const std::filesystem::path& path);

  std::span<const LValueRecord> records() const noexcept { return records_; }
  std::uint64_t max_d() const noexcept { return records_.empty() ? 0 : records_.back().d.d(); }
  const LValueRecord* find(std::uint64_t d) const noexcept;

  // Maximal runs [first, last] of family members in [lo, hi] without a record.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> missing(std::uint64_t lo,
                                                               std::uint64_t hi) const;
  // Records with lo <= d <= hi; CoverageError listing missing ranges if incomplete.
  std::span<const LValueRecord> slice(std::uint64_t lo, std::uint64_t hi) const;

 private:
  std::vector<LValueRecord> records_;
};

enum class Weighting { Sharp, Smooth };
const char* weighting_name(Weighting w) noexcept;

// Integer d-ranges: sharp 0 < d < X, smooth X/2 < d < 5X/2 (support of Phi(d/X)).
std::pair<std::uint64_t, std::uint64_t> family_range(Weighting w, double X);

struct MomentReport {
  double k = 0.0;
  double X = 0.0;
  Weighting weighting = Weighting::Sharp;
  double value = 0.0;
  std::optional<double> predicted_main;
  std::optional<double> ratio;
  std::uint64_t sample_count = 0;
  std::string label;  // free-form tag for the parameter combination
  std::string note;   // printed alongside, not part of the tabular output
};

inline constexpr double kZeta2 = 1.6449340668482264;  // pi^2 / 6

struct CharSumResult {
  double value = 0.0;
  double main_term = 0.0;
  double error_budget = 0.0;  // c sqrt(n X)
  std::uint64_t sample_count = 0;
};

// sum over odd square-free d of chi_{8d}(n) Phi(d/X), by enumeration. Even n -> DomainError.
CharSumResult smoothed_char_sum(std::uint64_t n, double X, const SmoothingWeight& phi,
                                double budget_constant = 50.0);

// sum |L|^k over the family, sharp or Phi-weighted; predicted_main = X (log X)^{k(k+1)/2}.
MomentReport moment_sum(double k, double X, Weighting weighting, const FamilyCache& cache,
                        const SmoothingWeight& phi, unsigned workers = 1);

// D of the twisted second moment, with truncation bound below 1e-8.
const EulerConstant& twisted_constant();

// d(l1)/sqrt(l1) * l1/(sigma(l1) h(l)), l = l1 l2^2 with l1 square-free.
double twisted_l_factor(std::uint64_t l);
double twisted_main_term(std::uint64_t l, double X, double phi_hat_1);

// sum L^2 chi_{8d}(l) Phi(d/X) against the main term without the O(l) correction.
MomentReport twisted_second_moment(std::uint64_t l, double X, const SmoothingWeight& phi,
                                   const FamilyCache& cache, unsigned workers = 1);

struct GrowthFit {
  std::vector<double> exponents;   // one per consecutive pair of grid points
  std::vector<double> normalized;  // M(X) / (X (log X)^{k(k+1)/2})
  double max_step_variation = 0.0; // max |normalized[i+1]/normalized[i] - 1|
  double stability = 0.0;          // max |exponent - mean exponent|
  std::string note;
};

// Pure fit on supplied data; fewer than 3 points -> DomainError.
GrowthFit growth_exponents(double k, std::span<const double> X, std::span<const double> M);
GrowthFit growth_fit(double k, std::span<const double> X_grid, Weighting weighting,
                     const FamilyCache& cache, const SmoothingWeight& phi, unsigned workers = 1);

enum class BoundKind { BProduct, LAProduct };

// Exact left side of the averaged bound divided by X (log X)^{(nk)^2/2} (BProduct) or
// X (log X)^{((nk)^2+n)/2} (LAProduct).
MomentReport averaged_bound_check(BoundKind which, const MomentParameters& mp,
                                  const ResolvedBlocks& rb, double X, const SmoothingWeight& phi,
                                  const FamilyCache& cache, unsigned workers = 1);

struct HolderReport {
  double S = 0.0;        // sum |L|^{nk} Phi
  double F1 = 0.0;       // sum |L|^n N(d, n(k-1)) Phi
  double F2 = 0.0;       // sum N(d, n(1-k))^{k/(1-k)} Phi
  double bound = 0.0;    // F1^k F2^{1-k}
  bool holds = false;
  // k = 1/m, m <= 4: the (m-1)-fold factorization.
  std::optional<int> m;
  std::vector<double> factors;  // sums before raising to k
  std::optional<double> mfold_bound;
  bool mfold_holds = true;
  std::uint64_t pointwise_checked = 0;
  std::uint64_t pointwise_violations = 0;
  std::string witness;
  std::uint64_t sample_count = 0;
};

// 0 < k < 1 (DomainError otherwise).
HolderReport holder_variant(const MomentParameters& mp, const ResolvedBlocks& rb, double X,
                            const SmoothingWeight& phi, const FamilyCache& cache,
                            unsigned workers = 1);

struct PointwiseSweep {
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  std::string witness;
  std::uint64_t holder_checked = 0;
  std::uint64_t holder_violations = 0;
  std::string holder_witness;
  double min_margin = 0.0;  // min rhs/lhs - 1 over the checked instances with lhs > 0
};

// The pointwise bound and the pointwise Hoelder step for every family member in [lo, hi], d >= 3,
// and every k in ks.
PointwiseSweep pointwise_family_check(std::uint64_t lo, std::uint64_t hi, double n,
                                      std::span<const double> ks, const ResolvedBlocks& rb,
                                      const FamilyCache& cache, unsigned workers = 1);

struct DistributionReport {
  double X = 0.0;
  std::uint64_t sample_count = 0;
  std::uint64_t zero_count = 0;   // |L| within its certified error of 0
  double mean = 0.0;
  double variance = 0.0;
  double sup_normal = 0.0;        // sup |F_true - Normal|
  double proxy_sup_normal = 0.0;  // sup |F_proxy - Normal|
  double proxy_sup_true = 0.0;    // sup |F_proxy - F_true|
  double signed_true_minus_proxy = 0.0;  // extreme signed difference F_true - F_proxy
  double z = 0.0;
  std::vector<double> quantile_levels;
  std::vector<double> quantiles;
  std::vector<double> proxy_quantiles;
  double hist_lo = -4.0, hist_hi = 4.0;
  std::vector<std::uint64_t> histogram;
  std::vector<std::uint64_t> proxy_histogram;
  std::string note;
};

// (log|L| - (1/2) log log d) / sqrt(log log d)
inline double standardize(double log_abs_L, double d) noexcept {
  const double ll = std::log(std::log(d));
  return (log_abs_L - 0.5 * ll) / std::sqrt(ll);
}

// Samples d in (X, 2X]; the proxy replaces log|L| by P(d) + (1/2) log log d with P over p <= z.
DistributionReport distribution_report(double X, const FamilyCache& cache, int bins,
                                       std::optional<HeuristicConfig> cfg = std::nullopt);

// sup_x |F_a(x) - F_b(x)| for two sorted samples.
double ks_two_sample(std::span<const double> a, std::span<const double> b);
// sup_x |F(x) - Normal(x)| for a sorted sample.
double ks_normal(std::span<const double> sorted);

}  // namespace qdl
