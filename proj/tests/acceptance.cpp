// Acceptance run: one PASS/FAIL line per criterion. Builds its own caches under --work-dir.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "qdl/errors.hpp"
#include "qdl/lvalues.hpp"
#include "qdl/machinery.hpp"
#include "qdl/moments.hpp"
#include "qdl/report.hpp"

using namespace qdl;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string g(double v) { return format_double(v); }

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string summary;
};

std::vector<Outcome> outcomes;

void detail(const std::string& s) { std::cout << "    " << s << std::endl; }

void verdict(int id, const std::string& name, bool pass, const std::string& summary) {
  outcomes.push_back({id, name, pass, summary});
  std::cout << (pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << summary << std::endl;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void criterion_elemmas() {
  const auto t0 = Clock::now();
  const ELemmaReport r = verify_e_lemmas(100000, 7);
  const double secs = seconds_since(t0);
  auto line = [](const char* name, const LemmaCheck& c) {
    detail(std::string(name) + ": trials=" + std::to_string(c.trials) + " failures=" + std::to_string(c.failures) +
           (c.witness.empty() ? "" : " witness " + c.witness));
  };
  line("positivity and lower bound", r.positivity_and_lower);
  line("upper bound", r.upper);
  line("two-product bound", r.two_product);
  line("exact reflection", r.reflection);
  const std::uint64_t fails = r.positivity_and_lower.failures + r.upper.failures + r.two_product.failures +
                              r.reflection.failures;
  verdict(1, "truncated-exponential lemmas", r.passed() && secs < 60.0,
          std::to_string(fails) + " violations in 4 x 1e5 trials, " + g(secs) + " s (limit 60 s)");
}

void criterion_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::uint64_t worst_d = 0, n = 0;
  for (FamilyIndex d : sieve_family(500)) {
    const double afe = central_value_afe(d, 1e-9).value;
    const double hur = central_value_hurwitz(d, 20).record.value;
    const double diff = std::fabs(afe - hur);
    if (diff > worst) worst = diff, worst_d = d.d();
    ++n;
  }
  const double secs = seconds_since(t0);
  verdict(2, "theta series against Hurwitz oracle", worst <= 1e-8 && secs < 300.0,
          std::to_string(n) + " values d <= 500, max |diff| = " + g(worst) + " at d = " + std::to_string(worst_d) +
              " (limit 1e-8), " + g(secs) + " s (limit 300 s)");
}

void criterion_charsum(const SmoothingWeight& phi) {
  const double X = 1e5;
  bool ok = true;
  std::ostringstream sum;
  for (std::uint64_t n : {1, 9, 25}) {
    const CharSumResult r = smoothed_char_sum(n, X, phi);
    const double dev = std::fabs(r.value / r.main_term - 1.0);
    ok = ok && dev <= 0.02;
    detail("n=" + std::to_string(n) + " value=" + g(r.value) + " main=" + g(r.main_term) + " |ratio-1|=" + g(dev));
    sum << "n=" << n << " |ratio-1|=" << std::setprecision(3) << dev << "; ";
  }
  for (std::uint64_t n : {15, 21}) {
    const CharSumResult r = smoothed_char_sum(n, X, phi);
    const double frac = std::fabs(r.value) / r.error_budget;
    ok = ok && frac <= 1.0;
    detail("n=" + std::to_string(n) + " value=" + g(r.value) + " budget 50 sqrt(nX)=" + g(r.error_budget));
    sum << "n=" << n << " |value|/budget=" << std::setprecision(3) << frac << "; ";
  }
  verdict(3, "smoothed character sums at X = 1e5", ok, sum.str() + "limits 0.02 and 1");
}

void criterion_pointwise(const FamilyCache& cache, unsigned threads) {
  const ResolvedBlocks rb = resolve_blocks(custom_blocks({20, 8, 4}, {50, 500, 5000}));
  const std::vector<double> ks{0.0, 0.25, 0.5, 0.75, 1.0};
  const PointwiseSweep s = pointwise_family_check(100001, 200000, 2.0, ks, rb, cache, threads);
  if (!s.witness.empty()) detail("witness: " + s.witness);
  if (!s.holder_witness.empty()) detail("holder witness: " + s.holder_witness);
  detail("min relative margin rhs/lhs - 1 = " + g(s.min_margin));
  verdict(4, "pointwise bound and Hoelder step on (1e5, 2e5]", s.violations == 0 && s.holder_violations == 0 && s.checked > 0,
          std::to_string(s.checked) + " (d, k) pairs, " + std::to_string(s.violations) + " + " +
              std::to_string(s.holder_violations) + " violations, n = 2, k in {0, 1/4, 1/2, 3/4, 1}, ells [20, 8, 4]");
}

void criterion_expansion() {
  struct Config {
    std::vector<int> ells;
    std::vector<double> bounds;
  };
  const std::vector<Config> configs{{{4}, {30}}, {{6, 2}, {20, 200}}, {{8, 4}, {12, 60}}};
  const MomentParameters mp = MomentParameters::make(2.0, 0.5);
  const std::vector<FamilyIndex> family = sieve_family(1'000'000);
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  std::size_t series_count = 0;
  bool ok = true;
  for (const Config& cfg : configs) {
    const ResolvedBlocks rb = resolve_blocks(custom_blocks(cfg.ells, cfg.bounds));
    std::vector<FamilyIndex> sample;
    for (int i = 0; i < 100; ++i) sample.push_back(family[rng() % family.size()]);
    for (std::size_t j = 0; j < rb.R(); ++j) {
      for (ExpansionKind kind : {ExpansionKind::B, ExpansionKind::PPower}) {
        const SparseSeries s = dirichlet_expansion(kind, mp, rb, j);
        double local = 0.0;
        for (FamilyIndex d : sample) {
          const double P = prime_block_sum(d, rb.primes[j]);
          const double direct = kind == ExpansionKind::B ? truncated_exp(rb.ells[j], mp.alpha_B() * P)
                                                         : std::pow(P, rb.ells[j]) / std::tgamma(rb.ells[j] + 1.0);
          const double rel = std::fabs(evaluate_series(s, d) - direct) / std::fabs(direct);
          if (!(rel <= local)) local = rel;
        }
        ok = ok && local <= 1e-10;
        worst = std::max(worst, local);
        ++series_count;
        std::string name = "ells [";
        for (std::size_t i = 0; i < cfg.ells.size(); ++i) name += (i ? "," : "") + std::to_string(cfg.ells[i]);
        detail(name + "] block " + std::to_string(j + 1) +
               (kind == ExpansionKind::B ? " B" : " P^l/l!") + ": support " + std::to_string(s.size()) +
               ", max rel error " + g(local));
      }
    }
  }
  verdict(5, "sparse Dirichlet expansions", ok,
          std::to_string(series_count) + " series over 3 block configurations x 100 d, max rel error " + g(worst) +
              " (limit 1e-10)");
}

void criterion_twisted(const FamilyCache& cache, const SmoothingWeight& phi, unsigned threads) {
  const MomentReport a1 = twisted_second_moment(1, 1e6, phi, cache, threads);
  const MomentReport a3 = twisted_second_moment(3, 1e6, phi, cache, threads);
  const MomentReport b1 = twisted_second_moment(1, 1e5, phi, cache, threads);
  for (const MomentReport* r : {&b1, &a1, &a3}) {
    detail("X=" + g(r->X) + " " + r->label + " value=" + g(r->value) + " main=" + g(*r->predicted_main) +
           " ratio=" + g(*r->ratio));
  }
  const double r6 = *a1.ratio, r5 = *b1.ratio;
  const double lrel = *a3.ratio / *a1.ratio;
  const bool in_band = r6 >= 0.6 && r6 <= 1.4;
  const bool improving = std::fabs(r6 - 1.0) < std::fabs(r5 - 1.0);
  const bool lfactor = std::fabs(lrel - 1.0) <= 0.25;
  detail(std::string("ratio(l=1, 1e6) in [0.6, 1.4]: ") + (in_band ? "yes" : "no"));
  detail(std::string("|ratio(1e6) - 1| < |ratio(1e5) - 1|: ") + (improving ? "yes" : "no"));
  detail("value(l=3)/value(l=1) = " + g(a3.value / a1.value) + ", predicted " +
         g(*a3.predicted_main / *a1.predicted_main) + " (l-factor " + g(twisted_l_factor(3)) + ")");
  detail("note: " + a1.note);
  std::ostringstream s;
  s << std::setprecision(4) << "ratio(l=1) = " << r6 << " at 1e6, " << r5 << " at 1e5; ratio(3)/ratio(1) = " << lrel;
  verdict(6, "twisted second moment", in_band && improving && lfactor, s.str());
}

void criterion_growth(const FamilyCache& cache, const SmoothingWeight& phi, unsigned threads) {
  std::vector<double> grid;
  for (int e = 14; e <= 20; ++e) grid.push_back(std::ldexp(1.0, e));
  bool ok = true;
  std::ostringstream s;
  for (double k : {1.0, 2.0, 3.0}) {
    const GrowthFit f = growth_fit(k, grid, Weighting::Sharp, cache, phi, threads);
    std::ostringstream e;
    for (double x : f.exponents) e << ' ' << std::setprecision(4) << x;
    detail("k=" + g(k) + " local exponents" + e.str() + " (predicted " + g(k * (k + 1) / 2) +
           "), max step variation " + g(f.max_step_variation));
    if (k < 3.0) {
      ok = ok && f.max_step_variation < 0.2;
      s << "k=" << k << " variation " << std::setprecision(3) << f.max_step_variation << "; ";
    } else {
      s << "k=3 variation " << std::setprecision(3) << f.max_step_variation << " (reported only); ";
    }
  }
  detail("note: log log X spans under 0.4 on this grid; exponents are not expected to reach k(k+1)/2");
  verdict(7, "moment growth over 2^14..2^20", ok, s.str() + "limit 0.2");
}

void criterion_distribution(const FamilyCache& cache) {
  const DistributionReport r = distribution_report(1e6, cache, 40);
  detail("samples=" + std::to_string(r.sample_count) + " zero=" + std::to_string(r.zero_count) + " z=" + g(r.z));
  detail("standardized mean=" + g(r.mean) + " variance=" + g(r.variance));
  detail("sup |F - Normal| = " + g(r.sup_normal) + ", proxy sup |F - Normal| = " + g(r.proxy_sup_normal));
  detail("sup |F_proxy - F| = " + g(r.proxy_sup_true) + ", signed extreme F - F_proxy = " + g(r.signed_true_minus_proxy));
  for (double z : {20.0, 100.0, 1000.0}) {
    const DistributionReport alt = distribution_report(1e6, cache, 40, HeuristicConfig{z});
    detail("alternative cutoff z=" + g(z) + ": sup |F_proxy - F| = " + g(alt.proxy_sup_true));
  }
  detail("note: " + r.note);
  std::ostringstream s;
  s << std::setprecision(4) << "sup to normal " << r.sup_normal << " (limit 0.15), proxy to true " << r.proxy_sup_true
    << " (limit 0.10)";
  verdict(8, "distribution of log|L| on (1e6, 2e6]", r.sup_normal <= 0.15 && r.proxy_sup_true <= 0.10, s.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance run"};
  std::string work = "acceptance_work";
  bool strict = false;
  app.add_option("--work-dir", work, "directory for caches");
  app.add_flag("--strict", strict, "exit 1 if any criterion fails");
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(work);
    const unsigned threads = std::max(1U, std::thread::hardware_concurrency());
    std::cout << "hardware threads: " << threads << std::endl;
    const SmoothingWeight phi = SmoothingWeight::make();

    // Sweep first: later criteria read the cache.
    const fs::path main_cache = fs::path(work) / "family.qlm";
    const fs::path check_cache = fs::path(work) / "family_check.qlm";
    auto t0 = Clock::now();
    const std::vector<LValueRecord> recs = family_sweep(1, 1'000'000, 1e-9, threads);
    const double sweep_secs = seconds_since(t0);
    cache_store(recs, main_cache);
    t0 = Clock::now();
    const std::vector<LValueRecord> reloaded = cache_load(main_cache);
    const double reload_secs = seconds_since(t0);
    const unsigned other = threads == 1 ? 3 : 1;
    cache_store(family_sweep(1, 1'000'000, 1e-9, other), check_cache);
    const bool identical = file_bytes(main_cache) == file_bytes(check_cache) && reloaded.size() == recs.size();
    fs::remove(check_cache);

    std::vector<LValueRecord> all = reloaded;
    const std::vector<LValueRecord> upper = family_sweep(1'000'001, 2'500'000, 1e-9, threads);
    all.insert(all.end(), upper.begin(), upper.end());
    const FamilyCache cache(std::move(all));

    criterion_elemmas();
    criterion_oracle();
    criterion_charsum(phi);
    criterion_pointwise(cache, threads);
    criterion_expansion();
    criterion_twisted(cache, phi, threads);
    criterion_growth(cache, phi, threads);
    criterion_distribution(cache);

    detail("records d <= 1e6: " + std::to_string(recs.size()) + ", worker counts " + std::to_string(threads) +
           " and " + std::to_string(other) + " give " + (identical ? "byte-identical" : "DIFFERENT") + " cache files");
    if (threads < 8) detail("note: run on " + std::to_string(threads) + " hardware threads, not 8");
    std::ostringstream s;
    s << std::setprecision(4) << "sweep " << sweep_secs << " s (limit 1800 s), reload " << reload_secs
      << " s (limit 5 s), re-run " << (identical ? "bit-identical" : "differs");
    verdict(9, "sweep performance and determinism", sweep_secs <= 1800.0 && reload_secs <= 5.0 && identical, s.str());
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }

  std::size_t passed = 0;
  std::string failed;
  for (const Outcome& o : outcomes) {
    passed += o.pass;
    if (!o.pass) failed += " " + std::to_string(o.id);
  }
  std::cout << passed << " of " << outcomes.size() << " criteria pass";
  if (!failed.empty()) std::cout << "; failing:" << failed;
  std::cout << std::endl;
  return strict && passed != outcomes.size() ? 1 : 0;
}
