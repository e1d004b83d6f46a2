#include "qdl/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdl/errors.hpp"
#include "qdl/lvalues.hpp"
#include "qdl/machinery.hpp"
#include "qdl/moments.hpp"
#include "qdl/report.hpp"

namespace qdl {

namespace {

using ojson = nlohmann::ordered_json;

// Options of one subcommand; each writes into RunConfig only when given.
class FlagSet {
 public:
  explicit FlagSet(CLI::App* app) : app_(app) {}

  template <class T, class Set>
  CLI::Option* add(const std::string& name, const std::string& help, Set set) {
    auto holder = std::make_shared<T>();
    CLI::Option* o = app_->add_option(name, *holder, help);
    setters_.push_back([o, holder, set](RunConfig& c) {
      if (o->count() > 0) set(c, *holder);
    });
    return o;
  }

  void apply(RunConfig& c) const {
    for (const auto& s : setters_) s(c);
  }

  CLI::App* app() const noexcept { return app_; }
  std::string config_file;

 private:
  CLI::App* app_;
  std::vector<std::function<void(RunConfig&)>> setters_;
};

void add_common(FlagSet& f) {
  f.app()->add_option("--config", f.config_file, "config file (key = value lines)");
  f.add<std::string>("--cache", "cache file path", [](RunConfig& c, const std::string& v) { c.cache_path = v; });
  f.add<unsigned>("--threads", "worker threads", [](RunConfig& c, unsigned v) { c.threads = v; })
      ->check(CLI::PositiveNumber);
  f.add<std::string>("--out", "csv or json", [](RunConfig& c, const std::string& v) {
     c.out = v == "json" ? OutputFormat::Json : OutputFormat::Csv;
   })->check(CLI::IsMember({"csv", "json"}));
}

void add_scale(FlagSet& f) {
  f.add<double>("--X", "family scale X", [](RunConfig& c, double v) { c.X = v; })->check(CLI::PositiveNumber);
  f.add<std::vector<double>>("--x-grid", "comma-separated X grid",
                             [](RunConfig& c, const std::vector<double>& v) { c.x_grid = v; })
      ->delimiter(',');
}

void add_blocks(FlagSet& f) {
  f.add<std::string>("--mode", "paper or custom", [](RunConfig& c, const std::string& v) { c.mode = v; })
      ->check(CLI::IsMember({"paper", "custom"}));
  f.add<std::vector<int>>("--ells", "comma-separated even block degrees",
                          [](RunConfig& c, const std::vector<int>& v) { c.ells = v; })
      ->delimiter(',');
  f.add<std::vector<double>>("--boundaries", "comma-separated block upper ends",
                             [](RunConfig& c, const std::vector<double>& v) { c.boundaries = v; })
      ->delimiter(',');
  f.add<double>("--c", "recurrence constant (paper mode)", [](RunConfig& c, double v) { c.c = v; });
  f.add<double>("--tail-threshold", "threshold for ell_R", [](RunConfig& c, double v) { c.tail_threshold = v; });
  f.add<double>("--log-X", "log X for paper-mode blocks beyond double range",
                [](RunConfig& c, double v) { c.log_X = v; });
}

void add_moment_params(FlagSet& f) {
  f.add<std::vector<double>>("--k", "comma-separated k values",
                             [](RunConfig& c, const std::vector<double>& v) { c.ks = v; })
      ->delimiter(',');
  f.add<double>("--n", "outer exponent n", [](RunConfig& c, double v) { c.n = v; })->check(CLI::PositiveNumber);
}

void add_seed(FlagSet& f) {
  f.add<std::uint64_t>("--seed", "random seed", [](RunConfig& c, std::uint64_t v) { c.seed = v; });
  f.add<std::uint64_t>("--trials", "number of random trials", [](RunConfig& c, std::uint64_t v) { c.trials = v; });
}

void add_tol(FlagSet& f) {
  f.add<double>("--tol", "per-value tolerance", [](RunConfig& c, double v) { c.tol = v; });
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> grid_of(const RunConfig& c) { return c.x_grid.empty() ? std::vector<double>{c.X} : c.x_grid; }

BlockStructure build_blocks(const RunConfig& c) {
  if (c.mode == "paper") {
    return ell_sequence_log(c.log_X.value_or(std::log(c.X)), c.c, c.tail_threshold);
  }
  return custom_blocks(c.ells, c.boundaries, c.tail_threshold);
}

ResolvedBlocks require_blocks(const RunConfig& c) {
  const BlockStructure bs = build_blocks(c);
  if (bs.R() == 0) throw ConfigError("block structure has R = 0 (" + bs.explanation + ")");
  return resolve_blocks(bs);
}

SmoothingWeight weight_of(const RunConfig& c) { return SmoothingWeight::make(WeightKind::Canonical, c.quad_tol); }

void emit_reports(const RunConfig& c, const std::vector<MomentReport>& reps, std::ostream& out,
                  std::ostream& err) {
  out << (c.out == OutputFormat::Json ? reports_json(reps) : reports_csv(reps));
  std::vector<std::string> notes;
  for (const auto& r : reps) {
    if (!r.note.empty() && std::find(notes.begin(), notes.end(), r.note) == notes.end()) notes.push_back(r.note);
  }
  for (const auto& n : notes) err << "note: " << n << '\n';
}

// ---------------------------------------------------------------------------

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  const auto hi = static_cast<std::uint64_t>(std::floor(c.X));
  const std::uint64_t lo = std::max<std::uint64_t>(c.x_min, 1);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<LValueRecord> fresh = family_sweep(lo, hi, c.tol, c.threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<LValueRecord> merged;
  if (std::filesystem::exists(c.cache_path)) {
    for (const LValueRecord& r : cache_load(c.cache_path)) {
      if (r.d.d() < lo || r.d.d() > hi) merged.push_back(r);
    }
  }
  const std::size_t swept = fresh.size();
  merged.insert(merged.end(), fresh.begin(), fresh.end());
  std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.d < b.d; });
  if (c.cache_path.has_parent_path()) std::filesystem::create_directories(c.cache_path.parent_path());
  cache_store(merged, c.cache_path);
  out << "swept " << swept << " values for d in [" << lo << ", " << hi << "] in " << format_double(secs)
      << " s; cache " << c.cache_path.string() << " holds " << merged.size() << " records\n";
  return 0;
}

int cmd_elemmas(const RunConfig& c, std::ostream& out) {
  const ELemmaReport rep = verify_e_lemmas(c.trials, c.seed);
  auto line = [&](const char* name, const LemmaCheck& l) {
    out << name << ": trials=" << l.trials << " failures=" << l.failures;
    if (l.failures > 0) out << " witness: " << l.witness;
    out << '\n';
  };
  line("positivity_and_lower", rep.positivity_and_lower);
  line("upper", rep.upper);
  line("two_product", rep.two_product);
  line("reflection", rep.reflection);
  out << (rep.passed() ? "PASS" : "FAIL") << '\n';
  return rep.passed() ? 0 : 1;
}

int cmd_charsum(const RunConfig& c, std::ostream& out) {
  const SmoothingWeight phi = weight_of(c);
  bool ok = true;
  out << "n,value,main_term,ratio,error_budget,budget_ratio,status\n";
  for (std::uint64_t n : {1ULL, 9ULL, 25ULL, 15ULL, 21ULL}) {
    const CharSumResult r = smoothed_char_sum(n, c.X, phi, c.charsum_constant);
    bool pass;
    std::string ratio;
    if (r.main_term != 0.0) {
      ratio = format_double(r.value / r.main_term);
      pass = std::fabs(r.value / r.main_term - 1.0) <= 0.02;
    } else {
      pass = std::fabs(r.value) <= r.error_budget;
    }
    ok = ok && pass;
    out << n << ',' << format_double(r.value) << ',' << format_double(r.main_term) << ',' << ratio << ','
        << format_double(r.error_budget) << ',' << format_double(std::fabs(r.value) / r.error_budget) << ','
        << (pass ? "pass" : "FAIL") << '\n';
  }
  return ok ? 0 : 1;
}

int cmd_pointwise(const RunConfig& c, std::ostream& out) {
  const ResolvedBlocks rb = require_blocks(c);
  const FamilyCache cache = FamilyCache::load(c.cache_path);
  const auto hi = static_cast<std::uint64_t>(std::floor(c.X));
  const PointwiseSweep s = pointwise_family_check(c.x_min, hi, c.n, c.ks, rb, cache, c.threads);
  out << "pointwise_bound: checked=" << s.checked << " violations=" << s.violations
      << " min_margin=" << format_double(s.min_margin) << '\n';
  if (s.violations) out << "witness: " << s.witness << '\n';
  out << "holder_step: checked=" << s.holder_checked << " violations=" << s.holder_violations << '\n';
  if (s.holder_violations) out << "witness: " << s.holder_witness << '\n';
  const bool ok = s.violations == 0 && s.holder_violations == 0;
  out << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

int cmd_expansion(const RunConfig& c, std::ostream& out) {
  const ResolvedBlocks rb = require_blocks(c);
  const MomentParameters mp = MomentParameters::make(c.n, c.ks.front());
  std::mt19937_64 rng(c.seed);
  const std::vector<FamilyIndex> family = sieve_family(1'000'000);
  std::vector<FamilyIndex> sample;
  const std::uint64_t count = std::min<std::uint64_t>(c.trials, 100);
  std::uniform_int_distribution<std::size_t> pick(0, family.size() - 1);
  for (std::uint64_t i = 0; i < count; ++i) sample.push_back(family[pick(rng)]);
  std::size_t verified = 0;
  bool ok = true;
  for (std::size_t j = 0; j < rb.R(); ++j) {
    for (ExpansionKind kind : {ExpansionKind::B, ExpansionKind::PPower}) {
      const char* kname = kind == ExpansionKind::B ? "B" : "P^l/l!";
      SparseSeries series;
      try {
        series = dirichlet_expansion(kind, mp, rb, j);
      } catch (const ResourceError& e) {
        out << "block " << j + 1 << " " << kname << ": skipped (" << e.what() << ")\n";
        continue;
      }
      double worst = 0.0;
      std::string witness;
      for (FamilyIndex d : sample) {
        const double P = prime_block_sum(d, rb.primes[j]);
        double direct;
        if (kind == ExpansionKind::B) {
          direct = truncated_exp(rb.ells[j], mp.alpha_B() * P);
        } else {
          direct = std::pow(P, rb.ells[j]) / std::tgamma(rb.ells[j] + 1.0);
        }
        const double via = evaluate_series(series, d);
        const double rel = std::fabs(via - direct) / std::fabs(direct);
        if (!(rel <= worst)) {
          worst = rel;
          witness = "d=" + std::to_string(d.d()) + " direct=" + format_double(direct) +
                    " series=" + format_double(via);
        }
      }
      const bool pass = worst <= 1e-10;
      ok = ok && pass;
      ++verified;
      out << "block " << j + 1 << " " << kname << ": support=" << series.size()
          << " max_rel_error=" << format_double(worst) << (pass ? " pass" : " FAIL") << '\n';
      if (!pass) out << "witness: " << witness << '\n';
    }
  }
  if (verified == 0) {
    out << "FAIL: no block small enough to expand\n";
    return 1;
  }
  out << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

int cmd_holder(const RunConfig& c, std::ostream& out) {
  const ResolvedBlocks rb = require_blocks(c);
  const FamilyCache cache = FamilyCache::load(c.cache_path);
  const SmoothingWeight phi = weight_of(c);
  bool ok = true;
  for (double k : c.ks) {
    const HolderReport h = holder_variant(MomentParameters::make(c.n, k), rb, c.X, phi, cache, c.threads);
    out << "k=" << format_double(k) << " S=" << format_double(h.S) << " F1=" << format_double(h.F1)
        << " F2=" << format_double(h.F2) << " bound=" << format_double(h.bound)
        << (h.holds ? " holds" : " VIOLATED") << '\n';
    if (h.m) {
      out << "  m=" << *h.m << " mfold_bound=" << format_double(*h.mfold_bound)
          << (h.mfold_holds ? " holds" : " VIOLATED") << '\n';
    }
    out << "  pointwise: checked=" << h.pointwise_checked << " violations=" << h.pointwise_violations
        << '\n';
    if (h.pointwise_violations) out << "  witness: " << h.witness << '\n';
    if (!h.holds) {
      out << "  witness: S=" << format_double(h.S) << " > F1^k F2^(1-k)=" << format_double(h.bound) << '\n';
    }
    ok = ok && h.holds && h.mfold_holds && h.pointwise_violations == 0;
  }
  out << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

int cmd_moments(const RunConfig& c, Weighting w, std::ostream& out, std::ostream& err) {
  const FamilyCache cache = FamilyCache::load(c.cache_path);
  const SmoothingWeight phi = weight_of(c);
  const std::vector<double> grid = grid_of(c);
  std::vector<MomentReport> reps;
  for (double k : c.ks) {
    std::vector<double> M;
    for (double X : grid) {
      reps.push_back(moment_sum(k, X, w, cache, phi, c.threads));
      M.push_back(reps.back().value);
    }
    if (grid.size() >= 3 && std::all_of(M.begin(), M.end(), [](double v) { return v > 0.0; })) {
      const GrowthFit g = growth_exponents(k, grid, M);
      err << "growth k=" << format_double(k) << " exponents:";
      for (double e : g.exponents) err << ' ' << format_double(e);
      err << " (predicted " << format_double(k * (k + 1) / 2) << ") max_step_variation="
          << format_double(g.max_step_variation) << '\n';
      err << "note: " << g.note << '\n';
    }
  }
  emit_reports(c, reps, out, err);
  return 0;
}

int cmd_twisted(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const FamilyCache cache = FamilyCache::load(c.cache_path);
  const SmoothingWeight phi = weight_of(c);
  std::vector<MomentReport> reps;
  for (std::uint64_t l : c.ls) {
    for (double X : grid_of(c)) reps.push_back(twisted_second_moment(l, X, phi, cache, c.threads));
  }
  emit_reports(c, reps, out, err);
  return 0;
}

int cmd_bounds(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const ResolvedBlocks rb = require_blocks(c);
  const FamilyCache cache = FamilyCache::load(c.cache_path);
  const SmoothingWeight phi = weight_of(c);
  std::vector<MomentReport> reps;
  for (double k : c.ks) {
    const MomentParameters mp = MomentParameters::make(c.n, k);
    for (double X : grid_of(c)) {
      reps.push_back(averaged_bound_check(BoundKind::BProduct, mp, rb, X, phi, cache, c.threads));
      reps.push_back(averaged_bound_check(BoundKind::LAProduct, mp, rb, X, phi, cache, c.threads));
    }
  }
  emit_reports(c, reps, out, err);
  return 0;
}

int cmd_distribution(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const FamilyCache cache = FamilyCache::load(c.cache_path);
  std::optional<HeuristicConfig> hc;
  if (c.z) hc = HeuristicConfig{*c.z};
  const DistributionReport r = distribution_report(c.X, cache, c.bins, hc);
  ojson j;
  j["X"] = r.X;
  j["z"] = r.z;
  j["sample_count"] = r.sample_count;
  j["zero_count"] = r.zero_count;
  j["mean"] = r.mean;
  j["variance"] = r.variance;
  j["sup_normal"] = r.sup_normal;
  j["proxy_sup_normal"] = r.proxy_sup_normal;
  j["proxy_sup_true"] = r.proxy_sup_true;
  j["signed_true_minus_proxy"] = r.signed_true_minus_proxy;
  j["quantile_levels"] = r.quantile_levels;
  j["quantiles"] = r.quantiles;
  j["proxy_quantiles"] = r.proxy_quantiles;
  j["hist_lo"] = r.hist_lo;
  j["hist_hi"] = r.hist_hi;
  j["histogram"] = r.histogram;
  j["proxy_histogram"] = r.proxy_histogram;
  if (c.out == OutputFormat::Json) {
    out << j.dump(2) << '\n';
  } else {
    out << "field,value\n";
    for (const char* key : {"X", "z", "sample_count", "zero_count", "mean", "variance", "sup_normal",
                            "proxy_sup_normal", "proxy_sup_true", "signed_true_minus_proxy"}) {
      const auto& v = j[key];
      out << key << ',' << (v.is_number_float() ? format_double(v.get<double>()) : v.dump()) << '\n';
    }
    for (std::size_t i = 0; i < r.quantile_levels.size(); ++i) {
      out << "quantile_" << format_double(r.quantile_levels[i]) << ',' << format_double(r.quantiles[i]) << '\n';
      out << "proxy_quantile_" << format_double(r.quantile_levels[i]) << ','
          << format_double(r.proxy_quantiles[i]) << '\n';
    }
  }
  err << "note: " << r.note << '\n';
  return 0;
}

int cmd_blocks(const RunConfig& c, std::ostream& out) {
  const BlockStructure bs = build_blocks(c);
  ojson j;
  j["mode"] = bs.mode == BlockMode::Paper ? "paper" : "custom";
  if (bs.mode == BlockMode::Paper) {
    j["log_X"] = bs.log_X;
    j["c"] = bs.c;
    j["generated"] = bs.generated;
  }
  j["tail_threshold"] = bs.tail_threshold;
  j["R"] = bs.R();
  j["ells"] = bs.ells;
  ojson blocks = ojson::array();
  for (const PrimeBlock& b : bs.blocks) blocks.push_back({b.lower, b.upper});
  j["blocks"] = blocks;
  j["monotone_decreasing"] = bs.flags.monotone_decreasing;
  j["square_gap"] = bs.flags.square_gap;
  j["tail_condition"] = bs.flags.tail_condition;
  j["explanation"] = bs.explanation;
  if (c.out == OutputFormat::Json) {
    out << j.dump(2) << '\n';
    return 0;
  }
  out << "mode = " << j["mode"].get<std::string>() << '\n';
  if (bs.mode == BlockMode::Paper) {
    out << "log X = " << format_double(bs.log_X) << '\n';
    out << "ell_1 = " << bs.generated.front() << '\n';
    out << "generated =";
    for (int e : bs.generated) out << ' ' << e;
    out << '\n';
  }
  out << "R = " << bs.R() << '\n';
  for (std::size_t i = 0; i < bs.R(); ++i) {
    out << "block " << i + 1 << ": ell = " << bs.ells[i] << ", primes in (" << format_double(bs.blocks[i].lower)
        << ", " << format_double(bs.blocks[i].upper) << "]\n";
  }
  out << "monotone_decreasing = " << (bs.flags.monotone_decreasing ? "true" : "false") << '\n';
  out << "square_gap = " << (bs.flags.square_gap ? "true" : "false") << '\n';
  out << "tail_condition = " << (bs.flags.tail_condition ? "true" : "false") << '\n';
  out << "explanation = " << bs.explanation << '\n';
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qdl: central values of quadratic Dirichlet L-functions and moment-bound checks", "qdl"};
  app.require_subcommand(1);
  std::vector<std::pair<CLI::App*, std::unique_ptr<FlagSet>>> leaves;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help) -> FlagSet& {
    CLI::App* sub = parent->add_subcommand(name, help);
    leaves.emplace_back(sub, std::make_unique<FlagSet>(sub));
    add_common(*leaves.back().second);
    return *leaves.back().second;
  };

  FlagSet& sweep = leaf(&app, "sweep", "compute L-values for d in [x-min, X] and merge them into the cache");
  add_scale(sweep);
  add_tol(sweep);
  sweep.add<std::uint64_t>("--x-min", "smallest d", [](RunConfig& c, std::uint64_t v) { c.x_min = v; });

  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  verify->require_subcommand(1);
  FlagSet& elemmas = leaf(verify, "elemmas", "randomized truncated-exponential inequalities");
  add_seed(elemmas);
  FlagSet& charsum = leaf(verify, "charsum", "smoothed quadratic character sums against their main terms");
  add_scale(charsum);
  FlagSet& pointwise = leaf(verify, "pointwise", "pointwise bound and Hoelder step over cached d in [x-min, X]");
  add_scale(pointwise);
  add_blocks(pointwise);
  add_moment_params(pointwise);
  pointwise.add<std::uint64_t>("--x-min", "smallest d", [](RunConfig& c, std::uint64_t v) { c.x_min = v; });
  FlagSet& expansion = leaf(verify, "expansion", "sparse Dirichlet expansions of the block polynomials");
  add_blocks(expansion);
  add_moment_params(expansion);
  add_seed(expansion);
  FlagSet& holder = leaf(verify, "holder", "averaged Hoelder variant");
  add_scale(holder);
  add_blocks(holder);
  add_moment_params(holder);

  FlagSet& moments = leaf(&app, "moments", "family moments sum |L|^k");
  add_scale(moments);
  add_moment_params(moments);
  std::string weighting = "sharp";
  moments.app()->add_option("--weighting", weighting, "sharp or smooth")->check(CLI::IsMember({"sharp", "smooth"}));
  FlagSet& twisted = leaf(&app, "twisted", "twisted second moment against its main term");
  add_scale(twisted);
  twisted.add<std::vector<std::uint64_t>>("--l", "comma-separated odd twists",
                                          [](RunConfig& c, const std::vector<std::uint64_t>& v) { c.ls = v; })
      ->delimiter(',');
  FlagSet& bounds = leaf(&app, "bounds", "averaged right sides of the block bounds");
  add_scale(bounds);
  add_blocks(bounds);
  add_moment_params(bounds);
  FlagSet& distribution = leaf(&app, "distribution", "standardized log|L| against the normal law and the proxy");
  add_scale(distribution);
  distribution.add<int>("--bins", "histogram bins", [](RunConfig& c, int v) { c.bins = v; });
  distribution.add<double>("--z", "proxy prime cutoff", [](RunConfig& c, double v) { c.z = v; });
  FlagSet& blocks = leaf(&app, "blocks", "print the block structure and its flags");
  add_scale(blocks);
  add_blocks(blocks);

  if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
    const bool top = app.get_subcommand_no_throw(args[0]) != nullptr;
    const bool nested = !top || args[0] != "verify" || args.size() < 2 || args[1].empty() ||
                        args[1][0] == '-' || verify->get_subcommand_no_throw(args[1]) != nullptr;
    if (!top || !nested) {
      err << "error: unknown subcommand '" << (top ? "verify " + args[1] : args[0]) << "'\n\n"
          << app.help("", CLI::AppFormatMode::All);
      return 2;
    }
  }

  std::vector<const char*> argv{"qdl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const FlagSet* chosen = nullptr;
  for (const auto& [sub, fs] : leaves) {
    if (sub->parsed()) chosen = fs.get();
  }
  if (chosen == nullptr) {
    err << app.help();
    return 2;
  }
  try {
    RunConfig cfg = default_config();
    if (!chosen->config_file.empty()) cfg = parse_config(read_file(chosen->config_file), cfg);
    if (auto env = cache_path_from_env()) cfg.cache_path = *env;
    chosen->apply(cfg);

    CLI::App* sub = chosen->app();
    const std::string name = sub->get_name();
    if (name == "sweep") return cmd_sweep(cfg, out);
    if (name == "elemmas") return cmd_elemmas(cfg, out);
    if (name == "charsum") return cmd_charsum(cfg, out);
    if (name == "pointwise") return cmd_pointwise(cfg, out);
    if (name == "expansion") return cmd_expansion(cfg, out);
    if (name == "holder") return cmd_holder(cfg, out);
    if (name == "moments") {
      return cmd_moments(cfg, weighting == "smooth" ? Weighting::Smooth : Weighting::Sharp, out, err);
    }
    if (name == "twisted") return cmd_twisted(cfg, out, err);
    if (name == "bounds") return cmd_bounds(cfg, out, err);
    if (name == "distribution") return cmd_distribution(cfg, out, err);
    if (name == "blocks") return cmd_blocks(cfg, out);
    err << app.help();
    return 2;
  } catch (const CoverageError& e) {
    err << "coverage error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace qdl
