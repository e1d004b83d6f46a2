#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include <mpfr.h>

#include "qdl/errors.hpp"
#include "qdl/lvalues.hpp"

using namespace qdl;

namespace {

double gamma_inc_mpfr(double a, double x) {
  mpfr_t ra, rx, r;
  mpfr_inits2(200, ra, rx, r, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(ra, a, MPFR_RNDN);
  mpfr_set_d(rx, x, MPFR_RNDN);
  mpfr_gamma_inc(r, ra, rx, MPFR_RNDN);
  const double out = mpfr_get_d(r, MPFR_RNDN);
  mpfr_clears(ra, rx, r, static_cast<mpfr_ptr>(nullptr));
  return out;
}

// composite Simpson on [a, b]
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "qdl_test_lvalues";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("incomplete gamma against MPFR") {
  for (double a : {0.25, 0.5, 0.75}) {
    for (double x = 0.0; x <= 60.0; x += 0.0625) {
      const double want = gamma_inc_mpfr(a, x);
      const double got = upper_incomplete_gamma(a, x);
      REQUIRE_MESSAGE(std::fabs(got - want) <= 1e-13 * want, "a=" << a << " x=" << x);
    }
  }
}

TEST_CASE("quarter gamma table stays inside its certified error") {
  const QuarterGammaTable table;
  CHECK(table.error_bound() < 1e-11);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, table.u_max());
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double v = u(rng);
    const double err = std::fabs(table(v) - gamma_inc_mpfr(0.25, std::pow(v, 4)));
    worst = std::max(worst, err);
  }
  CHECK(worst <= table.error_bound());
}

TEST_CASE("smoothing weight") {
  const SmoothingWeight phi = SmoothingWeight::make();
  CHECK(phi(1.5) == 1.0);
  CHECK(phi(0.4) == 0.0);
  CHECK(phi(2.6) == 0.0);
  CHECK(phi.mellin_at_1() == doctest::Approx(1.5).epsilon(1e-10));
  for (double t = 0.0; t <= 1.0; t += 0.01) {
    CHECK(SmoothingWeight::ramp(t) + SmoothingWeight::ramp(1.0 - t) == doctest::Approx(1.0).epsilon(1e-15));
  }
  for (double x = 0.0; x <= 3.0; x += 0.001) {
    REQUIRE(phi(x) >= 0.0);
    REQUIRE(phi(x) <= 1.0);
  }
  for (double s : {0.5, 2.0, 3.0}) {
    const auto f = [&](double x) { return phi(x) * std::pow(x, s - 1.0); };
    const double want = simpson(f, 0.5, 2.5, 200000);
    CHECK(phi.mellin(s) == doctest::Approx(want).epsilon(1e-9));
  }
  CHECK_THROWS_AS(SmoothingWeight::make(WeightKind::Canonical, 0.0), DomainError);
  CHECK_THROWS_AS(SmoothingWeight::make(WeightKind::Canonical, 1e-5), DomainError);
}

TEST_CASE("character table") {
  for (std::uint64_t d : {1, 3, 5, 15, 101, 1001}) {
    const FamilyIndex f = FamilyIndex::make(d);
    const std::vector<int> t = character_table(f);
    long sum = 0;
    for (int v : t) sum += v;
    CHECK(sum == 0);
    CHECK(t[f.modulus() - 1] == 1);
    CHECK(kronecker(static_cast<std::int64_t>(8 * d), static_cast<std::int64_t>(f.modulus() - 1)) == 1);
  }
}

TEST_CASE("Hurwitz oracle") {
  const FamilyIndex one = FamilyIndex::make(1);
  const OracleValue a = central_value_hurwitz(one, 30);
  const OracleValue b = central_value_hurwitz(one, 15);
  CHECK(std::fabs(std::stod(a.decimal) - std::stod(b.decimal)) <= 1e-15);
  CHECK(std::fabs(std::stod(a.decimal) - a.record.value) <= 1e-15);
  CHECK(a.record.abs_error < 1e-15);
  CHECK(a.record.method == LMethod::Hurwitz);
  CHECK_THROWS_AS(central_value_hurwitz(FamilyIndex::make(12503), 10), ResourceError);
  CHECK_THROWS_AS(central_value_hurwitz(one, 0), DomainError);
  CHECK_THROWS_AS(central_value_hurwitz(one, 51), DomainError);
}

TEST_CASE("theta-series values agree with the Hurwitz oracle") {
  const FamilyIndex one = FamilyIndex::make(1);
  CHECK(std::fabs(central_value_afe(one, 1e-12).value - central_value_hurwitz(one, 20).record.value) <= 1e-10);
  const AfeEngine engine(200);
  for (const FamilyIndex d : sieve_family(200)) {
    const LValueRecord r = engine.evaluate(d, 1e-11);
    const OracleValue o = central_value_hurwitz(d, 16);
    REQUIRE_MESSAGE(std::fabs(r.value - o.record.value) <= 1e-10, "d=" << d.d());
    REQUIRE(r.abs_error <= 1e-11);
    REQUIRE(r.method == LMethod::Afe);
  }
}

TEST_CASE("truncation is stable and weights decrease") {
  const AfeEngine engine(5000);
  for (std::uint64_t d : {1, 7, 1001, 4999}) {
    const FamilyIndex f = FamilyIndex::make(d);
    const std::uint64_t N = engine.truncation_point(f, 1e-12);
    CHECK(AfeEngine::tail_bound(f.modulus(), N) <= 1e-12);
    CHECK(std::fabs(engine.truncated_sum(f, 2 * N) - engine.truncated_sum(f, N)) < 1e-10);
    double prev = AfeEngine::term_weight(f.modulus(), 1);
    for (std::uint64_t n = 2; n <= N; ++n) {
      const double w = AfeEngine::term_weight(f.modulus(), n);
      REQUIRE(w < prev);
      prev = w;
    }
  }
}

TEST_CASE("tolerance handling") {
  const AfeEngine engine(100);
  const FamilyIndex f = FamilyIndex::make(3);
  CHECK_THROWS_AS(engine.evaluate(f, 1e-13), PrecisionError);
  CHECK_THROWS_AS(engine.evaluate(f, 1e-5), DomainError);
  CHECK_THROWS_AS(engine.evaluate(f, 0.0), DomainError);
  CHECK_THROWS_AS(engine.evaluate(FamilyIndex::make(101), 1e-9), DomainError);
  CHECK(engine.evaluate(f, 1e-6).abs_error <= 1e-6);
}

TEST_CASE("family sweep") {
  const auto small = family_sweep(1, 15, 1e-9, 1);
  CHECK(small.size() == 7);
  const auto a = family_sweep(1, 30000, 1e-9, 1);
  const auto b = family_sweep(1, 30000, 1e-9, 3);
  CHECK(cache_encode(a) == cache_encode(b));
  CHECK_THROWS_AS(family_sweep(10, 5, 1e-9, 1), DomainError);
}

TEST_CASE("cache round trip and format errors") {
  const auto recs = family_sweep(1, 2000, 1e-9, 1);
  const auto path = temp_path("round.qlm");
  cache_store(recs, path);
  const auto back = cache_load(path);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    REQUIRE(back[i].d == recs[i].d);
    REQUIRE(std::memcmp(&back[i].value, &recs[i].value, sizeof(double)) == 0);
    REQUIRE(std::memcmp(&back[i].abs_error, &recs[i].abs_error, sizeof(double)) == 0);
  }

  std::vector<unsigned char> bytes = cache_encode(recs);
  CHECK(bytes.size() == 16 + 24 * recs.size());
  CHECK(std::memcmp(bytes.data(), "QLM1", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);

  auto offset_of = [](std::span<const unsigned char> b) -> std::uint64_t {
    try {
      cache_decode(b);
    } catch (const FormatError& e) {
      return e.offset();
    }
    return ~0ULL;
  };
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK(offset_of(bad_magic) == 0);
  auto bad_version = bytes;
  bad_version[4] = 2;
  CHECK(offset_of(bad_version) == 4);
  auto bad_count = bytes;
  bad_count.resize(16 + 24 * 10 + 5);
  CHECK(offset_of(bad_count) == 16 + 24 * 10);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK(offset_of(trailing) == bytes.size());
  CHECK(offset_of(std::vector<unsigned char>{'Q', 'L'}) == 2);
  auto unordered = bytes;
  std::swap_ranges(unordered.begin() + 16, unordered.begin() + 24, unordered.begin() + 40);
  CHECK(offset_of(unordered) == 40);

  CHECK_THROWS_AS(cache_load(temp_path("does_not_exist.qlm")), CoverageError);
  std::vector<LValueRecord> descending{recs[1], recs[0]};
  CHECK_THROWS_AS(cache_store(descending, temp_path("bad.qlm")), StorageError);
  CHECK_THROWS_AS(cache_store(recs, std::filesystem::path("/nonexistent_dir_qdl/x.qlm")), StorageError);
}
