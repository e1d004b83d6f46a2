#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdl/cli.hpp"
#include "qdl/errors.hpp"
#include "qdl/lvalues.hpp"

using namespace qdl;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "qdl_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// cache covering d <= 6000, built once
std::string small_cache() {
  static const std::string path = [] {
    const auto p = (workdir() / "small.qlm").string();
    const Run r = run({"sweep", "--X", "6000", "--cache", p, "--threads", "2"});
    REQUIRE(r.code == 0);
    return p;
  }();
  return path;
}

int config_line(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (value) setenv("QDL_CACHE_DIR", value, 1);
    else unsetenv("QDL_CACHE_DIR");
  }
  ~EnvGuard() { unsetenv("QDL_CACHE_DIR"); }
};

}  // namespace

TEST_CASE("config grammar") {
  const RunConfig d = default_config();
  CHECK(d.threads >= 1);
  CHECK(parse_config("").threads == d.threads);
  CHECK(parse_config("threads = 8").threads == 8);
  CHECK(config_line("threads = eight") == 1);
  CHECK(config_line("# comment\n\nseed = 3\nbogus = 1\n") == 4);
  CHECK(config_line("X = -5") == 1);
  CHECK(config_line("k = 0.5, x") == 1);
  CHECK(config_line("just text") == 1);
  CHECK(config_line("out = xml") == 1);

  const RunConfig c = parse_config(
      "threads = 2\n"
      "threads = 3   # later wins\n"
      "X = 2.5e5\n"
      "k = 0.25, 0.5,1\n"
      "l = 1,3,5\n"
      "ells = 8,4\n"
      "boundaries = 30, 300\n"
      "mode = paper\n"
      "log_X = 100\n"
      "out = json\n"
      "cache_path = /tmp/x.qlm\n");
  CHECK(c.threads == 3);
  CHECK(c.X == 2.5e5);
  CHECK(c.ks == std::vector<double>{0.25, 0.5, 1.0});
  CHECK(c.ls == std::vector<std::uint64_t>{1, 3, 5});
  CHECK(c.ells == std::vector<int>{8, 4});
  CHECK(c.boundaries == std::vector<double>{30, 300});
  CHECK(c.mode == "paper");
  CHECK(c.log_X == 100.0);
  CHECK(c.out == OutputFormat::Json);
  CHECK(c.cache_path == fs::path("/tmp/x.qlm"));

  try {
    parse_config("threads = eight");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("threads") != std::string::npos);
    CHECK(what.find("eight") != std::string::npos);
  }
}

TEST_CASE("cache path from the environment") {
  {
    EnvGuard g("/some/dir");
    REQUIRE(cache_path_from_env().has_value());
    CHECK(*cache_path_from_env() == fs::path("/some/dir/family.qlm"));
  }
  {
    EnvGuard g("");
    CHECK_FALSE(cache_path_from_env().has_value());
  }
  EnvGuard g(nullptr);
  CHECK_FALSE(cache_path_from_env().has_value());
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  const Run r = run({"verify", "nothing"});
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown subcommand") != std::string::npos);
  CHECK(run({"moments", "--X", "abc"}).code == 2);
  CHECK(run({"moments", "--threads", "0"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("missing or partial cache exits 2 with the missing ranges") {
  const std::string missing = (workdir() / "absent.qlm").string();
  const Run a = run({"moments", "--X", "1000", "--cache", missing});
  CHECK(a.code == 2);
  CHECK(a.err.find("not found") != std::string::npos);
  const Run b = run({"moments", "--X", "100000", "--cache", small_cache()});
  CHECK(b.code == 2);
  CHECK(b.err.find("sweep") != std::string::npos);
}

TEST_CASE("sweep merges and is deterministic") {
  const std::string one = (workdir() / "one.qlm").string();
  const std::string two = (workdir() / "two.qlm").string();
  REQUIRE(run({"sweep", "--X", "3000", "--cache", one, "--threads", "1"}).code == 0);
  REQUIRE(run({"sweep", "--X", "1500", "--cache", two, "--threads", "3"}).code == 0);
  REQUIRE(run({"sweep", "--x-min", "1501", "--X", "3000", "--cache", two, "--threads", "2"}).code == 0);
  auto bytes = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(bytes(one) == bytes(two));
  CHECK(cache_load(one).size() == sieve_family(3000).size());
}

TEST_CASE("verification subcommands") {
  const Run e = run({"verify", "elemmas", "--trials", "2000", "--seed", "5"});
  CHECK(e.code == 0);
  CHECK(e.out.find("PASS") != std::string::npos);

  const Run p = run({"verify", "pointwise", "--X", "6000", "--k", "0,0.5,1", "--ells", "8,4",
                     "--boundaries", "30,300", "--cache", small_cache()});
  CHECK(p.code == 0);
  CHECK(p.out.find("violations=0") != std::string::npos);

  const Run h = run({"verify", "holder", "--X", "2000", "--k", "0.5", "--ells", "8,4", "--boundaries",
                     "30,300", "--cache", small_cache()});
  CHECK(h.code == 0);
  CHECK(run({"verify", "holder", "--X", "2000", "--k", "1", "--cache", small_cache()}).code == 2);

  const Run x = run({"verify", "expansion", "--ells", "4,2", "--boundaries", "20,60"});
  CHECK(x.code == 0);
  CHECK(x.out.find("PASS") != std::string::npos);

  const Run c = run({"verify", "charsum", "--X", "5000"});
  CHECK(c.out.find("n,value,main_term") == 0);
}

TEST_CASE("report subcommands") {
  const Run m = run({"moments", "--X", "2000", "--k", "0,2", "--cache", small_cache()});
  REQUIRE(m.code == 0);
  CHECK(m.out.rfind("k,X,weighting,value,predicted_main,ratio,sample_count,label\n", 0) == 0);
  CHECK(m.out.find("\n0,2000,sharp,") != std::string::npos);
  CHECK(run({"moments", "--X", "2000", "--k", "0,2", "--cache", small_cache()}).out == m.out);

  const Run j = run({"moments", "--X", "2000", "--k", "1", "--out", "json", "--weighting", "smooth",
                     "--cache", small_cache()});
  CHECK(j.code == 0);
  CHECK(j.out.find("\"weighting\": \"smooth\"") != std::string::npos);

  const Run t = run({"twisted", "--X", "2000", "--l", "1,3", "--cache", small_cache()});
  CHECK(t.code == 0);
  CHECK(t.out.find("l=3") != std::string::npos);
  CHECK(run({"twisted", "--X", "2000", "--l", "2", "--cache", small_cache()}).code == 2);

  const Run b = run({"bounds", "--X", "2000", "--k", "0.5", "--ells", "8,4", "--boundaries", "30,300",
                     "--cache", small_cache()});
  CHECK(b.code == 0);
  CHECK(b.out.find("la_product") != std::string::npos);

  const Run d = run({"distribution", "--X", "2500", "--bins", "8", "--cache", small_cache()});
  CHECK(d.code == 0);
  CHECK(d.out.find("sup_normal,") != std::string::npos);
}

TEST_CASE("blocks output") {
  const Run custom = run({"blocks", "--ells", "20,4", "--boundaries", "100,1000"});
  CHECK(custom.code == 0);
  CHECK(custom.out.find("R = 2") != std::string::npos);
  CHECK(custom.out.find("square_gap = true") != std::string::npos);
  const Run paper = run({"blocks", "--mode", "paper", "--X", "1000000"});
  CHECK(paper.code == 0);
  CHECK(paper.out.find("ell_1 = 526") != std::string::npos);
  CHECK(paper.out.find("R = 0") != std::string::npos);
  CHECK(paper.out.find("tail_condition = false") != std::string::npos);
  const Run big = run({"blocks", "--mode", "paper", "--log-X", "22026.465794806718", "--tail-threshold", "1500"});
  CHECK(big.out.find("generated = 2000 1522") != std::string::npos);
  CHECK(big.out.find("square_gap = false") != std::string::npos);
  CHECK(run({"blocks", "--ells", "3"}).code == 2);
  const Run js = run({"blocks", "--out", "json"});
  CHECK(js.out.find("\"square_gap\": false") != std::string::npos);
}

TEST_CASE("precedence: defaults < config file < environment < flags") {
  const fs::path cfg = workdir() / "run.cfg";
  const std::string from_cfg = (workdir() / "cfg_dir" / "family.qlm").string();
  {
    std::ofstream f(cfg);
    f << "cache_path = " << from_cfg << "\nk = 0\nX = 2000\n";
  }
  {
    EnvGuard g(nullptr);
    const Run r = run({"moments", "--config", cfg.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find(from_cfg) != std::string::npos);
  }
  const fs::path env_dir = workdir() / "env_dir";
  fs::create_directories(env_dir);
  fs::copy_file(small_cache(), env_dir / "family.qlm", fs::copy_options::overwrite_existing);
  {
    EnvGuard g(env_dir.c_str());
    const Run r = run({"moments", "--config", cfg.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("\n0,2000,sharp,") != std::string::npos);
    const Run flag = run({"moments", "--config", cfg.string(), "--cache", (workdir() / "nope.qlm").string()});
    CHECK(flag.code == 2);
    CHECK(flag.err.find("nope.qlm") != std::string::npos);
    const Run kflag = run({"moments", "--config", cfg.string(), "--k", "1"});
    CHECK(kflag.out.find("\n1,2000,sharp,") != std::string::npos);
  }
  {
    std::ofstream f(workdir() / "bad.cfg");
    f << "seed = 1\nthreads = eight\n";
  }
  const Run bad = run({"moments", "--config", (workdir() / "bad.cfg").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 2") != std::string::npos);
}
