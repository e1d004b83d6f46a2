#pragma once

// Batch driver: run configuration, config-file grammar and subcommand dispatch.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qdl {

enum class OutputFormat { Csv, Json };

struct RunConfig {
  std::filesystem::path cache_path = "qdl_cache/family.qlm";
  unsigned threads = 1;          // set to the hardware thread count by default_config()
  std::uint64_t seed = 7;
  double tol = 1e-9;             // per-value L tolerance for sweeps
  double quad_tol = 1e-10;       // Mellin transform quadrature
  double charsum_constant = 50.0;

  double X = 1e5;
  std::optional<double> log_X;   // paper-mode blocks beyond double range
  std::uint64_t x_min = 1;
  std::vector<double> x_grid;    // empty: single X
  std::vector<double> ks = {0.5};
  double n = 2.0;
  std::vector<std::uint64_t> ls = {1, 3};
  std::optional<double> z;       // proxy cutoff override

  std::string mode = "custom";   // paper | custom
  std::vector<int> ells = {20, 8, 4};
  std::vector<double> boundaries = {50.0, 500.0, 5000.0};
  double c = 100.0;
  double tail_threshold = 1e4;

  std::uint64_t trials = 100000;
  int bins = 40;
  OutputFormat out = OutputFormat::Csv;
};

RunConfig default_config();

// `key = value` lines, `#` comments, later keys override earlier ones. Keys are the
// RunConfig field names (k for ks, l for ls). ConfigError names the offending line.
RunConfig parse_config(std::string_view text, RunConfig base = default_config());

// QDL_CACHE_DIR/family.qlm when the variable is set and non-empty.
std::optional<std::filesystem::path> cache_path_from_env();

// Exit status: 0 success, 1 verification failure (witness printed), 2 usage or
// configuration error (including a missing or incomplete cache).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace qdl
