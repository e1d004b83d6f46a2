#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <thread>

#include "qdl/cli.hpp"
#include "qdl/errors.hpp"

namespace qdl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  T v{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return v;
}

template <class T>
std::vector<T> parse_list(std::string_view s, const std::function<std::optional<T>(std::string_view)>& one,
                          const std::string& kind, const std::string& key, int line) {
  std::vector<T> out;
  s = trim(s);
  if (s.empty()) return out;
  while (true) {
    const std::size_t comma = s.find(',');
    const std::string_view item = trim(s.substr(0, comma));
    const auto v = one(item);
    if (!v) {
      throw ConfigError(key + ": expected a comma-separated list of " + kind + ", got '" +
                            std::string(item) + "'",
                        line);
    }
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  c.threads = std::max(1U, std::thread::hardware_concurrency());
  return c;
}

std::optional<std::filesystem::path> cache_path_from_env() {
  const char* dir = std::getenv("QDL_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::filesystem::path(dir) / "family.qlm";
}

RunConfig parse_config(std::string_view text, RunConfig cfg) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line_no);

    auto bad = [&](const std::string& kind) {
      return ConfigError(key + ": expected " + kind + ", got '" + std::string(value) + "'", line_no);
    };
    auto real = [&](double lo = -1e308) {
      const auto v = parse_number<double>(value);
      if (!v || !(*v >= lo)) throw bad("a number");
      return *v;
    };
    auto positive = [&] {
      const auto v = parse_number<double>(value);
      if (!v || !(*v > 0.0)) throw bad("a positive number");
      return *v;
    };
    auto u64 = [&] {
      const auto v = parse_number<std::uint64_t>(value);
      if (!v) throw bad("a non-negative integer");
      return *v;
    };
    const std::function<std::optional<double>(std::string_view)> dbl = parse_number<double>;
    const std::function<std::optional<int>(std::string_view)> int1 = parse_number<int>;
    const std::function<std::optional<std::uint64_t>(std::string_view)> uint1 =
        parse_number<std::uint64_t>;

    if (key == "cache_path") {
      if (value.empty()) throw bad("a path");
      cfg.cache_path = std::string(value);
    } else if (key == "threads") {
      const auto v = parse_number<unsigned>(value);
      if (!v || *v < 1) throw bad("a positive integer");
      cfg.threads = *v;
    } else if (key == "seed") {
      cfg.seed = u64();
    } else if (key == "tol") {
      cfg.tol = positive();
    } else if (key == "quad_tol") {
      cfg.quad_tol = positive();
    } else if (key == "charsum_constant") {
      cfg.charsum_constant = positive();
    } else if (key == "X") {
      cfg.X = positive();
    } else if (key == "log_X") {
      cfg.log_X = positive();
    } else if (key == "x_min") {
      cfg.x_min = u64();
    } else if (key == "x_grid") {
      cfg.x_grid = parse_list<double>(value, dbl, "numbers", key, line_no);
    } else if (key == "k") {
      cfg.ks = parse_list<double>(value, dbl, "numbers", key, line_no);
    } else if (key == "n") {
      cfg.n = positive();
    } else if (key == "l") {
      cfg.ls = parse_list<std::uint64_t>(value, uint1, "integers", key, line_no);
    } else if (key == "z") {
      cfg.z = positive();
    } else if (key == "mode") {
      if (value != "paper" && value != "custom") throw bad("'paper' or 'custom'");
      cfg.mode = std::string(value);
    } else if (key == "ells") {
      cfg.ells = parse_list<int>(value, int1, "integers", key, line_no);
    } else if (key == "boundaries") {
      cfg.boundaries = parse_list<double>(value, dbl, "numbers", key, line_no);
    } else if (key == "c") {
      cfg.c = positive();
    } else if (key == "tail_threshold") {
      cfg.tail_threshold = real();
    } else if (key == "trials") {
      cfg.trials = u64();
    } else if (key == "bins") {
      const auto v = parse_number<int>(value);
      if (!v || *v < 1) throw bad("a positive integer");
      cfg.bins = *v;
    } else if (key == "out") {
      if (value == "csv") {
        cfg.out = OutputFormat::Csv;
      } else if (value == "json") {
        cfg.out = OutputFormat::Json;
      } else {
        throw bad("'csv' or 'json'");
      }
    } else {
      throw ConfigError("unknown key '" + key + "'", line_no);
    }
  }
  return cfg;
}

}  // namespace qdl
