#include "qdl/report.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace qdl {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string reports_csv(std::span<const MomentReport> reports) {
  std::ostringstream os;
  os << "k,X,weighting,value,predicted_main,ratio,sample_count,label\n";
  for (const MomentReport& r : reports) {
    os << format_double(r.k) << ',' << format_double(r.X) << ',' << weighting_name(r.weighting) << ','
       << format_double(r.value) << ',' << (r.predicted_main ? format_double(*r.predicted_main) : "")
       << ',' << (r.ratio ? format_double(*r.ratio) : "") << ',' << r.sample_count << ','
       << csv_field(r.label) << '\n';
  }
  return os.str();
}

std::string reports_json(std::span<const MomentReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const MomentReport& r : reports) {
    nlohmann::ordered_json o;
    o["k"] = r.k;
    o["X"] = r.X;
    o["weighting"] = weighting_name(r.weighting);
    o["value"] = r.value;
    o["predicted_main"] = r.predicted_main ? nlohmann::ordered_json(*r.predicted_main) : nullptr;
    o["ratio"] = r.ratio ? nlohmann::ordered_json(*r.ratio) : nullptr;
    o["sample_count"] = r.sample_count;
    o["label"] = r.label;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

}  // namespace qdl
