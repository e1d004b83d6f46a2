#pragma once

// Tabular report output. Field order is fixed; doubles print with %.17g.

#include <span>
#include <string>

#include "qdl/moments.hpp"

namespace qdl {

std::string format_double(double v);

// Header: k,X,weighting,value,predicted_main,ratio,sample_count,label
std::string reports_csv(std::span<const MomentReport> reports);
// Array of objects with the same field names; absent optionals are null.
std::string reports_json(std::span<const MomentReport> reports);

}  // namespace qdl
