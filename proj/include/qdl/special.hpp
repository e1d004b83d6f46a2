#pragma once

#include <cstddef>
#include <vector>

namespace qdl {

// Upper incomplete gamma Gamma(a, x) for 0 < a < 1, x >= 0.
// Series for x < 2 (Gamma(a) minus the lower function), Lentz continued fraction otherwise.
double upper_incomplete_gamma(double a, double x);

// G(u) = Gamma(1/4, u^4) by cubic Hermite interpolation on a uniform grid.
// dG/du = -4 exp(-u^4) exactly, so nodal slopes carry no approximation error.
class QuarterGammaTable {
 public:
  QuarterGammaTable(double u_max = 3.0, std::size_t cells = 6144);

  double u_max() const noexcept { return u_max_; }
  // Certified bound on |G(u) - interpolant(u)| for 0 <= u <= u_max.
  double error_bound() const noexcept { return error_bound_; }

  double operator()(double u) const noexcept {
    const double s = u * inv_h_;
    auto i = static_cast<std::size_t>(s);
    if (i >= cells_) i = cells_ - 1;
    const double t = s - static_cast<double>(i);
    const Node& a = nodes_[i];
    const Node& b = nodes_[i + 1];
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return a.value * h00 + a.scaled_slope * h10 + b.value * h01 + b.scaled_slope * h11;
  }

 private:
  struct Node {
    double value;
    double scaled_slope;  // h * G'(u_i)
  };
  double u_max_;
  std::size_t cells_;
  double h_;
  double inv_h_;
  double error_bound_;
  std::vector<Node> nodes_;
};

}  // namespace qdl
