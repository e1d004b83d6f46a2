#include "qdl/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qdl/errors.hpp"

namespace qdl {

double upper_incomplete_gamma(double a, double x) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("upper_incomplete_gamma: need 0 < a < 1");
  if (!(x >= 0.0)) throw DomainError("upper_incomplete_gamma: need x >= 0");
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (x == 0.0) return std::tgamma(a);
  if (x < 2.0) {
    // gamma(a, x) = x^a sum_k (-x)^k / (k! (a + k))
    double term = 1.0;  // (-x)^k / k!
    double sum = 1.0 / a;
    for (int k = 1; k < 200; ++k) {
      term *= -x / k;
      const double add = term / (a + k);
      sum += add;
      if (std::fabs(add) < eps * 1e-2 * std::fabs(sum)) break;
    }
    return std::tgamma(a) - std::pow(x, a) * sum;
  }
  // Modified Lentz for Gamma(a,x) = e^{-x} x^a / (x + 1 - a - 1(1-a)/(x + 3 - a - ...))
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps * 0.5) break;
  }
  return std::exp(-x + a * std::log(x)) * h;
}

QuarterGammaTable::QuarterGammaTable(double u_max, std::size_t cells)
    : u_max_(u_max), cells_(cells), h_(u_max / static_cast<double>(cells)), inv_h_(1.0 / h_) {
  nodes_.resize(cells_ + 1);
  for (std::size_t i = 0; i <= cells_; ++i) {
    const double u = h_ * static_cast<double>(i);
    const double u4 = (u * u) * (u * u);
    nodes_[i].value = upper_incomplete_gamma(0.25, u4);
    nodes_[i].scaled_slope = -4.0 * std::exp(-u4) * h_;
  }
  // Hermite remainder: h^4/384 max|G''''|, G'''' = -4 f''' with
  // f = exp(-u^4), f''' = (-24u + 144u^5 - 64u^9) f. Sampled on a grid 64x finer
  // than the table; the 1.05 factor covers f'''' * spacing between samples.
  double m4 = 0.0;
  const std::size_t samples = 64 * cells_;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double u = u_max_ * static_cast<double>(i) / static_cast<double>(samples);
    const double u4 = u * u * u * u;
    const double poly = -24 * u + 144 * u * u4 - 64 * u * u4 * u4;
    m4 = std::max(m4, std::fabs(4.0 * poly * std::exp(-u4)));
  }
  const double h4 = h_ * h_ * h_ * h_;
  // Nodal values carry ~1e-15 absolute error from the continued fraction / series
  // (Gamma(1/4) ~ 3.6); Hermite weights on values sum to 1.
  error_bound_ = 1.05 * m4 * h4 / 384.0 + 64.0 * std::numeric_limits<double>::epsilon() * 4.0;
}

}  // namespace qdl
