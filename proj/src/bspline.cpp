#include "tokenscope/bspline.hpp"

#include <algorithm>
#include <array>

#include "tokenscope/error.hpp"

namespace tokenscope {

CubicBSplineBasis::CubicBSplineBasis(std::vector<double> breakpoints)
    : breakpoints_(std::move(breakpoints)) {
  if (breakpoints_.size() < 2) {
    throw DataError("spline basis needs at least 2 distinct knots");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw DataError("spline knots must be strictly ascending");
    }
  }
  knots_.assign(kDegree, breakpoints_.front());
  knots_.insert(knots_.end(), breakpoints_.begin(), breakpoints_.end());
  knots_.insert(knots_.end(), kDegree, breakpoints_.back());
}

std::size_t CubicBSplineBasis::find_span(double x) const {
  const std::size_t last = size() - 1;
  if (x >= knots_[last + 1]) return last;
  if (x <= knots_[kDegree]) return kDegree;
  // First knot strictly greater than x, minus one.
  const auto it = std::upper_bound(knots_.begin() + kDegree, knots_.begin() + last + 1, x);
  return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

void CubicBSplineBasis::nonzero(std::size_t i, double x, int degree, double* out) const {
  std::array<double, kDegree + 1> left{};
  std::array<double, kDegree + 1> right{};
  out[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - knots_[i + 1 - j];
    right[j] = knots_[i + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

void CubicBSplineBasis::evaluate_inside(double x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t span = find_span(x);
  std::array<double, kDegree + 1> values{};
  nonzero(span, x, kDegree, values.data());
  for (int r = 0; r <= kDegree; ++r) out[span - kDegree + r] = values[r];
}

void CubicBSplineBasis::derivative(double x, std::span<double> out) const {
  if (out.size() != size()) throw InvariantError("basis derivative: wrong output length");
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t span = find_span(std::clamp(x, breakpoints_.front(), breakpoints_.back()));
  const double xc = std::clamp(x, breakpoints_.front(), breakpoints_.back());
  // Quadratic pieces B_{span-2..span, 2}; everything else is zero on this span.
  std::array<double, kDegree> quad{};
  nonzero(span, xc, kDegree - 1, quad.data());
  const auto quadratic = [&](std::size_t k) -> double {
    if (k + 2 < span || k > span) return 0.0;
    return quad[k + 2 - span];
  };
  for (std::size_t k = span - kDegree; k <= span; ++k) {
    double d = 0.0;
    const double left_width = knots_[k + kDegree] - knots_[k];
    const double right_width = knots_[k + kDegree + 1] - knots_[k + 1];
    if (left_width > 0.0) d += quadratic(k) / left_width;
    if (right_width > 0.0) d -= quadratic(k + 1) / right_width;
    out[k] = kDegree * d;
  }
}

void CubicBSplineBasis::evaluate(double x, std::span<double> out) const {
  if (out.size() != size()) throw InvariantError("basis evaluate: wrong output length");
  const double lo = breakpoints_.front();
  const double hi = breakpoints_.back();
  if (x >= lo && x <= hi) {
    evaluate_inside(x, out);
    return;
  }
  const double edge = x < lo ? lo : hi;
  std::vector<double> slope(size());
  evaluate_inside(edge, out);
  derivative(edge, slope);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += slope[k] * (x - edge);
}

Eigen::MatrixXd build_spline_basis(std::span<const double> values,
                                   std::span<const double> breakpoints) {
  const CubicBSplineBasis basis(std::vector<double>(breakpoints.begin(), breakpoints.end()));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(values.size()),
                      static_cast<Eigen::Index>(basis.size()));
  std::vector<double> row(basis.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    basis.evaluate(values[i], row);
    for (std::size_t k = 0; k < row.size(); ++k) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
  }
  return out;
}

}  // namespace tokenscope
