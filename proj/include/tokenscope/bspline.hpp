#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace tokenscope {

// Cubic B-spline basis on strictly ascending breakpoints k0 < k1 < ... < km.
// The knot vector is clamped (each boundary breakpoint repeated four times),
// giving m + 3 basis functions. Outside [k0, km] every basis function is
// continued linearly from its value and slope at the nearest boundary, so
// rows still sum to one.
class CubicBSplineBasis {
 public:
  static constexpr int kDegree = 3;

  // Throws DataError on fewer than 2 breakpoints or a non-ascending sequence.
  explicit CubicBSplineBasis(std::vector<double> breakpoints);

  std::size_t size() const { return knots_.size() - kDegree - 1; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  // Full clamped knot vector.
  const std::vector<double>& knots() const { return knots_; }

  // Writes all basis values at x into `out` (length size()).
  void evaluate(double x, std::span<double> out) const;
  // Derivative of every basis function at x (inside the knot range).
  void derivative(double x, std::span<double> out) const;

 private:
  std::size_t find_span(double x) const;
  // Nonzero basis functions of `degree` on span `i`: out[0..degree].
  void nonzero(std::size_t i, double x, int degree, double* out) const;
  void evaluate_inside(double x, std::span<double> out) const;

  std::vector<double> breakpoints_;
  std::vector<double> knots_;
};

// Basis matrix: one row per value, one column per basis function.
Eigen::MatrixXd build_spline_basis(std::span<const double> values,
                                   std::span<const double> breakpoints);

}  // namespace tokenscope
