#pragma once
#include <Eigen/Core>
#include <vector>

namespace curveflow {

using Point = Eigen::Vector2d;

enum class SplineEnd { natural, not_a_knot };

// Interpolating C2 cubic through (u_i, p_i), u strictly increasing.
class CubicSpline2 {
 public:
  CubicSpline2() = default;
  CubicSpline2(std::vector<double> knots, std::vector<Point> values, SplineEnd end = SplineEnd::natural);

  Point value(double u) const;
  Point d1(double u) const;
  Point d2(double u) const;
  Point d3(double u) const;

  double u_begin() const { return u_.front(); }
  double u_end() const { return u_.back(); }
  const std::vector<double>& knots() const { return u_; }

  // arc length between two parameters, 5-point Gauss per knot interval
  double length(double a, double b) const;
  double length() const { return length(u_.front(), u_.back()); }

 private:
  std::size_t interval(double u) const;
  std::vector<double> u_;
  std::vector<Point> p_;
  std::vector<Point> m_;  // second derivatives at the knots
};

}  // namespace curveflow
