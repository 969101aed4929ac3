#pragma once
#include <string>
#include <vector>

#include "curveflow/spline.hpp"

namespace curveflow {

// Counterclockwise quarter turn.
inline Point rot90(const Point& v) { return Point(-v.y(), v.x()); }

// Open planar curve sampled on the uniform grid sigma_j = j/n, j = 0..n.
class SampledCurve {
 public:
  static constexpr int min_intervals = 8;

  SampledCurve() = default;
  explicit SampledCurve(std::vector<Point> points);

  int intervals() const { return static_cast<int>(pts_.size()) - 1; }
  std::size_t size() const { return pts_.size(); }
  double h() const { return 1.0 / intervals(); }
  double sigma(int j) const { return static_cast<double>(j) / intervals(); }
  std::vector<double> sigma_grid() const;

  const Point& operator[](std::size_t j) const { return pts_[j]; }
  const std::vector<Point>& points() const { return pts_; }
  const Point& front() const { return pts_.front(); }
  const Point& back() const { return pts_.back(); }

 private:
  std::vector<Point> pts_;
};

using ScalarField = std::vector<double>;

struct DifferentialData {
  std::vector<Point> tangent;
  std::vector<Point> normal;  // rot90(tangent)
  ScalarField kappa;          // positive on a droplet cap traversed left to right
  ScalarField metric;         // |d f / d sigma|
  std::vector<Point> d1, d2;  // raw sigma derivatives
};

// First and second sigma derivatives: centred inside, second-order one-sided at the ends.
std::vector<Point> sigma_derivative(const std::vector<Point>& p, double h);
std::vector<Point> sigma_second_derivative(const std::vector<Point>& p, double h);
ScalarField sigma_derivative(const ScalarField& v, double h);

DifferentialData differential_data(const SampledCurve& c);

double arclength(const SampledCurve& c);
double energy(const SampledCurve& c, double alpha);
double curvature_l2(const SampledCurve& c);
double curvature_max(const SampledCurve& c);
double kappabound_ratio(const SampledCurve& c, double alpha, double tangent_tol = 1e-2);
double enclosed_area(const SampledCurve& c);
// Equal chords on the cubic spline through the nodes (chord-length knots, natural ends).
SampledCurve resample_uniform_arclength(const SampledCurve& c, int n);
SampledCurve translate(const SampledCurve& c, double dx);

// Trapezoid of a nodal field against arc length.
double integrate_arclength(const SampledCurve& c, const ScalarField& f);

void check_angle(double alpha);
// Angle between measured endpoint tangents and (cos a, sin a), (cos a, -sin a).
double endpoint_tangent_error(const SampledCurve& c, double alpha);
Point target_tangent_left(double alpha);
Point target_tangent_right(double alpha);

SampledCurve read_curve_csv(const std::string& path);
void write_curve_csv(const SampledCurve& c, const std::string& path);

}  // namespace curveflow
