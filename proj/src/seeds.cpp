#include "curveflow/seeds.hpp"

#include <cmath>
#include <numbers>

#include "curveflow/errors.hpp"

namespace curveflow::seeds {

using std::numbers::pi;

SampledCurve semicircle(int n, double radius, double cx) {
  std::vector<Point> p(n + 1);
  for (int j = 0; j <= n; ++j) {
    double t = pi * (1.0 - static_cast<double>(j) / n);
    p[j] = Point(cx + radius * std::cos(t), radius * std::sin(t));
  }
  p.front().y() = 0.0;
  p.back().y() = 0.0;
  return SampledCurve(std::move(p));
}

SampledCurve cap(double alpha, int n, double radius, const std::function<double(double)>& radial) {
  check_angle(alpha);
  const Point c(0.0, -radius * std::cos(alpha));
  std::vector<Point> p(n + 1);
  for (int j = 0; j <= n; ++j) {
    double s = static_cast<double>(j) / n;
    double th = pi / 2 + alpha - 2.0 * alpha * s;
    double r = radius * (radial ? radial(s) : 1.0);
    p[j] = c + r * Point(std::cos(th), std::sin(th));
  }
  p.front().y() = 0.0;
  p.back().y() = 0.0;
  return SampledCurve(std::move(p));
}

SampledCurve bumped_cap(double alpha, int n, double bump, double radius) {
  return cap(alpha, n, radius, [bump](double s) {
    double q = std::sin(pi * s);
    return 1.0 + bump * q * q;
  });
}

SampledCurve segment(const Point& a, const Point& b, int n) {
  std::vector<Point> p(n + 1);
  for (int j = 0; j <= n; ++j) p[j] = a + (b - a) * (static_cast<double>(j) / n);
  p.back() = b;
  return SampledCurve(std::move(p));
}

SampledCurve ellipse_arc(double a, double b, double t0, double t1, int n) {
  std::vector<Point> p(n + 1);
  for (int j = 0; j <= n; ++j) {
    double t = t0 + (t1 - t0) * j / n;
    p[j] = Point(a * std::cos(t), b * std::sin(t));
  }
  return SampledCurve(std::move(p));
}

SampledCurve polyline(const std::vector<Point>& corners, int n) {
  if (corners.size() < 2) throw InvalidArgument("polyline needs two corners");
  std::vector<double> cum(corners.size(), 0.0);
  for (std::size_t i = 1; i < corners.size(); ++i) cum[i] = cum[i - 1] + (corners[i] - corners[i - 1]).norm();
  std::vector<Point> p(n + 1);
  std::size_t seg = 0;
  for (int j = 0; j <= n; ++j) {
    double s = cum.back() * j / n;
    while (seg + 2 < corners.size() && s > cum[seg + 1]) ++seg;
    double w = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
    p[j] = corners[seg] + w * (corners[seg + 1] - corners[seg]);
  }
  p.back() = corners.back();
  return SampledCurve(std::move(p));
}

SampledCurve looped_cap(double alpha, double r, double pos, int n) {
  check_angle(alpha);
  if (!(r > 0.0 && pos > 0.0 && pos < 1.0)) throw InvalidArgument("loop radius and position out of range");
  const Point c(0.0, -std::cos(alpha));
  const int m = 4000;
  std::vector<Point> dense;
  double th_p = pi / 2 + alpha - 2.0 * alpha * pos;
  for (int i = 0; i <= m; ++i) {
    double th = pi / 2 + alpha - 2.0 * alpha * pos * i / m;
    dense.push_back(c + Point(std::cos(th), std::sin(th)));
  }
  // cap turns clockwise; loop centre sits on the concave side
  const Point P = dense.back();
  const Point tP(std::sin(th_p), -std::cos(th_p));
  const Point cc = P - r * rot90(tP);
  const Point v = P - cc;
  for (int i = 1; i <= m; ++i) {
    double ph = -2.0 * pi * i / m;
    dense.push_back(cc + Point(std::cos(ph) * v.x() - std::sin(ph) * v.y(), std::sin(ph) * v.x() + std::cos(ph) * v.y()));
  }
  for (int i = 1; i <= m; ++i) {
    double th = th_p - 2.0 * alpha * (1.0 - pos) * i / m;
    dense.push_back(c + Point(std::cos(th), std::sin(th)));
  }
  dense.front().y() = 0.0;
  dense.back().y() = 0.0;
  return resample_uniform_arclength(SampledCurve(std::move(dense)), n);
}

}  // namespace curveflow::seeds
