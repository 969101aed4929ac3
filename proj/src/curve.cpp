#include "curveflow/curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "curveflow/errors.hpp"

namespace curveflow {

SampledCurve::SampledCurve(std::vector<Point> points) : pts_(std::move(points)) {
  if (static_cast<int>(pts_.size()) < min_intervals + 1)
    throw InvalidCurve("curve needs at least " + std::to_string(min_intervals + 1) + " nodes");
  for (const auto& p : pts_)
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) throw InvalidCurve("non-finite node");
}

std::vector<double> SampledCurve::sigma_grid() const {
  std::vector<double> s(size());
  for (int j = 0; j <= intervals(); ++j) s[j] = sigma(j);
  return s;
}

namespace {

template <class T>
std::vector<T> d1_impl(const std::vector<T>& p, double h) {
  const std::size_t m = p.size();
  std::vector<T> d(m);
  for (std::size_t j = 1; j + 1 < m; ++j) d[j] = (p[j + 1] - p[j - 1]) / (2.0 * h);
  d[0] = (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h);
  d[m - 1] = (3.0 * p[m - 1] - 4.0 * p[m - 2] + p[m - 3]) / (2.0 * h);
  return d;
}

template <class T>
std::vector<T> d2_impl(const std::vector<T>& p, double h) {
  const std::size_t m = p.size();
  std::vector<T> d(m);
  const double h2 = h * h;
  for (std::size_t j = 1; j + 1 < m; ++j) d[j] = (p[j + 1] - 2.0 * p[j] + p[j - 1]) / h2;
  d[0] = (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3]) / h2;
  d[m - 1] = (2.0 * p[m - 1] - 5.0 * p[m - 2] + 4.0 * p[m - 3] - p[m - 4]) / h2;
  return d;
}

}  // namespace

std::vector<Point> sigma_derivative(const std::vector<Point>& p, double h) { return d1_impl(p, h); }
std::vector<Point> sigma_second_derivative(const std::vector<Point>& p, double h) { return d2_impl(p, h); }
ScalarField sigma_derivative(const ScalarField& v, double h) {
  if (v.size() < 4) throw InvalidArgument("field too short to differentiate");
  return d1_impl(v, h);
}

DifferentialData differential_data(const SampledCurve& c) {
  DifferentialData dd;
  const double h = c.h();
  dd.d1 = sigma_derivative(c.points(), h);
  dd.d2 = sigma_second_derivative(c.points(), h);
  const std::size_t m = c.size();
  dd.tangent.resize(m);
  dd.normal.resize(m);
  dd.kappa.resize(m);
  dd.metric.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    double g = dd.d1[j].norm();
    if (!(g > 1e-10)) throw DegenerateCurve("metric below 1e-10 at node " + std::to_string(j));
    dd.metric[j] = g;
    dd.tangent[j] = dd.d1[j] / g;
    dd.normal[j] = rot90(dd.tangent[j]);
    dd.kappa[j] = -dd.d2[j].dot(dd.normal[j]) / (g * g);
  }
  return dd;
}

double integrate_arclength(const SampledCurve& c, const ScalarField& f) {
  auto dd = differential_data(c);
  const std::size_t m = c.size();
  if (f.size() != m) throw InvalidArgument("field length does not match the grid");
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) s += (j == 0 || j == m - 1 ? 0.5 : 1.0) * f[j] * dd.metric[j];
  return s * c.h();
}

// Length of the not-a-knot cubic through the nodes on the sigma grid; the plain
// trapezoid of the finite-difference metric is only second order.
double arclength(const SampledCurve& c) {
  differential_data(c);  // regularity check
  CubicSpline2 s(c.sigma_grid(), c.points(), SplineEnd::not_a_knot);
  return s.length();
}

void check_angle(double alpha) {
  if (!(alpha > 0.0 && alpha < std::numbers::pi)) throw InvalidAngle("contact angle must lie in (0, pi)");
}

double energy(const SampledCurve& c, double alpha) {
  check_angle(alpha);
  return arclength(c) + std::cos(alpha) * (c.front().x() - c.back().x());
}

double curvature_l2(const SampledCurve& c) {
  auto dd = differential_data(c);
  ScalarField k2(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) k2[j] = dd.kappa[j] * dd.kappa[j];
  return std::sqrt(integrate_arclength(c, k2));
}

double curvature_max(const SampledCurve& c) {
  auto dd = differential_data(c);
  double m = 0.0;
  for (double k : dd.kappa) m = std::max(m, std::abs(k));
  return m;
}

Point target_tangent_left(double alpha) { return Point(std::cos(alpha), std::sin(alpha)); }
Point target_tangent_right(double alpha) { return Point(std::cos(alpha), -std::sin(alpha)); }

double endpoint_tangent_error(const SampledCurve& c, double alpha) {
  auto dd = differential_data(c);
  return std::max((dd.tangent.front() - target_tangent_left(alpha)).norm(),
                  (dd.tangent.back() - target_tangent_right(alpha)).norm());
}

double kappabound_ratio(const SampledCurve& c, double alpha, double tangent_tol) {
  check_angle(alpha);
  double err = endpoint_tangent_error(c, alpha);
  if (err > tangent_tol)
    throw AngleMismatch("endpoint tangents miss the contact angle by " + std::to_string(err));
  double kmax = curvature_max(c);
  double rhs = kmax / (std::numbers::sqrt2 * std::sin(alpha));
  return (1.0 / arclength(c)) / rhs;
}

double enclosed_area(const SampledCurve& c) {
  if (std::abs(c.front().y()) >= 1e-8 || std::abs(c.back().y()) >= 1e-8)
    throw EndpointsOffAxis("curve endpoints must lie on the x-axis");
  // Green's theorem on the interpolating cubic: the closing segment lies on y = 0 and
  // contributes nothing; the curve runs left to right over the region, hence the sign.
  CubicSpline2 s(c.sigma_grid(), c.points(), SplineEnd::not_a_knot);
  static constexpr double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                   0.9061798459386640};
  static constexpr double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                   0.4786286704993665, 0.2369268850561891};
  const double h = c.h();
  double a = 0.0;
  for (int j = 0; j < c.intervals(); ++j) {
    double mid = (j + 0.5) * h;
    for (int k = 0; k < 5; ++k) {
      double u = mid + 0.5 * h * gx[k];
      Point p = s.value(u), d = s.d1(u);
      a += gw[k] * 0.5 * h * (p.x() * d.y() - p.y() * d.x());
    }
  }
  return -0.5 * a;
}

SampledCurve translate(const SampledCurve& c, double dx) {
  std::vector<Point> p = c.points();
  for (auto& q : p) q.x() += dx;
  return SampledCurve(std::move(p));
}

namespace {

struct ChordMarch {
  const CubicSpline2& s;
  double U;
  int n;

  // parameter u > a with |S(u) - S(a)| = c; false if the curve ends first
  bool next(double a, double c, double& out) const {
    const Point P = s.value(a);
    auto phi = [&](double u) { return (s.value(u) - P).squaredNorm() - c * c; };
    double speed = std::max(s.d1(a).norm(), 1e-300);
    double step = 0.5 * c / speed;
    double lo = a, hi = a;
    double fhi = -c * c;
    while (fhi < 0.0) {
      lo = hi;
      if (hi >= U) return false;
      hi = std::min(U, hi + step);
      fhi = phi(hi);
    }
    double u = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
      double f = phi(u);
      if (f < 0.0) lo = u; else hi = u;
      double df = 2.0 * (s.value(u) - P).dot(s.d1(u));
      double un = (df != 0.0) ? u - f / df : 0.5 * (lo + hi);
      if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
      if (std::abs(un - u) <= 1e-16 * std::max(1.0, std::abs(u)) || hi - lo <= 4e-16 * std::max(1.0, std::abs(hi))) {
        u = un;
        break;
      }
      u = un;
    }
    out = u;
    return true;
  }

  // mismatch of the last chord; negative when the chords overshoot the end
  double residual(double c, std::vector<double>* us) const {
    double u = s.u_begin();
    if (us) us->assign(1, u);
    for (int k = 1; k < n; ++k) {
      double un;
      if (!next(u, c, un)) return -static_cast<double>(n - k + 1) * c;
      u = un;
      if (us) us->push_back(u);
    }
    return (s.value(U) - s.value(u)).norm() - c;
  }
};

}  // namespace

SampledCurve resample_uniform_arclength(const SampledCurve& c, int n) {
  if (n < SampledCurve::min_intervals) throw InvalidArgument("resample needs n >= 8");
  const auto& p = c.points();
  std::vector<double> u(p.size(), 0.0);
  for (std::size_t j = 1; j < p.size(); ++j) {
    double d = (p[j] - p[j - 1]).norm();
    if (!(d > 1e-12)) throw DegenerateCurve("coincident nodes at " + std::to_string(j));
    u[j] = u[j - 1] + d;
  }
  CubicSpline2 s(u, p, SplineEnd::natural);
  ChordMarch m{s, u.back(), n};

  double c0 = s.length() / n;
  // residual decreases with the chord length; bracket, then Illinois regula falsi
  double a = c0, fa = m.residual(a, nullptr);
  double b = a, fb = fa;
  for (double f = 1.0, it = 0; fa * fb > 0.0; ++it) {
    if (it > 200) throw DegenerateCurve("equal-chord resampling failed to bracket");
    a = b;
    fa = fb;
    f *= 1.02;
    b = (fa > 0.0) ? c0 * f : c0 / f;
    fb = m.residual(b, nullptr);
  }
  double cstar = (fa == 0.0) ? a : b;
  for (int it = 0; it < 200 && fa != 0.0 && fb != 0.0; ++it) {
    double cm = (a * fb - b * fa) / (fb - fa);
    double fm = m.residual(cm, nullptr);
    if (fm * fb < 0.0) { a = b; fa = fb; }
    else fa *= 0.5;
    b = cm;
    fb = fm;
    cstar = cm;
    if (std::abs(fm) < 1e-15 * c0 || std::abs(b - a) < 1e-15 * c0) break;
  }
  std::vector<double> us;
  m.residual(cstar, &us);
  if (static_cast<int>(us.size()) != n) throw DegenerateCurve("equal-chord resampling ran off the curve");
  std::vector<Point> out(n + 1);
  for (int k = 0; k < n; ++k) out[k] = s.value(us[k]);
  out[0] = p.front();
  out[n] = p.back();
  return SampledCurve(std::move(out));
}

SampledCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open curve file " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("sigma,x,y", 0) != 0) throw InvalidCurve("curve file must start with header sigma,x,y");
  std::vector<Point> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, cc;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, cc))
      throw InvalidCurve("malformed curve row: " + line);
    pts.emplace_back(std::stod(b), std::stod(cc));
  }
  return SampledCurve(std::move(pts));
}

void write_curve_csv(const SampledCurve& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out.precision(17);
  out << "sigma,x,y\n";
  for (int j = 0; j <= c.intervals(); ++j) out << c.sigma(j) << ',' << c[j].x() << ',' << c[j].y() << '\n';
}

}  // namespace curveflow
