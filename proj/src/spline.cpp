#include "curveflow/spline.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "curveflow/errors.hpp"

namespace curveflow {

namespace {

// Dense-free tridiagonal solve; not-a-knot rows are folded in by elimination first.
void solve_tridiag(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                   std::vector<Point>& rhs) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - c[i] * rhs[i + 1]) / b[i];
}

}  // namespace

CubicSpline2::CubicSpline2(std::vector<double> knots, std::vector<Point> values, SplineEnd end)
    : u_(std::move(knots)), p_(std::move(values)) {
  const std::size_t n = u_.size();
  if (n != p_.size() || n < 4) throw InvalidArgument("spline needs at least 4 matching knots and values");
  for (std::size_t i = 1; i < n; ++i)
    if (!(u_[i] > u_[i - 1])) throw InvalidArgument("spline knots must increase strictly");

  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = u_[i + 1] - u_[i];

  std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0);
  std::vector<Point> r(n, Point::Zero());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    a[i] = h[i - 1];
    b[i] = 2.0 * (h[i - 1] + h[i]);
    c[i] = h[i];
    r[i] = 6.0 * ((p_[i + 1] - p_[i]) / h[i] - (p_[i] - p_[i - 1]) / h[i - 1]);
  }
  if (end == SplineEnd::not_a_knot) {
    // third derivative continuous across knot 1 and knot n-2:
    // h1*M0 - (h0+h1)*M1 + h0*M2 = 0, eliminated against row 1 to stay tridiagonal
    {
      double h0 = h[0], h1 = h[1];
      // row 1: h0 M0 + 2(h0+h1) M1 + h1 M2 = r1 ; substitute M0 = ((h0+h1) M1 - h0 M2)/h1
      b[1] = 2.0 * (h0 + h1) + h0 * (h0 + h1) / h1;
      c[1] = h1 - h0 * h0 / h1;
      a[1] = 0.0;
    }
    {
      std::size_t k = n - 2;
      double hm = h[k - 1], hl = h[k];
      // row k: hm M_{k-1} + 2(hm+hl) M_k + hl M_{k+1} = r_k ; M_{k+1} = ((hm+hl) M_k - hl M_{k-1})/hm
      b[k] = 2.0 * (hm + hl) + hl * (hm + hl) / hm;
      a[k] = hm - hl * hl / hm;
      c[k] = 0.0;
    }
    std::vector<double> ai(a.begin() + 1, a.end() - 1), bi(b.begin() + 1, b.end() - 1),
        ci(c.begin() + 1, c.end() - 1);
    std::vector<Point> ri(r.begin() + 1, r.end() - 1);
    solve_tridiag(ai, bi, ci, ri);
    m_.assign(n, Point::Zero());
    for (std::size_t i = 1; i + 1 < n; ++i) m_[i] = ri[i - 1];
    m_[0] = ((h[0] + h[1]) * m_[1] - h[0] * m_[2]) / h[1];
    std::size_t k = n - 2;
    m_[n - 1] = ((h[k - 1] + h[k]) * m_[k] - h[k] * m_[k - 1]) / h[k - 1];
  } else {
    solve_tridiag(a, b, c, r);
    m_ = std::move(r);
    m_.front() = Point::Zero();
    m_.back() = Point::Zero();
  }
}

std::size_t CubicSpline2::interval(double u) const {
  auto it = std::upper_bound(u_.begin(), u_.end(), u);
  std::size_t i = (it == u_.begin()) ? 0 : static_cast<std::size_t>(it - u_.begin()) - 1;
  return std::min(i, u_.size() - 2);
}

// Outside [u0, un] the end cubic is continued; callers clamp if they care.
Point CubicSpline2::value(double u) const {
  std::size_t i = interval(u);
  double h = u_[i + 1] - u_[i];
  double A = (u_[i + 1] - u) / h, B = (u - u_[i]) / h;
  return A * p_[i] + B * p_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * (h * h / 6.0);
}

Point CubicSpline2::d1(double u) const {
  std::size_t i = interval(u);
  double h = u_[i + 1] - u_[i];
  double A = (u_[i + 1] - u) / h, B = (u - u_[i]) / h;
  return (p_[i + 1] - p_[i]) / h - (3.0 * A * A - 1.0) * h / 6.0 * m_[i] + (3.0 * B * B - 1.0) * h / 6.0 * m_[i + 1];
}

Point CubicSpline2::d2(double u) const {
  std::size_t i = interval(u);
  double h = u_[i + 1] - u_[i];
  double A = (u_[i + 1] - u) / h, B = (u - u_[i]) / h;
  return A * m_[i] + B * m_[i + 1];
}

Point CubicSpline2::d3(double u) const {
  std::size_t i = interval(u);
  return (m_[i + 1] - m_[i]) / (u_[i + 1] - u_[i]);
}

double CubicSpline2::length(double a, double b) const {
  static constexpr std::array<double, 5> x{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                           0.9061798459386640};
  static constexpr std::array<double, 5> w{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                           0.4786286704993665, 0.2369268850561891};
  if (b < a) return -length(b, a);
  double total = 0.0;
  std::size_t i = interval(a);
  double lo = a;
  while (lo < b) {
    double hi = (i + 1 < u_.size() - 1) ? std::min(b, u_[i + 1]) : b;
    double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    for (int k = 0; k < 5; ++k) total += w[k] * r * d1(c + r * x[k]).norm();
    lo = hi;
    ++i;
  }
  return total;
}

}  // namespace curveflow
