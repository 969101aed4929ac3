#include "curveflow/smoother.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "curveflow/banded.hpp"
#include "curveflow/errors.hpp"

namespace curveflow {

Point SmootherProblem::xi_at(double s, int derivative) const {
  Point r = Point::Zero();
  for (int k = derivative; k < 6; ++k) {
    double f = 1.0;
    for (int i = 0; i < derivative; ++i) f *= (k - i);
    r += f * std::pow(s, k - derivative) * xi_coeffs.row(k).transpose();
  }
  return r;
}

SmootherProblem build_corrector(const SampledCurve& f0, double mu) {
  differential_data(f0);  // regularity
  if (!(mu > 7.0 / 8.0 && mu <= 1.0)) throw InvalidArgument("mu must lie in (7/8, 1]");
  SmootherProblem p;
  p.f0 = f0;
  p.mu = mu;
  auto d = sigma_derivative(f0.points(), f0.h());
  p.d0 = d.front();
  p.d1 = d.back();

  // rows: value, slope, second derivative at 0, then at 1
  Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
  M(0, 0) = 1;
  M(1, 1) = 1;
  M(2, 2) = 2;
  for (int k = 0; k < 6; ++k) {
    M(3, k) = 1;
    M(4, k) = k;
    M(5, k) = k * (k - 1);
  }
  Eigen::Matrix<double, 6, 2> rhs;
  rhs.row(0) = f0.front().transpose();
  rhs.row(1) = p.d0.transpose();
  rhs.row(2).setZero();
  rhs.row(3) = f0.back().transpose();
  rhs.row(4) = p.d1.transpose();
  rhs.row(5).setZero();
  p.xi_coeffs = M.fullPivLu().solve(rhs);

  const int n = f0.intervals();
  p.xi.resize(n + 1);
  p.u0.resize(n + 1);
  p.h.assign(n + 1, Point::Zero());
  for (int j = 0; j <= n; ++j) {
    p.xi[j] = p.xi_at(f0.sigma(j));
    p.u0[j] = f0[j] - p.xi[j];
  }
  p.u0.front().setZero();
  p.u0.back().setZero();
  return p;
}

double corrector_residual(const SmootherProblem& p) {
  double r = 0.0;
  r = std::max(r, (p.xi_at(0.0) - p.f0.front()).norm());
  r = std::max(r, (p.xi_at(1.0) - p.f0.back()).norm());
  r = std::max(r, (p.xi_at(0.0, 1) - p.d0).norm());
  r = std::max(r, (p.xi_at(1.0, 1) - p.d1).norm());
  r = std::max(r, p.xi_at(0.0, 2).norm());
  r = std::max(r, p.xi_at(1.0, 2).norm());
  return r;
}

namespace {

// Ghosts from fourth-order centred conditions v' = 0, v'' = 0 at a wall with v = 0:
//   v_{-1} = -3 v_1 + v_2 / 4,   v_{-2} = -32 v_1 + 3 v_2.
struct Closure {
  static double g1(double v1, double v2) { return -3.0 * v1 + 0.25 * v2; }
  static double g2(double v1, double v2) { return -32.0 * v1 + 3.0 * v2; }
};

// D6 on the interior unknowns v_1..v_{n-1} (index i-1), ghosts eliminated.
void assemble_d6(int n, double scale, BandedMatrix& A, double diag_shift) {
  static const double st[7] = {1, -6, 15, -20, 15, -6, 1};
  const int m = n - 1;
  for (int i = 1; i <= m; ++i) {
    A.add(i - 1, i - 1, diag_shift);
    for (int o = -3; o <= 3; ++o) {
      int k = i + o;
      double c = scale * st[o + 3];
      if (k >= 1 && k <= m) {
        A.add(i - 1, k - 1, c);
      } else if (k == 0 || k == n) {
        // wall value is zero
      } else if (k == -1) {
        A.add(i - 1, 0, -3.0 * c);
        A.add(i - 1, 1, 0.25 * c);
      } else if (k == -2) {
        A.add(i - 1, 0, -32.0 * c);
        A.add(i - 1, 1, 3.0 * c);
      } else if (k == n + 1) {
        A.add(i - 1, m - 1, -3.0 * c);
        A.add(i - 1, m - 2, 0.25 * c);
      } else if (k == n + 2) {
        A.add(i - 1, m - 1, -32.0 * c);
        A.add(i - 1, m - 2, 3.0 * c);
      }
    }
  }
}

// v on -2..n+2 (offset 2) from interior values
std::vector<double> extend(const std::vector<double>& vi, int n) {
  std::vector<double> v(n + 5, 0.0);
  for (int i = 1; i < n; ++i) v[i + 2] = vi[i - 1];
  v[1] = Closure::g1(v[3], v[4]);
  v[0] = Closure::g2(v[3], v[4]);
  v[n + 3] = Closure::g1(v[n + 1], v[n]);
  v[n + 4] = Closure::g2(v[n + 1], v[n]);
  return v;
}

double bc_residual_of(const std::vector<double>& e, int n, double h) {
  auto at = [&](int j) { return e[j + 2]; };
  double r = 0.0;
  for (int side = 0; side < 2; ++side) {
    int w = side == 0 ? 0 : n;
    int s = side == 0 ? 1 : -1;
    double d1 = (-at(w + 2 * s) + 8 * at(w + s) - 8 * at(w - s) + at(w - 2 * s)) / (12 * h);
    double d2 = (-at(w + 2 * s) + 16 * at(w + s) - 30 * at(w) + 16 * at(w - s) - at(w - 2 * s)) / (12 * h * h);
    r = std::max({r, std::abs(at(w)), std::abs(d1), std::abs(d2)});
  }
  return r;
}

double h3_seminorm(const std::vector<double>& ex, const std::vector<double>& ey, int n, double h) {
  double s = 0.0;
  for (int j = 0; j <= n; ++j) {
    auto d3 = [&](const std::vector<double>& e) {
      return (e[j + 4] - 2 * e[j + 3] + 2 * e[j + 1] - e[j]) / (2 * h * h * h);
    };
    double a = d3(ex), b = d3(ey);
    s += (j == 0 || j == n ? 0.5 : 1.0) * (a * a + b * b);
  }
  return std::sqrt(s * h);
}

}  // namespace

SmoothResult smooth_detailed(const SmootherProblem& p, double epsilon, const SmoothOptions& opt) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  const int n = p.f0.intervals();
  const int m = n - 1;
  const double h = p.f0.h();
  int steps = opt.dt > 0.0 ? static_cast<int>(std::ceil(epsilon / opt.dt - 1e-9)) : opt.steps;
  if (steps < 1) throw InvalidArgument("need at least one time step");
  const double dt = epsilon / steps;
  const double k = 1.0 / std::pow(h, 6);

  // BE:  (I - dt D6) v+ = v ;  CN: (I - dt/2 D6) v+ = (I + dt/2 D6) v
  const double theta = opt.scheme == TimeScheme::backward_euler ? 1.0 : 0.5;
  BandedMatrix lhs(m, 3, 3);
  assemble_d6(n, -theta * dt * k, lhs, 1.0);
  std::optional<BandedMatrix> rhs_op;
  if (theta < 1.0) {
    rhs_op.emplace(m, 3, 3);
    assemble_d6(n, (1.0 - theta) * dt * k, *rhs_op, 1.0);
  }

  std::vector<double> b(2 * m);
  for (int i = 1; i < n; ++i) {
    b[i - 1] = p.u0[i].x();
    b[m + i - 1] = p.u0[i].y();
  }
  SmoothResult res;
  auto record = [&]() {
    std::vector<double> vx(b.begin(), b.begin() + m), vy(b.begin() + m, b.end());
    auto ex = extend(vx, n), ey = extend(vy, n);
    res.bc_residual = std::max({res.bc_residual, bc_residual_of(ex, n, h), bc_residual_of(ey, n, h)});
    res.h3_history.push_back(h3_seminorm(ex, ey, n, h));
  };
  record();
  for (int s = 0; s < steps; ++s) {
    if (rhs_op) {
      std::vector<double> x(b.begin(), b.begin() + m), y(b.begin() + m, b.end());
      auto ax = rhs_op->apply(x), ay = rhs_op->apply(y);
      std::copy(ax.begin(), ax.end(), b.begin());
      std::copy(ay.begin(), ay.end(), b.begin() + m);
    }
    lhs.solve(b, 2);
    record();
  }
  res.steps = steps;
  std::vector<Point> out(n + 1);
  out.front() = p.f0.front();
  out.back() = p.f0.back();
  for (int i = 1; i < n; ++i) out[i] = p.xi[i] + Point(b[i - 1], b[m + i - 1]);
  res.curve = SampledCurve(std::move(out));
  return res;
}

SampledCurve smooth(const SmootherProblem& p, double epsilon, const SmoothOptions& opt) {
  return smooth_detailed(p, epsilon, opt).curve;
}

double c0_distance(const SampledCurve& a, const SampledCurve& b) {
  if (a.size() != b.size()) throw InvalidArgument("grids differ");
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, (a[j] - b[j]).norm());
  return d;
}

double c1_distance(const SampledCurve& a, const SampledCurve& b) {
  auto da = sigma_derivative(a.points(), a.h()), db = sigma_derivative(b.points(), b.h());
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, (da[j] - db[j]).norm());
  return c0_distance(a, b) + d;
}

double c2_norm(const SampledCurve& a) {
  auto d1 = sigma_derivative(a.points(), a.h());
  auto d2 = sigma_second_derivative(a.points(), a.h());
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    m0 = std::max(m0, a[j].norm());
    m1 = std::max(m1, d1[j].norm());
    m2 = std::max(m2, d2[j].norm());
  }
  return m0 + m1 + m2;
}

namespace {

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  for (double v : y)
    if (!(v > 1e-300)) return std::nullopt;
  const std::size_t k = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace

RateReport rate_probe(const SmootherProblem& p, const std::vector<double>& eps, const SmoothOptions& opt) {
  if (eps.size() < 3) throw InsufficientSamples("rate probe needs at least three epsilons");
  double ratio = eps[1] / eps[0];
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !(eps[i - 1] > 0.0)) throw InsufficientSamples("epsilons must be positive");
    if (std::abs(eps[i] / eps[i - 1] - ratio) > 1e-6 * std::abs(ratio) || ratio == 1.0)
      throw InsufficientSamples("epsilons must form a geometric sequence");
  }
  RateReport r;
  r.mu = p.mu;
  r.epsilons = eps;
  r.theory_c0 = 2.0 * p.mu / 3.0 - 5.0 / 12.0;
  r.theory_c1 = 2.0 * p.mu / 3.0 - 7.0 / 12.0;
  r.theory_c2 = -(0.75 - 2.0 * p.mu / 3.0);
  for (double e : eps) {
    auto f = smooth(p, e, opt);
    r.c0_distance.push_back(c0_distance(f, p.f0));
    r.c1_distance.push_back(c1_distance(f, p.f0));
    r.c2_norm.push_back(c2_norm(f));
  }
  // distances that vanish identically (already stationary data) have no order
  double scale = 0.0;
  for (std::size_t j = 0; j < p.f0.size(); ++j) scale = std::max(scale, p.f0[j].norm());
  auto tiny = [&](const std::vector<double>& v) {
    for (double x : v)
      if (x > 1e-13 * std::max(1.0, scale)) return false;
    return true;
  };
  if (!tiny(r.c0_distance)) {
    r.c0_order = loglog_slope(eps, r.c0_distance);
    r.c1_order = loglog_slope(eps, r.c1_distance);
    r.c2_exponent = loglog_slope(eps, r.c2_norm);
  }
  return r;
}

}  // namespace curveflow
