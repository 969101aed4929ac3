#include "curveflow/chart.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "curveflow/errors.hpp"

namespace curveflow {

namespace {

double smoothstep(int degree, double t) {
  t = std::clamp(t, 0.0, 1.0);
  switch (degree) {
    case 3: return t * t * (3 - 2 * t);
    case 5: return t * t * t * (10 + t * (-15 + 6 * t));
    default: return t * t * t * t * (35 + t * (-84 + t * (70 - 20 * t)));
  }
}

double smoothstep_d1(int degree, double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double u = t * (1 - t);
  switch (degree) {
    case 3: return 6 * u;
    case 5: return 30 * u * u;
    default: return 140 * u * u * u;
  }
}

double clean_cot(double alpha) {
  double c = std::cos(alpha) / std::sin(alpha);
  return std::abs(c) < 1e-12 ? 0.0 : c;
}

// 1/(2 (4*144)^2 c^2); the sine of it is capped at pi/2 so that small cot
// joins the "1 at alpha = pi/2" branch instead of oscillating
constexpr double k576sq2 = 2.0 * 576.0 * 576.0;

}  // namespace

double EtaSpec::operator()(double s) const {
  if (s < 1.0 / 6) return -1.0;
  if (s < 2.0 / 6) return -1.0 + smoothstep(degree, 6 * s - 1);
  if (s < 4.0 / 6) return 0.0;
  if (s < 5.0 / 6) return smoothstep(degree, 6 * s - 4);
  return 1.0;
}

double EtaSpec::d1(double s) const {
  if (s > 1.0 / 6 && s < 2.0 / 6) return 6 * smoothstep_d1(degree, 6 * s - 1);
  if (s > 4.0 / 6 && s < 5.0 / 6) return 6 * smoothstep_d1(degree, 6 * s - 4);
  return 0.0;
}

EtaSpec make_eta(int degree) {
  EtaSpec e;
  e.degree = degree;
  switch (degree) {
    case 3: e.prime_norm = 6 * 1.5; break;
    case 5: e.prime_norm = 6 * 15.0 / 8; break;
    case 7: e.prime_norm = 6 * 35.0 / 16; break;
    default: throw InvalidArgument("smoothstep degree must be 3, 5 or 7");
  }
  return e;
}

double hat_c(double alpha, HatCReading reading) {
  double v = std::numbers::sqrt2 * std::sin(alpha);
  return reading == HatCReading::reciprocal ? 1.0 / v : v;
}

double lambda_max(double alpha, double C_alpha) {
  double c = std::abs(clean_cot(alpha));
  double s = std::sqrt(c * c + 1);
  double b1 = c == 0.0 ? 1.0 : std::sin(std::min(1.0 / (k576sq2 * c * c), std::numbers::pi / 2));
  double lam = std::min(std::sin((s - c) / 4), b1) / (C_alpha * s);
  double b2 = c == 0.0 ? 1.0 : 1.0 / (144 * c);
  return std::min({lam, 1.0 / (6 * s), b2});
}

double xi1_factor(double alpha) {
  double c = std::abs(clean_cot(alpha));
  double s = std::sqrt(c * c + 1);
  double b = c == 0.0 ? 1.0 : 1.0 / (k576sq2 * c * c);
  return std::min({(s - c) / 4, b, std::sin(alpha) / 2});
}

ConstantsReport compute_constants(const ConstantInputs& in) {
  check_angle(in.alpha);
  if (!(in.kappa_norm > 0.0) || !std::isfinite(in.kappa_norm)) throw InvalidChart("reference curvature norm must be positive");
  if (!(in.length > 0.0)) throw InvalidChart("reference length must be positive");
  ConstantsReport r{};
  r.alpha = in.alpha;
  r.reading = in.reading;
  r.cot_alpha = clean_cot(in.alpha);
  r.hat_c = hat_c(in.alpha, in.reading);
  r.eta_prime_norm = in.eta_prime_norm;
  r.kappa_norm = in.kappa_norm;
  r.L_phi = in.length;
  r.lambda = in.lambda;
  const double c = r.cot_alpha, ac = std::abs(c);
  const double denom = 1 + c * c + r.hat_c * ac * in.eta_prime_norm;
  r.C_alpha = 1.0 / denom;
  r.d = r.C_alpha / in.kappa_norm;
  r.K0 = 1.0 / (2 * in.kappa_norm * denom);
  r.K1 = ac == 0.0 ? std::numeric_limits<double>::infinity() : in.length / (12 * ac);
  double lc = in.lambda * r.C_alpha;
  r.C_alpha_bar = 1 - std::sqrt(lc * c * lc * c + (1 - lc) * (1 - lc));
  r.lambda_max = lambda_max(in.alpha, r.C_alpha);
  double sa = std::sin(in.alpha);
  r.xi0 = std::min(r.C_alpha_bar, sa * sa / 2) / in.kappa_norm;
  r.xi1 = xi1_factor(in.alpha) * in.length;
  return r;
}

ChartSpec::ChartSpec(const SampledCurve& reference, double alpha, const ChartOptions& opt)
    : alpha_(alpha), eta_(opt.eta) {
  check_angle(alpha);
  cot_ = clean_cot(alpha);
  phi_star_ = resample_uniform_arclength(reference, reference.intervals());
  spline_ = CubicSpline2(phi_star_.sigma_grid(), phi_star_.points(), SplineEnd::not_a_knot);
  length_ = spline_.length();

  residuals_.axis = std::max(std::abs(phi_star_.front().y()), std::abs(phi_star_.back().y()));
  residuals_.angle = std::max((tangent(0.0) - target_tangent_left(alpha)).norm(),
                              (tangent(1.0) - target_tangent_right(alpha)).norm());
  residuals_.kappa = std::max(std::abs(kappa(0.0)), std::abs(kappa(1.0)));
  if (residuals_.axis > 1e-8) throw InvalidChart("reference endpoints are off the axis");
  if (residuals_.angle > 1e-3)
    throw InvalidChart("reference misses the contact angle by " + std::to_string(residuals_.angle));

  const int n = phi_star_.intervals();
  for (int k = 0; k <= 2 * n; ++k) kappa_norm_ = std::max(kappa_norm_, std::abs(kappa(0.5 * k / n)));

  ConstantInputs in{alpha, kappa_norm_, length_, eta_.prime_norm, 0.0, opt.reading};
  if (opt.lambda > 0.0) {
    if (!(opt.lambda < 1.0)) throw InvalidChart("lambda must lie in (0, 1)");
    in.lambda = opt.lambda;
  } else {
    double cnorm = compute_constants(in).C_alpha;
    in.lambda = 0.9 * lambda_max(alpha, cnorm);
  }
  consts_ = compute_constants(in);
}

Point ChartSpec::phi(double s) const {
  if (s < 0.0) return spline_.value(0.0) + s * spline_.d1(0.0);
  if (s > 1.0) return spline_.value(1.0) + (s - 1.0) * spline_.d1(1.0);
  return spline_.value(s);
}

Point ChartSpec::phi_d1(double s) const { return spline_.d1(std::clamp(s, 0.0, 1.0)); }

Point ChartSpec::tangent(double s) const { return phi_d1(s).normalized(); }

Point ChartSpec::tangent_d1(double s) const {
  if (s < 0.0 || s > 1.0) return Point::Zero();
  Point d1 = spline_.d1(s), d2 = spline_.d2(s);
  double m = d1.norm();
  Point t = d1 / m;
  return (d2 - d2.dot(t) * t) / m;
}

double ChartSpec::kappa(double s) const {
  if (s < 0.0 || s > 1.0) return 0.0;
  Point d1 = spline_.d1(s), d2 = spline_.d2(s);
  return -d2.dot(rot90(d1.normalized())) / d1.squaredNorm();
}

double ChartSpec::eta_at(double s) const { return eta_(std::clamp(s, 0.0, 1.0)); }

Point ChartSpec::fiber(double s) const {
  Point t = tangent(s);
  return rot90(t) + cot_ * eta_at(s) * t;
}

Point ChartSpec::psi(double s, double q) const { return phi(s) + q * fiber(s); }

Eigen::Matrix2d ChartSpec::psi_jacobian(double s, double q) const {
  Point t = tangent(s), dt = tangent_d1(s);
  double e = eta_at(s);
  double de = (s < 0.0 || s > 1.0) ? 0.0 : eta_.d1(s);
  Eigen::Matrix2d J;
  J.col(0) = phi_d1(s) + q * (rot90(dt) + cot_ * (de * t + e * dt));
  J.col(1) = rot90(t) + cot_ * e * t;
  return J;
}

Point chart_eval(const ChartSpec& chart, double sigma, double q) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw InvalidArgument("sigma must lie in [0, 1]");
  if (!(std::abs(q) < chart.d())) throw OutOfTube("|q| = " + std::to_string(std::abs(q)) + " reaches the tube width");
  return chart.psi(sigma, q);
}

JacobianReport chart_jacobian_check(const ChartSpec& chart, int n_sigma, int n_q, std::optional<double> lambda) {
  if (n_sigma < 2 || n_q < 1) throw InvalidArgument("jacobian grid too small");
  double lam = lambda.value_or(chart.lambda());
  if (!(lam > 0.0 && lam <= 1.0)) throw InvalidArgument("lambda must lie in (0, 1]");
  const double w = lam * chart.d();
  JacobianReport r{std::numeric_limits<double>::infinity(), (1 - lam) * chart.length(), 0, 0, false};
  for (int i = 0; i < n_sigma; ++i) {
    double s = static_cast<double>(i) / (n_sigma - 1);
    for (int k = 0; k < n_q; ++k) {
      double q = -w + (k + 0.5) * 2 * w / n_q;
      double det = std::abs(chart.psi_jacobian(s, q).determinant());
      if (det < r.min_det) {
        r.min_det = det;
        r.sigma_at_min = s;
        r.q_at_min = q;
      }
    }
  }
  r.passed = r.min_det > r.bound;
  return r;
}

namespace {

// Damped Newton for a 2x2 system; step halved until the residual drops.
template <class F, class J>
bool newton2(Eigen::Vector2d& x, F&& residual, J&& jacobian, double tol) {
  Eigen::Vector2d r = residual(x);
  double rn = r.norm();
  for (int it = 0; it < 50 && rn > tol; ++it) {
    Eigen::Matrix2d A = jacobian(x);
    double det = A.determinant();
    if (!(std::abs(det) > 1e-300)) return false;
    Eigen::Vector2d step = A.inverse() * r;
    double damp = 1.0;
    bool moved = false;
    for (int k = 0; k < 30; ++k, damp *= 0.5) {
      Eigen::Vector2d xn = x - damp * step;
      Eigen::Vector2d rr = residual(xn);
      if (rr.norm() < rn) {
        x = xn;
        r = rr;
        rn = rr.norm();
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return rn <= tol;
}

// f0 as a not-a-knot cubic in its own sigma, extended linearly beyond [0,1]
struct CurveFn {
  CubicSpline2 s;
  explicit CurveFn(const SampledCurve& c) : s(c.sigma_grid(), c.points(), SplineEnd::not_a_knot) {}
  Point value(double u) const {
    if (u < 0.0) return s.value(0.0) + u * s.d1(0.0);
    if (u > 1.0) return s.value(1.0) + (u - 1.0) * s.d1(1.0);
    return s.value(u);
  }
  Point d1(double u) const { return s.d1(std::clamp(u, 0.0, 1.0)); }
};

}  // namespace

ChartPoint chart_inverse(const ChartSpec& chart, const Point& p, ChartPoint guess) {
  Eigen::Vector2d x(guess.sigma, guess.q);
  double tol = 1e-13 * std::max(1.0, chart.length());
  bool ok = newton2(
      x, [&](const Eigen::Vector2d& v) -> Eigen::Vector2d { return chart.psi(v[0], v[1]) - p; },
      [&](const Eigen::Vector2d& v) { return chart.psi_jacobian(v[0], v[1]); }, tol);
  if (!ok) throw NewtonDivergence("chart inverse did not converge", guess.sigma);
  return {x[0], x[1]};
}

SampledCurve HeightField::build() const {
  std::vector<Point> p(sigma.size());
  for (std::size_t j = 0; j < sigma.size(); ++j) p[j] = chart_eval(chart, sigma[j], rho[j]);
  return SampledCurve(std::move(p));
}

HeightField make_height_field(const ChartSpec& chart, ScalarField rho) {
  const int n = chart.phi_star().intervals();
  if (static_cast<int>(rho.size()) != n + 1) throw InvalidArgument("height field must live on the chart grid");
  HeightField h{chart, chart.phi_star().sigma_grid(), std::move(rho), {}, 0.0, 0.0, 1.0, 1.0};
  h.phi = h.sigma;
  auto dr = sigma_derivative(h.rho, 1.0 / n);
  h.compat = std::max(std::abs(dr.front()), std::abs(dr.back()));
  return h;
}

HeightField extract_height(const ChartSpec& chart, const SampledCurve& f0) {
  const double L = chart.length(), d = chart.d();
  const auto& ref = chart.phi_star();
  const int n = ref.intervals();

  // every node of f0 must have chart coordinates inside the tube, with sigma increasing along f0
  double prev_sigma = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f0.size(); ++i) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ref.size(); ++j) {
      double dd = (ref[j] - f0[i]).squaredNorm();
      if (dd < bd) bd = dd, best = j;
    }
    double s0 = ref.sigma(static_cast<int>(best));
    ChartPoint g{s0, (f0[i] - ref[best]).dot(chart.normal(s0))};
    ChartPoint cp;
    try {
      cp = chart_inverse(chart, f0[i], g);
    } catch (const NewtonDivergence&) {
      throw OutsideTube("no chart coordinates for curve node", f0.sigma(static_cast<int>(i)));
    }
    if (std::abs(cp.q) >= d || cp.sigma < -1e-3 || cp.sigma > 1 + 1e-3)
      throw OutsideTube("curve leaves the tube (|q| = " + std::to_string(std::abs(cp.q)) + ")",
                        f0.sigma(static_cast<int>(i)));
    if (!(cp.sigma > prev_sigma)) throw NonMonotone("curve is not a graph over the reference", cp.sigma);
    prev_sigma = cp.sigma;
  }

  CurveFn F(f0);
  HeightField h{chart, ref.sigma_grid(), ScalarField(n + 1), ScalarField(n + 1), 0.0, 0.0, 0.0, 0.0};
  const double tol = 1e-13 * std::max(1.0, L);
  Eigen::Vector2d x(0.0, (f0.front() - chart.phi(0.0)).dot(chart.fiber(0.0)) / chart.fiber(0.0).squaredNorm());
  for (int j = 0; j <= n; ++j) {
    const double s = h.sigma[j];
    if (j >= 2) x = Eigen::Vector2d(2 * h.phi[j - 1] - h.phi[j - 2], 2 * h.rho[j - 1] - h.rho[j - 2]);
    else if (j == 1) x = Eigen::Vector2d(h.phi[0] + 1.0 / n, h.rho[0]);
    const Point fib = chart.fiber(s), base = chart.phi(s);
    newton2(
        x, [&](const Eigen::Vector2d& v) -> Eigen::Vector2d { return F.value(v[0]) - base - v[1] * fib; },
        [&](const Eigen::Vector2d& v) {
          Eigen::Matrix2d A;
          A.col(0) = F.d1(v[0]);
          A.col(1) = -fib;
          return A;
        },
        tol);
    double res = (F.value(x[0]) - base - x[1] * fib).norm();
    if (!(res < 1e-10 * L)) throw NewtonDivergence("height extraction did not converge", s);
    if (std::abs(x[1]) >= d) throw OutsideTube("height reaches the tube width", s);
    h.phi[j] = x[0];
    h.rho[j] = x[1];
    h.residual = std::max(h.residual, res);
  }

  h.min_phi_step = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    double step = h.phi[j + 1] - h.phi[j];
    if (!(step > 0.0)) throw NonMonotone("reparametrization is not increasing", h.sigma[j]);
    h.min_phi_step = std::min(h.min_phi_step, step * n);
  }
  h.min_fiber_cos = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= n; ++j) {
    Point nf = rot90(F.d1(h.phi[j]).normalized());
    h.min_fiber_cos = std::min(h.min_fiber_cos, nf.dot(chart.fiber(h.sigma[j])));
  }
  auto dr = sigma_derivative(h.rho, 1.0 / n);
  h.compat = std::max(std::abs(dr.front()), std::abs(dr.back()));
  return h;
}

const Check* VerifyReport::find(const std::string& name) const {
  for (auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string VerifyReport::first_failure() const {
  for (auto& c : checks)
    if (!c.passed) return c.name;
  return {};
}

VerifyReport verify_reference(const ChartSpec& chart, const SampledCurve& f0, const VerifyOptions& opt) {
  VerifyReport rep;
  const double alpha = chart.alpha();
  rep.constants = chart.constants();
  if (opt.xi1_length) rep.constants.xi1 = xi1_factor(alpha) * *opt.xi1_length;
  const auto& K = rep.constants;
  auto add = [&](std::string name, double value, double limit, std::string note = {}) {
    rep.checks.push_back({std::move(name), value < limit, value, limit, std::move(note)});
  };

  add("endpoints_on_axis", std::max(std::abs(f0.front().y()), std::abs(f0.back().y())), 1e-8);
  add("contact_angle", endpoint_tangent_error(f0, alpha), opt.angle_tol);
  add("lambda_admissible", K.lambda, K.lambda_max);

  const auto& ref = chart.phi_star();
  const int n = ref.intervals();
  SampledCurve fa = resample_uniform_arclength(f0, n);
  double c0 = 0.0;
  for (int j = 0; j <= n; ++j) c0 = std::max(c0, (fa[j] - ref[j]).norm());
  add("c0_ball", c0, K.xi0);

  auto da = sigma_derivative(fa.points(), 1.0 / n), dr = sigma_derivative(ref.points(), 1.0 / n);
  double c1 = 0.0;
  for (int j = 0; j <= n; ++j) c1 = std::max(c1, (da[j] - dr[j]).norm());
  add("c1_ball", c1, K.xi1);

  // f0 stays above the axis where the reference is below level xi0
  {
    int x = -1, y = -1;
    for (int j = 0; j <= n; ++j)
      if (ref[j].y() >= K.xi0) {
        if (x < 0) x = j;
        y = j;
      }
    if (x < 0) {
      add("boundary_positivity", 1.0, 0.0, "reference never reaches level xi0");
    } else {
      double lo = std::numeric_limits<double>::infinity();
      for (int j = 1; j < x; ++j) lo = std::min(lo, fa[j].y());
      for (int j = y + 1; j < n; ++j) lo = std::min(lo, fa[j].y());
      if (std::isinf(lo)) rep.checks.push_back({"boundary_positivity", true, 0.0, 0.0, "no nodes below level xi0"});
      else add("boundary_positivity", -lo, 0.0, "value is -min y");
    }
  }

  try {
    HeightField h = extract_height(chart, f0);
    double rmax = 0.0;
    for (double r : h.rho) rmax = std::max(rmax, std::abs(r));
    add("tube_containment", rmax, K.lambda * K.d);
    add("height_extraction", h.residual, 1e-10 * chart.length());
    add("injectivity", 1.0 - h.min_fiber_cos, 0.5, "value is 1 - min <n_f0, dPsi/dq>");
    add("rho_bound", rmax, K.K0 / 3);
    if (K.cot_alpha != 0.0) {
      auto d = sigma_derivative(h.rho, 1.0 / n);
      double dmax = 0.0;
      for (double v : d) dmax = std::max(dmax, std::abs(v));
      add("drho_bound", dmax, K.K1 / 3);
    }
    rep.height = std::move(h);
  } catch (const OutsideTube& e) {
    rep.checks.push_back({"tube_containment", false, std::numeric_limits<double>::infinity(), K.lambda * K.d, e.what()});
  } catch (const NonMonotone& e) {
    rep.checks.push_back({"height_extraction", false, e.sigma, 0.0, e.what()});
  } catch (const NewtonDivergence& e) {
    rep.checks.push_back({"height_extraction", false, e.sigma, 0.0, e.what()});
  }

  rep.passed = std::all_of(rep.checks.begin(), rep.checks.end(), [](const Check& c) { return c.passed; });
  return rep;
}

}  // namespace curveflow
