#include "curveflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "curveflow/banded.hpp"
#include "curveflow/errors.hpp"

namespace curveflow {

void FlowConfig::validate() const {
  check_angle(alpha);
  if (n < SampledCurve::min_intervals) throw InvalidArgument("flow needs n >= 8");
  if (!(dt_min > 0.0 && dt_min <= dt_init)) throw InvalidArgument("need 0 < dt_min <= dt_init");
  if (!(kappa_l2_threshold > 0.0)) throw InvalidArgument("kappa_l2_threshold must be positive");
  if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be non-negative");
  if (dt_max != 0.0 && dt_max < dt_init) throw InvalidArgument("dt_max below dt_init");
  if (!(dt_growth >= 1.0)) throw InvalidArgument("dt_growth must be >= 1");
  if (redistribute_every < 1 || snapshot_stride < 1) throw InvalidArgument("strides must be positive");
  if (cfl < 0.0) throw InvalidArgument("cfl must be non-negative");
  if (!(max_kappa_change >= 0.0)) throw InvalidArgument("max_kappa_change must be non-negative");
}

void DiagnosticsRecord::append(const DiagRow& r) {
  if (!rows_.empty() && !(r.t > rows_.back().t)) throw InvalidArgument("diagnostic timestamps must increase");
  rows_.push_back(r);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::completed: return "completed";
    case Verdict::blowup_suspected: return "blowup_suspected";
    case Verdict::step_failure: return "step_failure";
  }
  return "?";
}

DiagRow measure(const SampledCurve& c, double alpha, double t, double dt) {
  DiagRow r;
  r.t = t;
  r.dt = dt;
  r.length = arclength(c);
  r.energy = r.length + std::cos(alpha) * (c.front().x() - c.back().x());
  r.area = enclosed_area(c);
  auto dd = differential_data(c);
  ScalarField k2(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    k2[j] = dd.kappa[j] * dd.kappa[j];
    r.kappa_max = std::max(r.kappa_max, std::abs(dd.kappa[j]));
  }
  r.kappa_l2 = std::sqrt(integrate_arclength(c, k2));
  r.res_y = std::max(std::abs(c.front().y()), std::abs(c.back().y()));
  r.angle_onesided = std::max((dd.tangent.front() - target_tangent_left(alpha)).norm(),
                              (dd.tangent.back() - target_tangent_right(alpha)).norm());
  return r;
}

FlowState init_state(const SampledCurve& curve, const FlowConfig& cfg) {
  cfg.validate();
  if (std::abs(curve.front().y()) > 1e-8 || std::abs(curve.back().y()) > 1e-8)
    throw IncompatibleInitialCurve("endpoints must lie on the x-axis within 1e-8");
  double terr = endpoint_tangent_error(curve, cfg.alpha);
  if (terr > 5e-2)
    throw IncompatibleInitialCurve("endpoint tangents miss (cos a, +-sin a) by " + std::to_string(terr) +
                                   " (tolerance 5e-2)");
  auto u = resample_uniform_arclength(curve, cfg.n);
  std::vector<Point> p = u.points();
  p.front().y() = 0.0;
  p.back().y() = 0.0;
  FlowState s;
  s.curve = SampledCurve(std::move(p));
  s.t = 0.0;
  s.dt = cfg.dt_init;
  s.diag.append(measure(s.curve, cfg.alpha, 0.0, 0.0));
  return s;
}

namespace {

struct Solved {
  SampledCurve curve;
  double res_angle;
  double res_dskappa;
};

// Mixed linearly implicit step. Unknowns (x, y, kappa) on nodes -1..n+1.
//   (X_{j+1} - 2X_j + X_{j-1})/h^2 + L^2 kappa_j n_j = 0
//   <X_j - X_j^old, g_j> - dt/(L h)^2 (kappa_{j+1} - 2 kappa_j + kappa_{j-1}) = 0
// with frame and L frozen at the old curve. The tangential part of the first
// equation equidistributes the nodes, which fixes the gauge. g_j is the polygon
// area gradient scaled by 1/(hL), a unit normal up to O(h^2); with it the
// trapezoid sum of the second equation is the linearised area change, and the
// kappa terms telescope to zero against the mirrored ghosts.
Solved implicit_solve(const SampledCurve& c, double alpha, double dt) {
  const int n = c.intervals();
  const double h = c.h();
  const double L = arclength(c);
  const auto& X = c.points();

  std::vector<Point> nrm(n + 1);
  for (int j = 1; j < n; ++j) nrm[j] = rot90((X[j + 1] - X[j - 1]).normalized());
  const Point tl = target_tangent_left(alpha), tr = target_tangent_right(alpha);
  nrm[0] = rot90(tl);
  nrm[n] = rot90(tr);

  const int N = 3 * (n + 3);
  auto idx = [](int j, int comp) { return 3 * (j + 1) + comp; };
  const double c2 = 1.0 / (h * h);
  const double f = dt / (L * L * h * h);

  // g is evaluated on the average of old and new polygon; the polygon area is
  // quadratic, so its change is then exactly the weighted sum that the kappa
  // terms cancel. A few fixed-point sweeps settle the nonlinearity.
  std::vector<Point> Y = X;
  std::vector<double> b;
  for (int sweep = 0; sweep < 12; ++sweep) {
    std::vector<Point> g(n + 1);
    auto mid = [&](int j) { return 0.5 * (X[j] + Y[j]); };
    for (int j = 1; j < n; ++j) g[j] = rot90(mid(j + 1) - mid(j - 1)) / (2.0 * h * L);
    g[0] = rot90(mid(1) - mid(0)) / (h * L);
    g[n] = rot90(mid(n) - mid(n - 1)) / (h * L);

    BandedMatrix A(N, 7, 6);
    b.assign(N, 0.0);
    for (int j = 0; j <= n; ++j) {
      for (int comp = 0; comp < 2; ++comp) {
        int row = idx(j, comp);
        A.add(row, idx(j + 1, comp), c2);
        A.add(row, idx(j, comp), -2.0 * c2);
        A.add(row, idx(j - 1, comp), c2);
        A.add(row, idx(j, 2), L * L * nrm[j][comp]);
      }
      int row = idx(j, 2);
      A.add(row, idx(j, 0), g[j].x());
      A.add(row, idx(j, 1), g[j].y());
      A.add(row, idx(j + 1, 2), -f);
      A.add(row, idx(j, 2), 2.0 * f);
      A.add(row, idx(j - 1, 2), -f);
      b[row] = X[j].dot(g[j]);
    }
    // boundary rows live in the ghost slots
    auto bc = [&](int ghost, int end, int inner, const Point& t) {
      const Point nu = rot90(t);
      A.add(idx(ghost, 0), idx(end, 1), 1.0);
      A.add(idx(ghost, 1), idx(inner, 0), nu.x());
      A.add(idx(ghost, 1), idx(inner, 1), nu.y());
      A.add(idx(ghost, 1), idx(ghost, 0), -nu.x());
      A.add(idx(ghost, 1), idx(ghost, 1), -nu.y());
      A.add(idx(ghost, 2), idx(inner, 2), 1.0);
      A.add(idx(ghost, 2), idx(ghost, 2), -1.0);
    };
    bc(-1, 0, 1, tl);
    bc(n + 1, n, n - 1, tr);

    A.solve(b);

    double change = 0.0;
    for (int j = 0; j <= n; ++j) {
      Point p(b[idx(j, 0)], b[idx(j, 1)]);
      if (!std::isfinite(p.x()) || !std::isfinite(p.y())) throw LinearSolveFailure("non-finite solution");
      change = std::max(change, (p - Y[j]).norm());
      Y[j] = p;
    }
    if (change < 1e-14 * L) break;
  }

  auto P = [&](int j) { return Point(b[idx(j, 0)], b[idx(j, 1)]); };
  auto K = [&](int j) { return b[idx(j, 2)]; };
  Y.front().y() = 0.0;
  Y.back().y() = 0.0;

  Solved s{SampledCurve(std::move(Y)), 0.0, 0.0};
  Point dl = (P(1) - P(-1)).normalized(), dr = (P(n + 1) - P(n - 1)).normalized();
  s.res_angle = std::max(std::abs(dl.dot(rot90(tl))), std::abs(dr.dot(rot90(tr))));
  s.res_dskappa = std::max(std::abs(K(1) - K(-1)), std::abs(K(n + 1) - K(n - 1))) / (2.0 * h * L);
  return s;
}

}  // namespace

SampledCurve explicit_step(const SampledCurve& c, double alpha, double dt) {
  const int n = c.intervals();
  const double h = c.h();
  auto dd = differential_data(c);
  const double L = arclength(c);
  // d_ss kappa with mirrored ghost values (d_s kappa = 0)
  std::vector<double> kss(n + 1);
  for (int j = 0; j <= n; ++j) {
    double km = dd.kappa[j == 0 ? 1 : j - 1], kp = dd.kappa[j == n ? n - 1 : j + 1];
    kss[j] = (kp - 2.0 * dd.kappa[j] + km) / (h * h * L * L);
  }
  std::vector<Point> p = c.points();
  for (int j = 1; j < n; ++j) p[j] += dt * kss[j] * dd.normal[j];
  // an endpoint sliding with speed u along the axis has normal speed u n_x
  Point nl = rot90(target_tangent_left(alpha)), nr = rot90(target_tangent_right(alpha));
  p[0].x() += dt * kss[0] / nl.x();
  p[n].x() += dt * kss[n] / nr.x();
  p[0].y() = 0.0;
  p[n].y() = 0.0;
  return SampledCurve(std::move(p));
}

void advance(FlowState& s, const FlowConfig& cfg, double dt_cap, StepReport* report) {
  const double alpha = cfg.alpha;
  const double E0 = s.diag.empty() ? energy(s.curve, alpha) : s.diag.back().energy;
  const double K0 = s.diag.empty() ? curvature_l2(s.curve) : s.diag.back().kappa_l2;
  const double dt_max = cfg.dt_max > 0.0 ? cfg.dt_max : cfg.dt_init;
  double dt = s.dt;
  StepReport rep;
  for (int attempt = 0; attempt <= 20; ++attempt) {
    if (dt < cfg.dt_min) throw StepFailure("time step fell below dt_min", s.t, dt);
    double used = (dt_cap > 0.0) ? std::min(dt, dt_cap) : dt;
    Solved sol{s.curve, 0.0, 0.0};
    bool ok = true;
    try {
      sol = implicit_solve(s.curve, alpha, used);
    } catch (const LinearSolveFailure&) {
      if (cfg.cfl <= 0.0) throw;
      // explicit substeps of size cfl (L/n)^4 covering the requested step
      double L = arclength(s.curve);
      double dte = cfg.cfl * std::pow(L * s.curve.h(), 4);
      int m = static_cast<int>(std::ceil(used / dte));
      if (m > 100000) throw;
      SampledCurve c = s.curve;
      for (int k = 0; k < m; ++k) c = explicit_step(c, alpha, used / m);
      sol.curve = c;
      rep.explicit_fallback = true;
    } catch (const DegenerateCurve&) {
      ok = false;
    }
    if (ok) {
      DiagRow row = measure(sol.curve, alpha, s.t + used, used);
      // a step that moves kappa_l2 too far is under-resolved near a singularity
      bool resolved = cfg.max_kappa_change <= 0.0 || std::abs(row.kappa_l2 - K0) <= cfg.max_kappa_change * K0;
      if (std::isfinite(row.energy) && row.energy <= E0 + 1e-10 * std::abs(E0) && resolved) {
        const long accepted = s.accepted + 1;
        bool redistribute = cfg.redistribution == Redistribution::every_step ||
                            accepted % cfg.redistribute_every == 0;
        if (redistribute) {
          std::vector<Point> p = resample_uniform_arclength(sol.curve, sol.curve.intervals()).points();
          p.front().y() = 0.0;
          p.back().y() = 0.0;
          sol.curve = SampledCurve(std::move(p));
          row = measure(sol.curve, alpha, s.t + used, used);
        }
        row.res_angle = sol.res_angle;
        row.res_dskappa = sol.res_dskappa;
        s.diag.append(row);
        s.curve = std::move(sol.curve);
        s.t += used;
        s.accepted = accepted;
        s.streak = attempt == 0 ? s.streak + 1 : 0;
        s.dt = (attempt == 0) ? std::min(dt * cfg.dt_growth, dt_max) : dt;
        rep.retries = attempt;
        if (report) *report = rep;
        return;
      }
    }
    dt *= 0.5;
  }
  throw StepFailure("step rejected after 20 halvings", s.t, dt);
}

FlowState step(const FlowState& s, const FlowConfig& cfg, double dt_cap, StepReport* report) {
  FlowState next = s;
  advance(next, cfg, dt_cap, report);
  return next;
}

BlowupVerdict detect_blowup(const DiagnosticsRecord& diag, const FlowConfig& cfg) {
  if (diag.empty()) throw InvalidArgument("empty diagnostics record");
  BlowupVerdict v;
  const auto& rows = diag.rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].kappa_l2 > cfg.kappa_l2_threshold) {
      v.verdict = Verdict::blowup_suspected;
      v.index = i;
      v.t = rows[i].t;
      return v;
    }
  }
  // a step accepted within one halving of dt_min means the next retry cannot succeed
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].dt > 0.0 && rows[i].dt < 2.0 * cfg.dt_min) {
      v.verdict = Verdict::step_failure;
      v.index = i;
      v.t = rows[i].t;
      return v;
    }
  }
  return v;
}

bool polyline_self_intersects(const SampledCurve& c) {
  const auto& p = c.points();
  const std::size_t m = p.size();
  auto cross = [](const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); };
  for (std::size_t i = 0; i + 1 < m; ++i) {
    Point lo = p[i].cwiseMin(p[i + 1]), hi = p[i].cwiseMax(p[i + 1]);
    for (std::size_t k = i + 2; k + 1 < m; ++k) {
      Point lo2 = p[k].cwiseMin(p[k + 1]), hi2 = p[k].cwiseMax(p[k + 1]);
      if ((lo2.array() > hi.array()).any() || (lo.array() > hi2.array()).any()) continue;
      Point r = p[i + 1] - p[i], q = p[k + 1] - p[k], w = p[k] - p[i];
      double den = cross(r, q);
      if (den == 0.0) continue;
      double a = cross(w, q) / den, b = cross(w, r) / den;
      if (a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) return true;
    }
  }
  return false;
}

RunResult run(const FlowState& s0, const FlowConfig& cfg) {
  cfg.validate();
  RunResult out;
  FlowState s = s0;
  if (s.dt <= 0.0) s.dt = cfg.dt_init;
  if (s.diag.empty()) s.diag.append(measure(s.curve, cfg.alpha, s.t, 0.0));
  auto snap = [&](const FlowState& st) {
    Snapshot sn{st.t, st.curve, st.diag.back(), polyline_self_intersects(st.curve)};
    if (sn.self_intersecting && (out.snapshots.empty() || !out.snapshots.back().self_intersecting))
      std::cerr << "warning: curve self-intersects at t=" << st.t << "\n";
    out.snapshots.push_back(std::move(sn));
  };
  snap(s);
  auto fired = [&](const FlowState& st) { return st.diag.back().kappa_l2 > cfg.kappa_l2_threshold; };
  if (fired(s)) {
    out.verdict = {Verdict::blowup_suspected, s.diag.size() - 1, s.t};
    out.final_state = s;
    out.message = "curvature norm above threshold at the initial state";
    return out;
  }
  long since = 0;
  const double eps_t = 1e-14 * std::max(1.0, cfg.t_end);
  while (s.t < cfg.t_end - eps_t) {
    FlowState before;
    before.curve = s.curve;
    before.t = s.t;
    before.dt = s.dt;
    before.accepted = s.accepted;
    before.diag.append(s.diag.back());
    try {
      advance(s, cfg, cfg.t_end - s.t);
    } catch (const StepFailure& e) {
      out.verdict = {Verdict::step_failure, s.diag.size() - 1, s.t};
      out.message = e.what();
      if (out.snapshots.back().t != s.t) snap(s);
      out.final_state = s;
      return out;
    }
    out.pre_trigger = std::move(before);
    if (fired(s)) {
      snap(s);
      out.verdict = {Verdict::blowup_suspected, s.diag.size() - 1, s.t};
      out.message = "curvature L2 norm crossed the threshold";
      out.final_state = s;
      return out;
    }
    if (++since % cfg.snapshot_stride == 0) snap(s);
  }
  if (out.snapshots.back().t != s.t) snap(s);
  out.verdict = detect_blowup(s.diag, cfg);
  out.final_state = s;
  out.pre_trigger.reset();
  return out;
}

}  // namespace curveflow
