#include "curveflow/lab.hpp"

#include <algorithm>
#include <cmath>

#include "curveflow/errors.hpp"
#include "curveflow/spline.hpp"

#include <Eigen/Geometry>

namespace curveflow {

namespace {

// fine cells per output cell in the reconstruction
constexpr int kRefine = 16;

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

double point_segment(const Point& p, const Point& a, const Point& b) {
  Point ab = b - a;
  double l2 = ab.squaredNorm();
  double t = l2 > 0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

double directed(const SampledCurve& a, const SampledCurve& b) {
  double worst = 0.0;
  for (const auto& p : a.points()) {
    double best = INFINITY;
    for (std::size_t j = 0; j + 1 < b.size(); ++j) best = std::min(best, point_segment(p, b[j], b[j + 1]));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const SampledCurve& a, const SampledCurve& b) {
  return std::max(directed(a, b), directed(b, a));
}

namespace {

// Parameters of the spline (knots on the uniform sigma grid) at M+1 equal arc-length
// stations; cum receives the cumulative length at the knots.
std::vector<double> arc_stations(const CubicSpline2& sp, int n, int M, std::vector<double>& cum) {
  cum.assign(n + 1, 0.0);
  for (int j = 0; j < n; ++j) cum[j + 1] = cum[j] + sp.length(static_cast<double>(j) / n, static_cast<double>(j + 1) / n);
  const double L = cum[n];
  std::vector<double> sig(M + 1);
  sig[0] = 0.0;
  sig[M] = 1.0;
  for (int k = 1; k < M; ++k) {
    double target = L * k / M;
    int j = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()) - 1;
    j = std::clamp(j, 0, n - 1);
    double a = static_cast<double>(j) / n, b = static_cast<double>(j + 1) / n;
    double u = a + (b - a) * (target - cum[j]) / (cum[j + 1] - cum[j]);
    for (int it = 0; it < 30; ++it) {
      double g = cum[j] + sp.length(a, u) - target;
      double du = g / sp.d1(u).norm();
      u = std::clamp(u - du, a, b);
      if (std::abs(du) < 1e-15) break;
    }
    sig[k] = u;
  }
  return sig;
}

}  // namespace

SampledCurve reparametrize_arclength(const SampledCurve& c) {
  differential_data(c);
  const int n = c.intervals();
  CubicSpline2 sp(c.sigma_grid(), c.points(), SplineEnd::not_a_knot);
  std::vector<double> cum;
  auto sig = arc_stations(sp, n, n, cum);
  std::vector<Point> out(n + 1);
  for (int j = 0; j <= n; ++j) out[j] = sp.value(sig[j]);
  out[0] = c.front();
  out[n] = c.back();
  return SampledCurve(std::move(out));
}

SampledCurve reconstruct_arclength(const SampledCurve& c) {
  differential_data(c);  // regularity
  const int n = c.intervals();
  CubicSpline2 sp(c.sigma_grid(), c.points(), SplineEnd::not_a_knot);

  // curve parameter at fine arc-length stations
  const int M = kRefine * n;
  std::vector<double> cum;
  auto sig = arc_stations(sp, n, M, cum);
  const double L = cum[n];

  // unit curvature vector d^2 f / d(arc)^2 at the stations
  std::vector<Point> kv(M + 1);
  for (int k = 0; k <= M; ++k) {
    Point d1 = sp.d1(sig[k]), d2 = sp.d2(sig[k]);
    Point t = d1.normalized();
    kv[k] = (d2 - d2.dot(t) * t) / d1.squaredNorm();
  }

  // tau(s) = tau(0) + int_0^s kvec L dy;  f(s) = L int_0^s tau
  const double h = 1.0 / M;
  std::vector<Point> tau(M + 1), f(M + 1);
  tau[0] = sp.d1(0.0).normalized();
  f[0] = Point::Zero();
  for (int k = 0; k < M; ++k) {
    tau[k + 1] = tau[k] + 0.5 * h * L * (kv[k] + kv[k + 1]);
    tau[k + 1].normalize();  // |tau| = 1 exactly; the quadrature only drifts it by O(h^2)
  }
  for (int k = 0; k < M; ++k) {
    // trapezoid with the end correction; tau' = L kvec is known
    Point inc = 0.5 * h * (tau[k] + tau[k + 1]) - h * h / 12.0 * L * (kv[k + 1] - kv[k]);
    f[k + 1] = f[k] + L * inc;
  }

  // quadrature error turns the end chord slightly; a rigid turn about f(0) restores its direction
  const Point chord = c.back() - c.front();
  const double turn = std::atan2(chord.y(), chord.x()) - std::atan2(f[M].y(), f[M].x());
  const Eigen::Rotation2Dd rot(turn);
  std::vector<Point> out(n + 1);
  for (int j = 0; j <= n; ++j) out[j] = rot * f[j * kRefine] + c.front();
  out[0] = c.front();
  return SampledCurve(std::move(out));
}

SampledCurve RestartPrep::restarted() const { return reparametrize_arclength(height.build()); }

RestartPrep restart_prepare(const FlowState& state, const FlowConfig& cfg, const ScanSettings& scan) {
  if (polyline_self_intersects(state.curve))
    throw NotReadyForRestart("curve self-intersects at t=" + std::to_string(state.t) + "; no graph representation");
  if (scan.epsilons.empty()) throw InvalidArgument("empty epsilon scan");

  SampledCurve ft = reconstruct_arclength(state.curve);

  // W^2_2 audit on I = (0,1): spline derivatives, 5-point Gauss per cell
  static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665, 0.2369268850561891};
  const int n = ft.intervals();
  CubicSpline2 fsp(ft.sigma_grid(), ft.points(), SplineEnd::not_a_knot);
  double s1 = 0.0, s2 = 0.0;
  for (int j = 0; j < n; ++j)
    for (int q = 0; q < 5; ++q) {
      double u = (j + 0.5 * (1 + gx[q])) / n, w = 0.5 * gw[q] / n;
      s1 += w * fsp.d1(u).squaredNorm();
      s2 += w * fsp.d2(u).squaredNorm();
    }
  const double L = arclength(state.curve);

  std::vector<ScanEntry> entries;
  for (double eps : scan.epsilons) {
    try {
      auto ref = smooth(build_corrector(ft, scan.mu), eps, scan.smooth);
      ChartSpec chart(ref, cfg.alpha, scan.chart);
      auto rep = verify_reference(chart, ft, scan.verify);
      entries.push_back({eps, rep.passed, rep.first_failure()});
      if (rep.passed && rep.height) {
        RestartPrep out{ft, eps, *rep.height, rep, std::move(entries)};
        out.length = L;
        out.ds_l2 = std::sqrt(s1);
        out.tangent_l2_arc = std::sqrt(s1 / L);
        out.dss_l2 = std::sqrt(s2);
        out.dss_expected = std::pow(L, 1.5) * curvature_l2(state.curve);
        return out;
      }
    } catch (const Error& e) {
      entries.push_back({eps, false, e.what()});
    }
  }
  std::string msg = "no epsilon in the scan gives an admissible reference:";
  for (auto& e : entries) msg += " [" + std::to_string(e.epsilon) + ": " + e.failure + "]";
  throw NoAdmissibleEpsilon(msg);
}

namespace {

Trajectory from_run(RunResult&& r, double alpha) {
  Trajectory tr;
  tr.alpha = alpha;
  tr.snapshots = std::move(r.snapshots);
  tr.diag = r.final_state.diag.rows();
  tr.verdict = r.verdict;
  tr.message = r.message;
  tr.final_state = std::move(r.final_state);
  return tr;
}

}  // namespace

Trajectory extend_run(const RunManifest& m) { return extend_run(make_seed(m), m); }

Trajectory extend_run(const SampledCurve& seed, const RunManifest& m) {
  const FlowConfig& cfg = m.flow;
  FlowState s0 = init_state(seed, cfg);

  if (m.restart.policy == RestartPolicy::never) return from_run(run(s0, cfg), cfg.alpha);

  FlowState pre;
  RunResult first;
  if (m.restart.policy == RestartPolicy::at_time) {
    FlowConfig c1 = cfg;
    c1.t_end = m.restart.at;
    first = run(s0, c1);
    if (first.verdict.verdict != Verdict::completed) {
      auto tr = from_run(std::move(first), cfg.alpha);
      tr.message += " (before the scheduled restart)";
      return tr;
    }
    pre = first.final_state;
  } else {
    first = run(s0, cfg);
    if (first.verdict.verdict != Verdict::blowup_suspected || !first.pre_trigger) return from_run(std::move(first), cfg.alpha);
    pre = *first.pre_trigger;
  }

  std::optional<RestartPrep> prep_opt;
  if (m.restart.policy == RestartPolicy::on_blowup_suspect) {
    // a suspected singularity may leave nothing to restart from; keep the verdict and say why
    try {
      prep_opt.emplace(restart_prepare(pre, cfg, m.scan));
    } catch (const NotReadyForRestart& e) {
      auto out = from_run(std::move(first), cfg.alpha);
      out.message += "; restart declined: " + std::string(e.what());
      return out;
    } catch (const NoAdmissibleEpsilon& e) {
      auto out = from_run(std::move(first), cfg.alpha);
      out.message += "; restart declined: " + std::string(e.what());
      return out;
    }
  } else {
    prep_opt.emplace(restart_prepare(pre, cfg, m.scan));
  }
  const RestartPrep& prep = *prep_opt;

  Trajectory tr;
  tr.alpha = cfg.alpha;
  for (auto& sn : first.snapshots)
    if (sn.t <= pre.t) tr.snapshots.push_back(std::move(sn));
  if (tr.snapshots.empty() || tr.snapshots.back().t != pre.t)
    tr.snapshots.push_back({pre.t, pre.curve, pre.diag.back(), polyline_self_intersects(pre.curve)});
  for (const auto& row : first.final_state.diag.rows())
    if (row.t <= pre.t) tr.diag.push_back(row);


  FlowState s2 = init_state(prep.restarted(), cfg);
  s2.t = pre.t;
  s2.diag = DiagnosticsRecord{};  // run() re-measures at the seam time
  s2.dt = pre.dt;
  s2.accepted = pre.accepted;
  s2.streak = pre.streak;
  RunResult second = run(s2, cfg);

  Seam seam;
  seam.t = pre.t;
  seam.diag_index = tr.diag.size();
  seam.snapshot_index = tr.snapshots.size();
  seam.epsilon = prep.epsilon;
  seam.constants = prep.report.constants;
  seam.checks = prep.report.checks;
  seam.scan = prep.scan;
  const DiagRow& a = tr.diag.back();
  const DiagRow& b = second.final_state.diag.rows().front();
  seam.jump_energy = rel(a.energy, b.energy);
  seam.jump_length = rel(a.length, b.length);
  seam.jump_area = rel(a.area, b.area);
  seam.jump_kappa_l2 = rel(a.kappa_l2, b.kappa_l2);
  seam.abs_jump_area = std::abs(a.area - b.area);
  seam.hausdorff = hausdorff_distance(pre.curve, second.snapshots.front().curve);

  bool firstrow = true;
  for (DiagRow row : second.final_state.diag.rows()) {
    row.seam = firstrow;
    firstrow = false;
    tr.diag.push_back(row);
  }
  firstrow = true;
  for (auto& sn : second.snapshots) {
    sn.row.seam = firstrow;
    firstrow = false;
    tr.snapshots.push_back(std::move(sn));
  }
  tr.seams.push_back(std::move(seam));
  tr.verdict = second.verdict;
  if (tr.verdict.index) *tr.verdict.index += tr.seams.back().diag_index;
  tr.message = second.message;
  tr.final_state = std::move(second.final_state);
  return tr;
}

int exit_code(const Verdict& v) {
  switch (v) {
    case Verdict::completed: return 0;
    case Verdict::blowup_suspected: return 2;
    case Verdict::step_failure: return 3;
  }
  return 1;
}

}  // namespace curveflow
