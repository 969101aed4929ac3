#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "curveflow/errors.hpp"
#include "curveflow/flow.hpp"
#include "curveflow/seeds.hpp"
#include "support.hpp"

using namespace curveflow;
using std::numbers::pi;

namespace {

FlowConfig cfg_for(double alpha, double t_end, int n = 200, double dt = 1e-5) {
  FlowConfig c;
  c.alpha = alpha;
  c.n = n;
  c.dt_init = dt;
  c.dt_min = 1e-12;
  c.t_end = t_end;
  c.snapshot_stride = 50;
  return c;
}

double max_disp(const SampledCurve& a, const SampledCurve& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, (a[j] - b[j]).norm());
  return d;
}

}  // namespace

TEST_SUITE("flow") {

TEST_CASE("init_state accepts and rejects") {
  auto cfg = cfg_for(pi / 2, 1e-3);
  auto s = init_state(seeds::semicircle(200), cfg);
  CHECK(std::abs(s.diag.back().energy - pi) < 1e-3);
  CHECK(s.curve.front().y() == 0.0);
  CHECK(s.diag.size() == 1);
  CHECK_THROWS_AS(init_state(seeds::segment({-1, 0}, {1, 0}, 50), cfg), IncompatibleInitialCurve);
  std::vector<Point> p = seeds::semicircle(200).points();
  p.front().y() = 1e-3;
  p.back().y() = 1e-3;
  CHECK_THROWS_AS(init_state(SampledCurve(p), cfg), IncompatibleInitialCurve);
  FlowConfig bad = cfg;
  bad.dt_min = 1.0;
  CHECK_THROWS_AS(init_state(seeds::semicircle(200), bad), InvalidArgument);
}

TEST_CASE("semicircle is a discrete equilibrium") {
  auto cfg = cfg_for(pi / 2, 1e-3);
  auto s = init_state(seeds::semicircle(200), cfg);
  auto s1 = step(s, cfg);
  CHECK(max_disp(s.curve, s1.curve) < 1e-8);
  CHECK(s1.t == doctest::Approx(1e-5));
}

TEST_CASE("perturbed semicircle dissipates and conserves area per step") {
  auto cfg = cfg_for(pi / 2, 1e-2);
  auto s = init_state(seeds::bumped_cap(pi / 2, 800, 0.01), cfg);
  for (int k = 0; k < 50; ++k) {
    auto next = step(s, cfg);
    CHECK(next.diag.back().energy < s.diag.back().energy);
    CHECK(std::abs(next.diag.back().area - s.diag.back().area) < 1e-8);
    CHECK(next.diag.back().res_y == 0.0);
    CHECK(next.diag.back().res_angle < 1e-6);
    s = std::move(next);
  }
}

TEST_CASE("dt below dt_min fails") {
  auto cfg = cfg_for(pi / 2, 1e-3);
  auto s = init_state(seeds::bumped_cap(pi / 2, 400, 0.01), cfg);
  s.dt = 1e-13;
  CHECK_THROWS_AS(step(s, cfg), StepFailure);
}

TEST_CASE("run: equilibrium completes") {
  auto cfg = cfg_for(pi / 2, 1e-3);
  auto r = run(init_state(seeds::semicircle(200), cfg), cfg);
  CHECK(r.verdict.verdict == Verdict::completed);
  CHECK(r.final_state.t == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(r.snapshots.back().row.energy <= r.snapshots.front().row.energy);
}

TEST_CASE("run: perturbed semicircle relaxes toward the arc") {
  auto cfg = cfg_for(pi / 2, 1e-2);
  cfg.snapshot_stride = 20;
  auto r = run(init_state(seeds::bumped_cap(pi / 2, 800, 0.01), cfg), cfg);
  REQUIRE(r.verdict.verdict == Verdict::completed);
  std::vector<double> dev;
  for (const auto& sn : r.snapshots) {
    auto dd = differential_data(sn.curve);
    double m = 0.0;
    for (double k : dd.kappa) m = std::max(m, std::abs(k - 1.0));
    dev.push_back(m);
  }
  REQUIRE(dev.size() > 10);
  // allow a short transient over the first few snapshots
  for (std::size_t i = 3; i + 1 < dev.size(); ++i) CHECK(dev[i + 1] < dev[i]);
  CHECK(dev.back() < dev.front());
}

TEST_CASE("run: threshold fires at once") {
  auto cfg = cfg_for(pi / 2, 1e-3);
  cfg.kappa_l2_threshold = 0.1;
  auto r = run(init_state(seeds::semicircle(200), cfg), cfg);
  CHECK(r.verdict.verdict == Verdict::blowup_suspected);
  CHECK(*r.verdict.t == 0.0);
}

TEST_CASE("detect_blowup") {
  FlowConfig cfg;
  cfg.kappa_l2_threshold = 10.0;
  cfg.dt_min = 1e-9;
  DiagnosticsRecord d;
  double k = 1.0;
  for (int i = 0; i < 5; ++i, k *= 2) {
    DiagRow r;
    r.t = i;
    r.kappa_l2 = k;
    r.dt = 1e-3;
    d.append(r);
  }
  auto v = detect_blowup(d, cfg);
  CHECK(v.verdict == Verdict::blowup_suspected);
  CHECK(*v.index == 4);
  CHECK(*v.t == 4.0);

  DiagnosticsRecord flat;
  for (int i = 0; i < 5; ++i) {
    DiagRow r;
    r.t = i;
    r.kappa_l2 = 2.0;
    r.dt = 1e-3;
    flat.append(r);
  }
  CHECK(detect_blowup(flat, cfg).verdict == Verdict::completed);

  DiagnosticsRecord collapse;
  double dt = 1e-3;
  for (int i = 0; i < 25; ++i, dt *= 0.5) {
    DiagRow r;
    r.t = i;
    r.kappa_l2 = 2.0;
    r.dt = std::max(dt, 1.2e-9);
    collapse.append(r);
  }
  auto c = detect_blowup(collapse, cfg);
  CHECK(c.verdict == Verdict::step_failure);
  CHECK(c.verdict != Verdict::blowup_suspected);

  DiagRow r;
  r.t = 0.0;
  CHECK_THROWS_AS(collapse.append(r), InvalidArgument);
  CHECK_THROWS_AS(detect_blowup(DiagnosticsRecord{}, cfg), InvalidArgument);
}

TEST_CASE("explicit fallback step reduces energy") {
  auto c = resample_uniform_arclength(seeds::bumped_cap(pi / 2, 800, 0.05), 100);
  double L = arclength(c);
  double dt = 0.1 * std::pow(L / 100, 4);
  double E = energy(c, pi / 2);
  auto d = c;
  for (int k = 0; k < 20; ++k) d = explicit_step(d, pi / 2, dt);
  CHECK(energy(d, pi / 2) < E);
  CHECK(d.front().y() == 0.0);
}

TEST_CASE("self-intersection detector") {
  CHECK_FALSE(polyline_self_intersects(seeds::semicircle(100)));
  CHECK(polyline_self_intersects(seeds::looped_cap(pi / 4, 0.15, 0.4, 300)));
}

TEST_CASE("property: dissipation, conservation, length bound, residuals") {
  std::mt19937_64 rng(99173);
  for (int trial = 0; trial < 6; ++trial) {
    auto rc = testsupport::random_cap(rng, 0.08);
    auto cfg = cfg_for(rc.alpha, 2e-3, 120, 2e-5);
    cfg.snapshot_stride = 5;
    auto s = init_state(rc.curve(800), cfg);
    auto r = run(s, cfg);
    REQUIRE(r.verdict.verdict == Verdict::completed);
    const auto& rows = r.final_state.diag.rows();
    double L0 = rows.front().length, A0 = rows.front().area;
    double c = std::abs(std::cos(rc.alpha));
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i].energy <= rows[i - 1].energy + 1e-10 * std::abs(rows[i - 1].energy));
      CHECK(std::abs(rows[i].area - A0) <= 1e-6 * L0 * L0);
      CHECK(rows[i].res_y == 0.0);
      CHECK(rows[i].res_angle < 1e-6);
      CHECK(rows[i].res_dskappa < 1e-3 * rows[i].kappa_max / rows[i].length);
    }
    double Emin = rows.front().energy;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Emin = std::min(Emin, rows[i].energy);
      // L(t) <= E(t~)/(1-|cos a|) for all earlier t~; the tightest is the smallest earlier E
      CHECK(rows[i].length <= Emin / (1.0 - c) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("property: arcs at any angle are stationary") {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> ua(0.3, pi - 0.3);
  for (int trial = 0; trial < 5; ++trial) {
    double a = ua(rng);
    auto cfg = cfg_for(a, 1e-2, 200, 1e-4);
    auto s = init_state(seeds::cap(a, 200), cfg);
    auto r = run(s, cfg);
    double L = r.final_state.diag.rows().front().length;
    CHECK(max_disp(s.curve, r.final_state.curve) < 1e-7 * L * r.final_state.t);
  }
}

TEST_CASE("property: translation equivariance") {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 3; ++trial) {
    auto rc = testsupport::random_cap(rng, 0.08);
    double h = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    auto cfg = cfg_for(rc.alpha, 1e-3, 100, 2e-5);
    auto c = rc.curve(600);
    auto r1 = run(init_state(c, cfg), cfg);
    auto r2 = run(init_state(translate(c, h), cfg), cfg);
    REQUIRE(r1.snapshots.size() == r2.snapshots.size());
    for (std::size_t k = 0; k < r1.snapshots.size(); ++k)
      CHECK(max_disp(translate(r1.snapshots[k].curve, h), r2.snapshots[k].curve) < 1e-10);
  }
}

}
