#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "curveflow/curve.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/seeds.hpp"
#include "support.hpp"

using namespace curveflow;
using std::numbers::pi;

TEST_SUITE("curve") {

TEST_CASE("semicircle curvature and tangent") {
  auto c = seeds::semicircle(200);
  auto dd = differential_data(c);
  double err = 0.0;
  for (double k : dd.kappa) err = std::max(err, std::abs(k - 1.0));
  CHECK(err < 1e-3);
  CHECK(dd.tangent.front().x() == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(dd.tangent.front().y() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(dd.tangent.front().x()) < 1e-3);
}

TEST_CASE("segment is flat") {
  auto c = seeds::segment({0, 0}, {1, 0}, 50);
  auto dd = differential_data(c);
  for (std::size_t j = 0; j < c.size(); ++j) {
    CHECK(std::abs(dd.kappa[j]) < 1e-12);
    CHECK((dd.tangent[j] - Point(1, 0)).norm() < 1e-12);
    CHECK((dd.normal[j] - Point(0, 1)).norm() < 1e-12);
  }
}

TEST_CASE("ellipse arc apex curvature matches closed form") {
  // x = 2 cos t, y = sin t runs right to left, so it turns counterclockwise and
  // carries negative curvature here; |kappa| = ab / (a^2 sin^2 + b^2 cos^2)^{3/2}
  auto c = seeds::ellipse_arc(2.0, 1.0, pi / 4, 3 * pi / 4, 400);
  auto dd = differential_data(c);
  double exact = 2.0 / std::pow(4.0, 1.5);
  CHECK(dd.kappa[200] == doctest::Approx(-exact).epsilon(1e-3));
  for (int j : {0, 37, 123, 311, 400}) {
    double t = pi / 4 + (pi / 2) * j / 400.0;
    double e = 2.0 / std::pow(4.0 * std::sin(t) * std::sin(t) + std::cos(t) * std::cos(t), 1.5);
    CHECK(std::abs(dd.kappa[j] + e) < 1e-3);
  }
}

TEST_CASE("degenerate metric is rejected") {
  std::vector<Point> p(20, Point(1.0, 0.0));
  CHECK_THROWS_AS(differential_data(SampledCurve(p)), DegenerateCurve);
  CHECK_THROWS_AS(SampledCurve(std::vector<Point>(5, Point(0, 0))), InvalidCurve);
}

TEST_CASE("arclength") {
  CHECK(std::abs(arclength(seeds::semicircle(200)) - pi) < 1e-4);
  CHECK(std::abs(arclength(seeds::segment({0, 0}, {1, 0}, 64)) - 1.0) < 1e-14);
  auto quarter = seeds::ellipse_arc(2.0, 2.0, 0.0, pi / 2, 200);
  CHECK(std::abs(arclength(quarter) - pi) < 1e-4);
}

TEST_CASE("energy") {
  auto semi = seeds::semicircle(200);
  CHECK(energy(semi, pi / 2) == doctest::Approx(arclength(semi)).epsilon(1e-14));
  CHECK(std::abs(energy(semi, pi / 2) - pi) < 1e-4);
  auto seg = seeds::segment({1, 0}, {-1, 0}, 20);
  CHECK(energy(seg, pi / 3) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(std::abs(energy(semi, pi / 4) - (pi - std::sqrt(2.0))) < 1e-4);
  CHECK_THROWS_AS(energy(semi, 0.0), InvalidAngle);
  CHECK_THROWS_AS(energy(semi, pi), InvalidAngle);
}

TEST_CASE("curvature L2 norm") {
  CHECK(std::abs(curvature_l2(seeds::semicircle(200)) - std::sqrt(pi)) < 1e-3);
  CHECK(curvature_l2(seeds::segment({0, 0}, {1, 0}, 20)) < 1e-12);
  double r = 0.7, th = 2.0;
  auto arc = seeds::ellipse_arc(r, r, 0.3, 0.3 + th, 300);
  CHECK(std::abs(curvature_l2(arc) - std::sqrt(th / r)) < 1e-3);
}

TEST_CASE("kappabound ratio") {
  auto semi = seeds::semicircle(200);
  CHECK(std::abs(kappabound_ratio(semi, pi / 2) - std::sqrt(2.0) / pi) < 1e-4);
  CHECK(kappabound_ratio(seeds::cap(pi / 4, 200), pi / 4) <= 1.0);
  CHECK_THROWS_AS(kappabound_ratio(seeds::segment({0, 0}, {1, 0}, 20), pi / 2), AngleMismatch);
  // sharper wiggles at nearly fixed length drive the ratio down
  double prev = 1e300;
  for (int k : {2, 4, 8, 16}) {
    auto c = seeds::cap(pi / 2, 800, 1.0, [k](double s) {
      double q = std::sin(k * pi * s);
      return 1.0 + 0.002 * q * q;
    });
    double r = kappabound_ratio(c, pi / 2);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("enclosed area") {
  CHECK(std::abs(enclosed_area(seeds::semicircle(200)) - pi / 2) < 1e-4);
  CHECK(std::abs(enclosed_area(seeds::segment({0, 0}, {1, 0}, 20))) < 1e-15);
  auto tri = seeds::polyline({{0, 0}, {0.5, 1}, {1, 0}}, 400);
  CHECK(std::abs(enclosed_area(tri) - 0.5) < 1e-3);
  auto lifted = seeds::segment({0, 1e-3}, {1, 0}, 20);
  CHECK_THROWS_AS(enclosed_area(lifted), EndpointsOffAxis);
}

TEST_CASE("uniform resampling") {
  auto semi = seeds::semicircle(200);
  auto again = resample_uniform_arclength(semi, 200);
  double d = 0.0;
  for (std::size_t j = 0; j < semi.size(); ++j) d = std::max(d, (semi[j] - again[j]).norm());
  CHECK(d < 1e-10);

  // angle t = pi (1 - s) - 0.4 sin(pi s) ... monotone, clearly non-uniform
  std::vector<Point> p(801);
  for (int j = 0; j <= 800; ++j) {
    double s = j / 800.0;
    double t = pi * (1.0 - s) - 0.4 * std::sin(2 * pi * s);
    p[j] = Point(std::cos(t), std::sin(t));
  }
  p.front().y() = 0.0;
  p.back().y() = 0.0;
  SampledCurve nonuni(p);
  auto u = resample_uniform_arclength(nonuni, 200);
  auto dd = differential_data(u);
  double L = arclength(u);
  CHECK(std::abs(L - pi) < 1e-4);
  double dev = 0.0;
  for (double g : dd.metric) dev = std::max(dev, std::abs(g - L) / L);
  CHECK(dev < 1e-3);
  CHECK(std::abs(arclength(nonuni) - L) < 1e-6);
  CHECK((u.front() - nonuni.front()).norm() == 0.0);
  CHECK((u.back() - nonuni.back()).norm() == 0.0);

  // exact inverse of the arc-length map for the circle: node k sits at angle pi (1 - k/n)
  double worst = 0.0;
  for (int k = 0; k <= 200; ++k) {
    double t = pi * (1.0 - k / 200.0);
    worst = std::max(worst, (u[k] - Point(std::cos(t), std::sin(t))).norm());
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("metric deviation after resampling is second order") {
  auto dev = [](int n) {
    auto c = resample_uniform_arclength(seeds::bumped_cap(pi / 3, 1600, 0.2), n);
    auto dd = differential_data(c);
    double L = arclength(c), m = 0.0;
    for (double g : dd.metric) m = std::max(m, std::abs(g - L) / L);
    return m;
  };
  double a = dev(100), b = dev(200), c = dev(400);
  CHECK(std::log2(a / b) > 1.8);
  CHECK(std::log2(b / c) > 1.8);
}

TEST_CASE("translate") {
  auto semi = seeds::semicircle(200, 1.0, 3.0);
  CHECK((semi.front() - Point(2, 0)).norm() < 1e-15);
  CHECK((semi.back() - Point(4, 0)).norm() < 1e-15);
  auto base = seeds::semicircle(200);
  auto moved = translate(base, 3.0);
  CHECK(energy(moved, pi / 3) == doctest::Approx(energy(base, pi / 3)).epsilon(1e-12));
  auto same = translate(base, 0.0);
  for (std::size_t j = 0; j < base.size(); ++j) CHECK(same[j] == base[j]);

  // nodes on a dyadic lattice make the shift exact, so kappa must agree to rounding of the stencil only
  std::vector<Point> q = base.points();
  for (auto& v : q) v = (v * std::ldexp(1.0, 30)).array().round().matrix() * std::ldexp(1.0, -30);
  SampledCurve lattice(q);
  auto k0 = differential_data(lattice).kappa;
  auto k1 = differential_data(translate(lattice, 3.0)).kappa;
  for (std::size_t j = 0; j < k0.size(); ++j) CHECK(std::abs(k0[j] - k1[j]) < 1e-14);
  CHECK(enclosed_area(translate(lattice, 3.0)) == doctest::Approx(enclosed_area(lattice)).epsilon(1e-12));
}

TEST_CASE("curvature converges at second order on the semicircle") {
  auto err = [](int n) {
    auto dd = differential_data(seeds::semicircle(n));
    double e = 0.0;
    for (double k : dd.kappa) e = std::max(e, std::abs(k - 1.0));
    return e;
  };
  double prev = err(100);
  for (int n : {200, 400, 800, 1600}) {
    double e = err(n);
    CHECK(std::log2(prev / e) >= 1.9);
    prev = e;
  }
}

TEST_CASE("property: frame is orthonormal") {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 40; ++trial) {
    auto c = testsupport::random_cap(rng, 0.2).curve(50 + static_cast<int>(rng() % 300));
    auto dd = differential_data(c);
    for (std::size_t j = 0; j < c.size(); ++j) {
      CHECK(std::abs(dd.tangent[j].norm() - 1.0) < 1e-12);
      CHECK(std::abs(dd.normal[j].norm() - 1.0) < 1e-12);
      CHECK(std::abs(dd.tangent[j].dot(dd.normal[j])) < 1e-12);
    }
  }
}

TEST_CASE("property: reparametrization invariance") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 25; ++trial) {
    auto rc = testsupport::random_cap(rng, 0.1);
    auto c = rc.curve(1200);
    int n = 150 + static_cast<int>(rng() % 400);
    auto r = resample_uniform_arclength(c, n);
    double L = arclength(c), L2 = arclength(r);
    double E = energy(c, rc.alpha), E2 = energy(r, rc.alpha);
    CHECK(std::abs(L - L2) / L < 1e-5);
    CHECK(std::abs(E - E2) / std::abs(E) < 1e-5);
    CHECK(std::abs(enclosed_area(c) - enclosed_area(r)) < 1e-5 * L * L);
  }
}

TEST_CASE("property: kappabound audit") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 40; ++trial) {
    auto rc = testsupport::random_cap(rng, 0.15);
    auto c = resample_uniform_arclength(rc.curve(800), 300);
    CHECK(kappabound_ratio(c, rc.alpha) <= 1.0 + 1e-2);
  }
}

TEST_CASE("csv round trip") {
  auto c = seeds::bumped_cap(1.1, 40, 0.1);
  auto path = (std::filesystem::temp_directory_path() / "curveflow_curve_rt.csv").string();
  write_curve_csv(c, path);
  auto d = read_curve_csv(path);
  std::filesystem::remove(path);
  REQUIRE(d.size() == c.size());
  for (std::size_t j = 0; j < c.size(); ++j) CHECK((c[j] - d[j]).norm() == 0.0);
}

}
