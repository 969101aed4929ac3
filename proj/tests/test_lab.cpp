#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <random>
#include <sstream>

#include "curveflow/errors.hpp"
#include "curveflow/lab.hpp"
#include "curveflow/seeds.hpp"
#include "support.hpp"

using namespace curveflow;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

double max_node_gap(const SampledCurve& a, const SampledCurve& b) {
  REQUIRE(a.size() == b.size());
  double e = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) e = std::max(e, (a[j] - b[j]).norm());
  return e;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("curveflow_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunManifest perturbed_manifest(double t_end) {
  RunManifest m;
  m.flow.alpha = pi / 2;
  m.flow.n = 100;
  m.flow.dt_init = 1e-5;
  m.flow.t_end = t_end;
  m.flow.snapshot_stride = 40;
  m.seed.kind = "bumped_cap";
  m.seed.bump = 0.01;
  return m;
}

// subset of JSON Schema: type, required, properties, items
void validate_schema(const nlohmann::json& v, const nlohmann::json& s, const std::string& path) {
  auto type_ok = [&](const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "null") return v.is_null();
    return false;
  };
  if (s.contains("type")) {
    bool ok = false;
    if (s["type"].is_array()) {
      for (auto& t : s["type"]) ok = ok || type_ok(t.get<std::string>());
    } else {
      ok = type_ok(s["type"].get<std::string>());
    }
    INFO(path);
    REQUIRE(ok);
  }
  if (v.is_object()) {
    if (s.contains("required"))
      for (auto& k : s["required"]) {
        INFO(path << "." << k.get<std::string>());
        REQUIRE(v.contains(k.get<std::string>()));
      }
    if (s.contains("properties"))
      for (auto& [k, sub] : s["properties"].items())
        if (v.contains(k)) validate_schema(v[k], sub, path + "." + k);
  }
  if (v.is_array() && s.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i) validate_schema(v[i], s["items"], path + "[" + std::to_string(i) + "]");
}

}  // namespace

TEST_SUITE("lab") {

TEST_CASE("reconstruction of the semicircle") {
  auto sc = seeds::semicircle(200);
  auto ft = reconstruct_arclength(sc);
  double e = 0.0;
  for (int k = 0; k <= 200; ++k) e = std::max(e, (ft[k] - Point(-std::cos(pi * k / 200), std::sin(pi * k / 200))).norm());
  CHECK(e < 1e-6);
  // re-anchored: translate the circle and the reconstruction follows
  auto shifted = reconstruct_arclength(translate(sc, 2.5));
  CHECK(max_node_gap(shifted, translate(ft, 2.5)) < 1e-12);
}

TEST_CASE("reconstruction inverts differentiation on uniform curves") {
  auto c = reparametrize_arclength(seeds::bumped_cap(pi / 3, 200, 0.05));
  c = translate(c, -c.front().x());
  REQUIRE(c.front().norm() == 0.0);
  CHECK(max_node_gap(reconstruct_arclength(c), c) < 1e-6);
}

TEST_CASE("property: reconstruction agrees with uniform resampling") {
  std::mt19937_64 rng(0x1ab5);
  for (int trial = 0; trial < 12; ++trial) {
    auto cap = testsupport::random_cap(rng, 0.08);
    auto c = cap.curve(160);
    double L = arclength(c);
    auto ft = reconstruct_arclength(c);
    CHECK(max_node_gap(ft, resample_uniform_arclength(c, 160)) < 1e-5 * L);
    CHECK(ft.front() == c.front());
    CHECK(std::abs(ft.back().y()) < 1e-12);
    CHECK(std::abs(arclength(ft) - L) < 1e-7 * L);
  }
}

TEST_CASE("W22 audit identities") {
  FlowConfig cfg;
  auto st = init_state(seeds::semicircle(200), cfg);
  auto prep = restart_prepare(st, cfg);
  CHECK(prep.tangent_l2_arc == doctest::Approx(std::sqrt(pi)).epsilon(1e-4));
  CHECK(prep.ds_l2 == doctest::Approx(pi).epsilon(1e-6));
  CHECK(prep.ds_l2 == doctest::Approx(prep.length).epsilon(1e-6));
  CHECK(prep.dss_l2 == doctest::Approx(prep.dss_expected).epsilon(1e-3));
  CHECK(prep.dss_l2 == doctest::Approx(std::pow(pi, 2)).epsilon(1e-3));
}

TEST_CASE("restart_prepare after relaxation") {
  auto m = perturbed_manifest(2e-3);
  auto r = run(init_state(make_seed(m), m.flow), m.flow);
  REQUIRE(r.verdict.verdict == Verdict::completed);
  auto prep = restart_prepare(r.final_state, m.flow);
  CHECK(prep.report.passed);
  REQUIRE(!prep.scan.empty());
  CHECK(prep.scan.back().passed);
  CHECK(prep.scan.back().epsilon == prep.epsilon);
  bool in_scan = false;
  for (double e : ScanSettings{}.epsilons) in_scan = in_scan || e == prep.epsilon;
  CHECK(in_scan);
  CHECK(prep.height.residual < 1e-10);
  // the restart curve is the arc-length reconstruction, up to the chart round trip
  double L = prep.length;
  CHECK(hausdorff_distance(prep.restarted(), r.final_state.curve) < 1e-5 * L);
  CHECK(max_node_gap(prep.restarted(), prep.f_tilde) < 1e-5 * L);
}

TEST_CASE("restart_prepare failures") {
  FlowConfig cfg;
  cfg.alpha = pi / 4;
  cfg.n = 200;
  auto looped = init_state(seeds::looped_cap(pi / 4, 0.15, 0.4, 200), cfg);
  CHECK_THROWS_AS(restart_prepare(looped, cfg), NotReadyForRestart);

  // a smoothing time this large flattens the reference out of the C0 ball
  FlowConfig c2;
  auto st = init_state(seeds::bumped_cap(pi / 2, 100, 0.2), c2);
  ScanSettings scan;
  scan.epsilons = {1e-1};
  try {
    restart_prepare(st, c2, scan);
    FAIL("expected NoAdmissibleEpsilon");
  } catch (const NoAdmissibleEpsilon& e) {
    CHECK(std::string(e.what()).find("0.1") != std::string::npos);
  }
}

TEST_CASE("extend_run: policy never is run") {
  auto m = perturbed_manifest(1e-3);
  auto tr = extend_run(m);
  auto r = run(init_state(make_seed(m), m.flow), m.flow);
  REQUIRE(tr.diag.size() == r.final_state.diag.size());
  for (std::size_t i = 0; i < tr.diag.size(); ++i) {
    CHECK(tr.diag[i].t == r.final_state.diag.rows()[i].t);
    CHECK(tr.diag[i].energy == r.final_state.diag.rows()[i].energy);
  }
  CHECK(tr.seams.empty());
  CHECK(max_node_gap(tr.final_state.curve, r.final_state.curve) == 0.0);
}

TEST_CASE("extend_run: equilibrium restart") {
  RunManifest m;
  m.flow.t_end = 1e-3;
  m.restart.policy = RestartPolicy::at_time;
  m.restart.at = 5e-4;
  auto tr = extend_run(m);
  REQUIRE(tr.seams.size() == 1);
  const auto& s = tr.seams[0];
  CHECK(s.t == doctest::Approx(5e-4));
  double e_before = tr.diag[s.diag_index - 1].energy, e_after = tr.diag[s.diag_index].energy;
  CHECK(std::abs(e_after - e_before) < 1e-6);
  CHECK(tr.diag[s.diag_index].seam);
  CHECK(tr.diag[s.diag_index].t == tr.diag[s.diag_index - 1].t);
  CHECK(tr.snapshots[s.snapshot_index].row.t == s.t);
  for (std::size_t i = 1; i < tr.diag.size(); ++i) CHECK(tr.diag[i].t >= tr.diag[i - 1].t);
  CHECK(tr.verdict.verdict == Verdict::completed);
  CHECK(tr.diag.back().t == doctest::Approx(1e-3));
}

TEST_CASE("extend_run: mid-run restart of the perturbed semicircle") {
  auto m = perturbed_manifest(2e-3);
  auto plain = extend_run(m);
  m.restart.policy = RestartPolicy::at_time;
  m.restart.at = 1e-3;
  auto tr = extend_run(m);
  REQUIRE(tr.seams.size() == 1);
  const auto& s = tr.seams[0];
  double L = tr.diag[s.diag_index].length;
  CHECK(s.abs_jump_area < 1e-6);
  CHECK(s.jump_energy < 1e-4);
  CHECK(s.jump_length < 1e-4);
  CHECK(s.jump_area < 1e-4);
  CHECK(s.jump_kappa_l2 < 1e-4);
  CHECK(s.hausdorff < 1e-5 * L);
  CHECK(tr.diag.back().energy == doctest::Approx(plain.diag.back().energy).epsilon(1e-4));
  CHECK(tr.snapshots[s.snapshot_index].row.seam);
  CHECK(tr.snapshots[s.snapshot_index].t == doctest::Approx(1e-3));
  // only one seam row
  int seams = 0;
  for (auto& r : tr.diag) seams += r.seam;
  CHECK(seams == 1);
}

TEST_CASE("extend_run: restart on blow-up suspicion") {
  // a dented cap raises kappa_l2 briefly; a threshold just above the start trips the monitor
  auto m = perturbed_manifest(2e-4);
  m.seed.bump = -0.3;
  m.flow.n = 200;  // the early endpoint layer must be resolved for the chart's angle gate
  m.flow.dt_init = 1e-7;
  m.flow.dt_max = 1e-5;
  m.flow.dt_growth = 1.1;
  auto seed = make_seed(m);
  m.flow.kappa_l2_threshold = 1.001 * curvature_l2(init_state(seed, m.flow).curve);
  m.restart.policy = RestartPolicy::on_blowup_suspect;
  auto tr = extend_run(seed, m);
  REQUIRE(tr.seams.size() == 1);
  CHECK(tr.seams[0].abs_jump_area < 1e-6);
  CHECK(tr.diag[tr.seams[0].diag_index - 1].kappa_l2 <= m.flow.kappa_l2_threshold);
  for (std::size_t i = 0; i < tr.seams[0].diag_index; ++i) CHECK(tr.diag[i].kappa_l2 <= m.flow.kappa_l2_threshold);

  // nothing to restart from: a loop pinching off
  RunManifest lm;
  lm.flow.alpha = pi / 4;
  lm.flow.n = 200;
  lm.flow.dt_init = 1e-8;
  lm.flow.dt_min = 1e-14;
  lm.flow.dt_max = 1e-5;
  lm.flow.dt_growth = 1.2;
  lm.flow.max_kappa_change = 0.05;
  lm.flow.t_end = 1e-2;
  lm.seed.kind = "looped_cap";
  lm.seed.loop_radius = 0.1;
  lm.flow.kappa_l2_threshold = 3 * curvature_l2(make_seed(lm));
  lm.restart.policy = RestartPolicy::on_blowup_suspect;
  auto lt = extend_run(lm);
  CHECK(lt.verdict.verdict == Verdict::blowup_suspected);
  CHECK(lt.seams.empty());
  CHECK(lt.message.find("restart declined") != std::string::npos);
  CHECK(exit_code(lt.verdict.verdict) == 2);
}

TEST_CASE("emit_outputs") {
  auto m = perturbed_manifest(1e-3);
  m.restart.policy = RestartPolicy::at_time;
  m.restart.at = 5e-4;
  auto dir = scratch("emit");
  m.out_dir = dir.string();
  auto tr = extend_run(m);
  auto files = emit_outputs(tr, m);

  // one diag row per snapshot
  std::ifstream diag(files.diag_csv);
  std::string line;
  std::getline(diag, line);
  CHECK(line.rfind("k,t,energy", 0) == 0);
  std::size_t rows = 0;
  while (std::getline(diag, line)) rows += !line.empty();
  CHECK(rows == tr.snapshots.size());
  CHECK(files.snapshots.size() == tr.snapshots.size());

  // snapshot CSVs round-trip bit-exactly
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    auto back = read_curve_csv(files.snapshots[k]);
    REQUIRE(back.size() == tr.snapshots[k].curve.size());
    for (std::size_t j = 0; j < back.size(); ++j) {
      CHECK(back[j].x() == tr.snapshots[k].curve[j].x());
      CHECK(back[j].y() == tr.snapshots[k].curve[j].y());
    }
  }

  // one polyline per snapshot
  std::string svg = slurp(files.svg);
  std::size_t polylines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++polylines;
  CHECK(polylines == tr.snapshots.size());
  CHECK(svg.find("class=\"axis\"") != std::string::npos);
  CHECK(svg.find("class=\"angle\"") != std::string::npos);

  auto report = nlohmann::json::parse(slurp(files.report_json));
  auto schema = nlohmann::json::parse(slurp(fs::path(CURVEFLOW_SOURCE_DIR) / "docs" / "report.schema.json"));
  validate_schema(report, schema, "report");
  CHECK(report["seams"].size() == 1);
  CHECK(report["verdict"]["status"] == "completed");
  fs::remove_all(dir);
}

TEST_CASE("emit_outputs: unwritable target") {
  auto dir = scratch("blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  auto m = perturbed_manifest(1e-4);
  m.out_dir = (dir / "file" / "out").string();
  auto tr = extend_run(m);
  CHECK_THROWS_AS(emit_outputs(tr, m), IoFailure);
  fs::remove_all(dir);
}

TEST_CASE("determinism: identical manifests give identical diag.csv") {
  auto m = perturbed_manifest(1e-3);
  m.restart.policy = RestartPolicy::at_time;
  m.restart.at = 4e-4;
  auto a = scratch("det_a"), b = scratch("det_b");
  m.out_dir = a.string();
  emit_outputs(extend_run(m), m);
  m.out_dir = b.string();
  emit_outputs(extend_run(m), m);
  CHECK(slurp(a / "diag.csv") == slurp(b / "diag.csv"));
  CHECK(slurp(a / "snap_3.csv") == slurp(b / "snap_3.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("manifest parsing") {
  auto dir = scratch("manifest");
  fs::create_directories(dir);
  write_curve_csv(seeds::semicircle(64), (dir / "f0.csv").string());
  const std::string text = R"(
[flow]
alpha = 1.5707963267948966
n = 64
dt_init = 1e-5
t_end = 1e-3
dt_growth = 1.1
dt_max = 1e-4
max_kappa_change = 0.1
redistribution = "every_step"

[seed]
kind = "file"
path = "f0.csv"

[smoother]
epsilons = [1e-4, 1e-6]
mu = 0.95
steps = 100

[chart]
lambda = "auto"
eta_degree = 7
hat_c = "direct"

[restart]
policy = "at-time"
at = 5e-4

[output]
dir = "out"
svg = false
)";
  auto m = parse_manifest(text, dir.string());
  CHECK(m.flow.n == 64);
  CHECK(m.flow.dt_growth == 1.1);
  CHECK(m.flow.max_kappa_change == 0.1);
  CHECK(m.flow.redistribution == Redistribution::every_step);
  CHECK(m.seed.path == (dir / "f0.csv").string());
  CHECK(m.scan.epsilons == std::vector<double>{1e-4, 1e-6});
  CHECK(m.scan.mu == 0.95);
  CHECK(m.scan.smooth.steps == 100);
  CHECK(m.scan.chart.lambda == 0.0);
  CHECK(m.scan.chart.eta.degree == 7);
  CHECK(m.scan.chart.reading == HatCReading::direct);
  CHECK(m.restart.policy == RestartPolicy::at_time);
  CHECK(m.out_dir == (dir / "out").string());
  CHECK(!m.svg);
  CHECK(make_seed(m).size() == 65);

  { std::ofstream(dir / "run.toml") << text; }
  auto loaded = load_manifest((dir / "run.toml").string());
  CHECK(loaded.seed.path == m.seed.path);
  loaded.validate(true);
  CHECK(fs::is_directory(loaded.out_dir));

  auto bad = [&](const std::string& t) { CHECK_THROWS_AS(parse_manifest(t, dir.string()), ConfigError); };
  bad("[flow]\nalpah = 1.0\n");
  bad("[flow]\nn = \"many\"\n");
  bad("[flow]\nn = 4\n");
  bad("[seed]\nkind = \"file\"\npath = \"missing.csv\"\n");
  bad("[seed]\nkind = \"spiral\"\n");
  bad("[flow]\nalpha = 1.0\n");  // semicircle needs a right angle
  bad("[restart]\npolicy = \"sometimes\"\n");
  bad("[restart]\npolicy = \"at-time\"\nat = 0.5\n");
  bad("[smoother]\nepsilons = [1e-6, 1e-4]\n");
  bad("[smoother]\nmu = 0.5\n");
  bad("[chart]\nlambda = 1.5\n");
  bad("[chart]\neta_degree = 4\n");
  bad("[extra]\nx = 1\n");
  bad("[flow\n");
  CHECK_THROWS_AS(load_manifest((dir / "nope.toml").string()), ConfigError);
  fs::remove_all(dir);
}

}  // TEST_SUITE
