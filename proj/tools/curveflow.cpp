// curveflow: command-line front end of the laboratory.
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "curveflow/chart.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/json_io.hpp"
#include "curveflow/lab.hpp"
#include "curveflow/norms.hpp"
#include "curveflow/smoother.hpp"
#include "curveflow/spline.hpp"

using namespace curveflow;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kRuntimeError = 1;
constexpr int kConfigError = 4;

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoFailure("write failed for " + path);
}

// left-end tangent (cos a, sin a); the spline slope is far closer than the one-sided stencil
double infer_alpha(const SampledCurve& c) {
  CubicSpline2 sp(c.sigma_grid(), c.points(), SplineEnd::not_a_knot);
  Point t = sp.d1(0.0);
  return std::atan2(t.y(), t.x());
}

int finish_run(const Trajectory& tr, const RunManifest& m) {
  auto files = emit_outputs(tr, m);
  const auto& last = tr.diag.back();
  std::cout << "verdict: " << to_string(tr.verdict.verdict);
  if (!tr.message.empty()) std::cout << " (" << tr.message << ")";
  std::cout << "\nt = " << last.t << "  E = " << last.energy << "  L = " << last.length << "  area = " << last.area
            << "  |kappa|_L2 = " << last.kappa_l2 << "\n";
  for (const auto& s : tr.seams)
    std::cout << "seam at t = " << s.t << ": epsilon " << s.epsilon << ", jumps E " << s.jump_energy << " area "
              << s.abs_jump_area << " hausdorff " << s.hausdorff << "\n";
  std::cout << tr.snapshots.size() << " snapshots, report " << files.report_json << "\n";
  return exit_code(tr.verdict.verdict);
}

struct Column {
  std::vector<double> t, v;
};

Column read_column(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot read " + path);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string h;
    while (std::getline(ss, h, ',')) head.push_back(h);
  }
  auto idx = [&](const std::string& k) -> std::size_t {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == k) return i;
    throw InvalidArgument("column '" + k + "' not in " + path);
  };
  const std::size_t it = idx("t"), iv = idx(name);
  Column c;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string x;
    while (std::getline(ss, x, ',')) f.push_back(x);
    if (f.size() <= std::max(it, iv)) throw InvalidArgument("short row in " + path);
    double t = std::stod(f[it]);
    // a restart seam repeats its time; keep the later sample
    if (!c.t.empty() && t == c.t.back()) {
      c.v.back() = std::stod(f[iv]);
      continue;
    }
    c.t.push_back(t);
    c.v.push_back(std::stod(f[iv]));
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curveflow: curve diffusion flow with contact angle, reference curves, charts and restarts"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config, sim_out;
  bool sim_movie = false;
  auto* sim = app.add_subcommand("simulate", "run the flow from a config and write diag.csv and snapshots");
  sim->add_option("--config", sim_config, "TOML config ([flow] keys mirror FlowConfig, optional [seed])")->required();
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->add_flag("--movie", sim_movie, "also write movie.svg");

  // smooth
  std::string sm_in, sm_out, sm_scheme = "backward_euler";
  double sm_eps = 1e-6, sm_mu = 1.0;
  int sm_steps = 200;
  auto* sm = app.add_subcommand("smooth", "sixth-order parabolic smoothing of a curve");
  sm->add_option("--in", sm_in, "input curve CSV")->required();
  sm->add_option("--epsilon", sm_eps, "smoothing time")->check(CLI::PositiveNumber);
  sm->add_option("--out", sm_out, "output curve CSV")->required();
  sm->add_option("--mu", sm_mu, "weight exponent in (7/8, 1]");
  sm->add_option("--steps", sm_steps, "time steps");
  sm->add_option("--scheme", sm_scheme, "backward_euler | crank_nicolson");

  // rate-probe
  std::string rp_in;
  double rp_mu = 1.0;
  std::vector<double> rp_eps = {1e-4, 1e-5, 1e-6, 1e-7};
  auto* rp = app.add_subcommand("rate-probe", "observed convergence rates of the smoother");
  rp->add_option("--in", rp_in, "input curve CSV")->required();
  rp->add_option("--mu", rp_mu, "weight exponent");
  rp->add_option("--epsilons", rp_eps, "smoothing times, decreasing")->delimiter(',');

  // chart-check
  std::string cc_ref, cc_curve, cc_report, cc_lambda = "auto", cc_hat = "reciprocal";
  double cc_alpha = std::numbers::pi / 2;
  int cc_eta = 5, cc_ns = 200, cc_nq = 50;
  auto* cc = app.add_subcommand("chart-check", "constants, Jacobian bound and reference verification");
  cc->add_option("--ref", cc_ref, "reference curve CSV")->required();
  cc->add_option("--alpha", cc_alpha, "contact angle");
  cc->add_option("--lambda", cc_lambda, "auto or a value in (0,1)");
  cc->add_option("--curve", cc_curve, "initial curve to verify against (default: the reference)");
  cc->add_option("--eta-degree", cc_eta, "cutoff smoothstep degree 3, 5 or 7");
  cc->add_option("--hat-c", cc_hat, "reciprocal | direct");
  cc->add_option("--grid-sigma", cc_ns, "Jacobian grid, sigma direction");
  cc->add_option("--grid-q", cc_nq, "Jacobian grid, q direction");
  cc->add_option("--report", cc_report, "write report.json");

  // extract-height
  std::string eh_ref, eh_curve, eh_out;
  double eh_alpha = 0.0;
  auto* eh = app.add_subcommand("extract-height", "write a curve as a height function over a reference");
  eh->add_option("--ref", eh_ref, "reference curve CSV")->required();
  eh->add_option("--curve", eh_curve, "curve CSV")->required();
  eh->add_option("--out", eh_out, "output CSV sigma,rho,phi")->required();
  auto* eh_alpha_opt = eh->add_option("--alpha", eh_alpha, "contact angle (default: read off the reference)");

  // norms
  std::string nm_diag, nm_col = "kappa_l2";
  NormSpec nspec;
  double nm_T = 0.0;
  auto* nm = app.add_subcommand("norms", "weighted Sobolev-Slobodetskii norm of a diagnostics column");
  nm->add_option("--diag", nm_diag, "diag.csv")->required();
  nm->add_option("--column", nm_col, "column name");
  nm->add_option("--s", nspec.s, "smoothness order");
  nm->add_option("--p", nspec.p, "integrability");
  nm->add_option("--mu", nspec.mu, "weight exponent");
  nm->add_option("--T", nm_T, "interval end (default: last sample time)");

  // run / extend
  std::string run_manifest, run_out;
  auto* rn = app.add_subcommand("run", "full experiment from a manifest");
  rn->add_option("--manifest", run_manifest, "manifest TOML")->required();
  rn->add_option("--out", run_out, "override [output] dir");

  std::string ex_manifest, ex_out;
  double ex_at = 0.0;
  auto* ex = app.add_subcommand("extend", "run with a restart at a given time");
  ex->add_option("--manifest", ex_manifest, "manifest TOML")->required();
  ex->add_option("--restart-at", ex_at, "restart time")->required();
  ex->add_option("--out", ex_out, "override [output] dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*sim) {
      auto m = load_manifest(sim_config);
      m.restart.policy = RestartPolicy::never;
      m.out_dir = sim_out;
      m.svg = sim_movie;
      m.validate(true);
      auto tr = extend_run(m);
      int rc = finish_run(tr, m);
      if (sim_movie) fs::rename(fs::path(sim_out) / "curves.svg", fs::path(sim_out) / "movie.svg");
      return rc;
    }

    if (*sm) {
      SmoothOptions opt;
      opt.steps = sm_steps;
      if (sm_scheme == "crank_nicolson")
        opt.scheme = TimeScheme::crank_nicolson;
      else if (sm_scheme != "backward_euler")
        throw ConfigError("--scheme must be backward_euler or crank_nicolson");
      auto f0 = read_curve_csv(sm_in);
      auto res = smooth_detailed(build_corrector(f0, sm_mu), sm_eps, opt);
      write_curve_csv(res.curve, sm_out);
      std::cout << "smoothed to epsilon " << sm_eps << " in " << res.steps << " steps, boundary residual "
                << res.bc_residual << "\n";
      return 0;
    }

    if (*rp) {
      auto f0 = read_curve_csv(rp_in);
      auto rep = rate_probe(build_corrector(f0, rp_mu), rp_eps);
      std::cout << "epsilon,c0_distance,c1_distance,c2_norm\n";
      for (std::size_t i = 0; i < rep.epsilons.size(); ++i)
        std::cout << rep.epsilons[i] << ',' << rep.c0_distance[i] << ',' << rep.c1_distance[i] << ',' << rep.c2_norm[i]
                  << '\n';
      auto show = [](const char* name, const std::optional<double>& v, double theory) {
        std::cout << name << ": " << (v ? std::to_string(*v) : std::string("n/a")) << " (theory " << theory << ")\n";
      };
      show("C0 order", rep.c0_order, rep.theory_c0);
      show("C1 order", rep.c1_order, rep.theory_c1);
      show("C2 exponent", rep.c2_exponent, rep.theory_c2);
      return 0;
    }

    if (*cc) {
      ChartOptions opt;
      if (cc_lambda != "auto") {
        try {
          opt.lambda = std::stod(cc_lambda);
        } catch (const std::exception&) {
          throw ConfigError("--lambda must be auto or a number");
        }
        if (!(opt.lambda > 0.0 && opt.lambda < 1.0)) throw ConfigError("--lambda must lie in (0,1)");
      }
      opt.eta = make_eta(cc_eta);
      if (cc_hat == "direct")
        opt.reading = HatCReading::direct;
      else if (cc_hat != "reciprocal")
        throw ConfigError("--hat-c must be reciprocal or direct");
      auto ref = read_curve_csv(cc_ref);
      ChartSpec chart(ref, cc_alpha, opt);
      auto jac = chart_jacobian_check(chart, cc_ns, cc_nq);
      auto f0 = cc_curve.empty() ? ref : read_curve_csv(cc_curve);
      auto ver = verify_reference(chart, f0);
      const auto& k = chart.constants();
      std::cout << "C_alpha " << k.C_alpha << "  d " << k.d << "  K0 " << k.K0 << "  K1 " << k.K1 << "\n"
                << "lambda " << k.lambda << " (max " << k.lambda_max << ")  C_alpha_bar " << k.C_alpha_bar << "\n"
                << "xi0 " << k.xi0 << "  xi1 " << k.xi1 << "\n"
                << "jacobian min " << jac.min_det << " vs bound " << jac.bound << (jac.passed ? "  ok" : "  FAILED")
                << "\n";
      for (const auto& c : ver.checks)
        std::cout << (c.passed ? "  pass " : "  FAIL ") << c.name << "  value " << c.value << "  limit " << c.limit
                  << "\n";
      std::cout << "reference " << (ver.passed ? "admissible" : "rejected: " + ver.first_failure()) << "\n";
      if (!cc_report.empty()) {
        json j = to_json(ver);
        j["residuals"] = {{"axis", chart.residuals().axis},
                          {"angle", chart.residuals().angle},
                          {"kappa", chart.residuals().kappa}};
        j["jacobian"] = {{"min_det", jac.min_det},
                         {"bound", jac.bound},
                         {"sigma_at_min", jac.sigma_at_min},
                         {"q_at_min", jac.q_at_min},
                         {"passed", jac.passed},
                         {"grid", {cc_ns, cc_nq}}};
        write_json(j, cc_report);
      }
      return ver.passed && jac.passed ? 0 : kRuntimeError;
    }

    if (*eh) {
      auto ref = read_curve_csv(eh_ref);
      double alpha = eh_alpha_opt->count() ? eh_alpha : infer_alpha(ref);
      ChartSpec chart(ref, alpha);
      auto h = extract_height(chart, read_curve_csv(eh_curve));
      std::ofstream out(eh_out);
      if (!out) throw IoFailure("cannot write " + eh_out);
      out.precision(17);
      out << "sigma,rho,phi\n";
      for (std::size_t j = 0; j < h.sigma.size(); ++j) out << h.sigma[j] << ',' << h.rho[j] << ',' << h.phi[j] << '\n';
      double rmax = 0.0;
      for (double r : h.rho) rmax = std::max(rmax, std::abs(r));
      std::cout << "max |rho| " << rmax << " (d = " << chart.d() << "), residual " << h.residual
                << ", injectivity certificate " << h.min_fiber_cos << "\n";
      return 0;
    }

    if (*nm) {
      auto col = read_column(nm_diag, nm_col);
      nspec.T = nm_T > 0.0 ? nm_T : col.t.back();
      TimeSeries u(col.t, col.v);
      auto r = sobolev_slobodetskii_norm(u, nspec);
      std::cout << "norm " << r.value << "  error bar " << r.error_bar << "  (s=" << nspec.s << " p=" << nspec.p
                << " mu=" << nspec.mu << " T=" << nspec.T << ")\n";
      return 0;
    }

    if (*rn) {
      auto m = load_manifest(run_manifest);
      if (!run_out.empty()) m.out_dir = run_out;
      m.validate(true);
      return finish_run(extend_run(m), m);
    }

    if (*ex) {
      auto m = load_manifest(ex_manifest);
      if (!ex_out.empty()) m.out_dir = ex_out;
      m.restart.policy = RestartPolicy::at_time;
      m.restart.at = ex_at;
      m.validate(true);
      return finish_run(extend_run(m), m);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidSpec& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const StepFailure& e) {
    std::cerr << "step failure: " << e.what() << "\n";
    return exit_code(Verdict::step_failure);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
