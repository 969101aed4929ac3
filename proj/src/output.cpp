#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "curveflow/errors.hpp"
#include "curveflow/json_io.hpp"
#include "curveflow/lab.hpp"

namespace curveflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string reading_name(HatCReading r) { return r == HatCReading::reciprocal ? "reciprocal" : "direct"; }

}  // namespace

json to_json(const ConstantsReport& c) {
  return {{"alpha", c.alpha},           {"cot_alpha", c.cot_alpha}, {"hat_c", c.hat_c},
          {"C_alpha", c.C_alpha},       {"C_alpha_bar", c.C_alpha_bar}, {"d", c.d},
          {"K0", c.K0},                 {"K1", num(c.K1)},          {"xi0", c.xi0},
          {"xi1", c.xi1},               {"lambda_max", c.lambda_max}, {"lambda", c.lambda},
          {"eta_prime_norm", c.eta_prime_norm}, {"kappa_norm", c.kappa_norm}, {"L_phi", c.L_phi},
          {"hat_c_reading", reading_name(c.reading)}};
}

json to_json(const Check& c) {
  return {{"name", c.name},   {"passed", c.passed},        {"value", num(c.value)},
          {"limit", num(c.limit)}, {"margin", num(c.margin())}, {"note", c.note}};
}

json to_json(const VerifyReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  json j = {{"passed", r.passed}, {"first_failure", r.first_failure()}, {"constants", to_json(r.constants)},
            {"checks", checks}};
  if (r.height) {
    j["height"] = {{"residual", r.height->residual},
                   {"compat", r.height->compat},
                   {"min_phi_step", r.height->min_phi_step},
                   {"min_fiber_cos", r.height->min_fiber_cos}};
  }
  return j;
}

json to_json(const FlowConfig& c) {
  return {{"alpha", c.alpha},
          {"n", c.n},
          {"dt_init", c.dt_init},
          {"dt_min", c.dt_min},
          {"dt_max", c.dt_max},
          {"dt_growth", c.dt_growth},
          {"t_end", c.t_end},
          {"cfl", c.cfl},
          {"kappa_l2_threshold", c.kappa_l2_threshold},
          {"max_kappa_change", c.max_kappa_change},
          {"redistribution", c.redistribution == Redistribution::every_step ? "every_step" : "every_k_steps"},
          {"redistribute_every", c.redistribute_every},
          {"snapshot_stride", c.snapshot_stride}};
}

json to_json(const DiagRow& r) {
  return {{"t", r.t},
          {"energy", r.energy},
          {"length", r.length},
          {"area", r.area},
          {"kappa_l2", r.kappa_l2},
          {"kappa_max", r.kappa_max},
          {"dt", r.dt},
          {"res_y", r.res_y},
          {"res_angle", r.res_angle},
          {"res_dskappa", r.res_dskappa},
          {"seam", r.seam}};
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw IoFailure("cannot write " + p.string());
  out.precision(17);
  return out;
}

void finish(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw IoFailure("write failed for " + p.string());
}

void write_svg(const Trajectory& tr, const fs::path& path) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& sn : tr.snapshots)
    for (const auto& p : sn.curve.points()) {
      x0 = std::min(x0, p.x());
      x1 = std::max(x1, p.x());
      y0 = std::min(y0, p.y());
      y1 = std::max(y1, p.y());
    }
  y0 = std::min(y0, 0.0);
  double span = std::max(x1 - x0, y1 - y0);
  double pad = 0.08 * span;
  x0 -= pad;
  x1 += pad;
  y0 -= pad;
  y1 += pad;
  const double W = 800.0, scale = W / (x1 - x0), H = (y1 - y0) * scale;
  auto X = [&](double x) { return (x - x0) * scale; };
  auto Y = [&](double y) { return (y1 - y) * scale; };

  auto out = open_out(path);
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line class=\"axis\" x1=\"0\" y1=\"" << Y(0) << "\" x2=\"" << W << "\" y2=\"" << Y(0)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  const std::size_t k = tr.snapshots.size();
  for (std::size_t i = 0; i < k; ++i) {
    double f = k > 1 ? static_cast<double>(i) / (k - 1) : 1.0;
    int r = static_cast<int>(40 + 200 * f), b = static_cast<int>(220 - 180 * f);
    out << "<polyline data-t=\"" << tr.snapshots[i].t << "\" fill=\"none\" stroke=\"rgb(" << r << ",60," << b
        << ")\" stroke-width=\"1.2\" points=\"";
    for (const auto& p : tr.snapshots[i].curve.points()) out << X(p.x()) << ',' << Y(p.y()) << ' ';
    out << "\"/>\n";
  }
  // prescribed contact directions at the final endpoints
  if (k) {
    const auto& c = tr.snapshots.back().curve;
    const double g = 0.12 * span;
    Point tl = target_tangent_left(tr.alpha), tr_ = target_tangent_right(tr.alpha);
    Point a = c.front(), b = c.back();
    out << "<line class=\"angle\" x1=\"" << X(a.x()) << "\" y1=\"" << Y(a.y()) << "\" x2=\"" << X(a.x() + g * tl.x())
        << "\" y2=\"" << Y(a.y() + g * tl.y()) << "\" stroke=\"green\" stroke-width=\"2\"/>\n";
    out << "<line class=\"angle\" x1=\"" << X(b.x()) << "\" y1=\"" << Y(b.y()) << "\" x2=\"" << X(b.x() - g * tr_.x())
        << "\" y2=\"" << Y(b.y() - g * tr_.y()) << "\" stroke=\"green\" stroke-width=\"2\"/>\n";
  }
  out << "</svg>\n";
  finish(out, path);
}

}  // namespace

OutputFiles emit_outputs(const Trajectory& tr, const RunManifest& m) {
  const fs::path dir(m.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoFailure("cannot create " + dir.string() + ": " + ec.message());

  OutputFiles files;
  files.diag_csv = (dir / "diag.csv").string();
  {
    auto out = open_out(files.diag_csv);
    out << "k,t,energy,length,area,kappa_l2,kappa_max,dt,res_y,res_angle,res_dskappa,angle_onesided,"
           "self_intersecting,seam\n";
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
      const auto& r = tr.snapshots[k].row;
      out << k << ',' << r.t << ',' << r.energy << ',' << r.length << ',' << r.area << ',' << r.kappa_l2 << ','
          << r.kappa_max << ',' << r.dt << ',' << r.res_y << ',' << r.res_angle << ',' << r.res_dskappa << ','
          << r.angle_onesided << ',' << (tr.snapshots[k].self_intersecting ? 1 : 0) << ',' << (r.seam ? 1 : 0)
          << '\n';
    }
    finish(out, files.diag_csv);
  }

  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    auto p = (dir / ("snap_" + std::to_string(k) + ".csv")).string();
    try {
      write_curve_csv(tr.snapshots[k].curve, p);
    } catch (const Error& e) {
      throw IoFailure(e.what());
    }
    files.snapshots.push_back(p);
  }

  json snaps = json::array();
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k)
    snaps.push_back({{"k", k}, {"t", tr.snapshots[k].t}, {"file", fs::path(files.snapshots[k]).filename().string()},
                     {"self_intersecting", tr.snapshots[k].self_intersecting}});
  json seams = json::array();
  for (const auto& s : tr.seams) {
    json checks = json::array();
    for (const auto& c : s.checks) checks.push_back(to_json(c));
    json scan = json::array();
    for (const auto& e : s.scan) scan.push_back({{"epsilon", e.epsilon}, {"passed", e.passed}, {"failure", e.failure}});
    seams.push_back({{"t", s.t},
                     {"diag_index", s.diag_index},
                     {"snapshot_index", s.snapshot_index},
                     {"epsilon", s.epsilon},
                     {"constants", to_json(s.constants)},
                     {"checks", checks},
                     {"scan", scan},
                     {"jumps",
                      {{"energy", s.jump_energy},
                       {"length", s.jump_length},
                       {"area", s.jump_area},
                       {"area_abs", s.abs_jump_area},
                       {"kappa_l2", s.jump_kappa_l2},
                       {"hausdorff", s.hausdorff}}}});
  }
  json verdict = {{"status", to_string(tr.verdict.verdict)},
                  {"exit_code", exit_code(tr.verdict.verdict)},
                  {"message", tr.message},
                  {"index", tr.verdict.index ? json(*tr.verdict.index) : json(nullptr)},
                  {"t", tr.verdict.t ? json(*tr.verdict.t) : json(nullptr)}};
  json report = {{"schema", "curveflow-report/1"},
                 {"config", to_json(m.flow)},
                 {"seed", {{"kind", m.seed.kind}, {"radius", m.seed.radius}, {"bump", m.seed.bump}, {"path", m.seed.path}}},
                 {"restart", {{"policy", to_string(m.restart.policy)}, {"at", m.restart.at}}},
                 {"verdict", verdict},
                 {"steps", tr.diag.size()},
                 {"final", tr.diag.empty() ? json(nullptr) : to_json(tr.diag.back())},
                 {"snapshots", snaps},
                 {"seams", seams}};
  files.report_json = (dir / "report.json").string();
  {
    std::ofstream out(files.report_json);
    if (!out) throw IoFailure("cannot write " + files.report_json);
    out << report.dump(2) << '\n';
    finish(out, files.report_json);
  }

  if (m.svg) {
    files.svg = (dir / "curves.svg").string();
    write_svg(tr, files.svg);
  }
  return files;
}

}  // namespace curveflow
