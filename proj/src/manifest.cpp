#include <toml.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "curveflow/errors.hpp"
#include "curveflow/lab.hpp"
#include "curveflow/seeds.hpp"

namespace curveflow {

namespace fs = std::filesystem;

std::string to_string(RestartPolicy p) {
  switch (p) {
    case RestartPolicy::never: return "never";
    case RestartPolicy::at_time: return "at-time";
    case RestartPolicy::on_blowup_suspect: return "on-blowup-suspect";
  }
  return "?";
}

namespace {

void reject_unknown(const toml::table& t, const std::string& where, const std::set<std::string>& known) {
  for (auto&& [k, v] : t) {
    std::string key(k.str());
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

const toml::table* sub(const toml::table& root, const char* name) {
  auto* node = root.get(name);
  if (!node) return nullptr;
  auto* t = node->as_table();
  if (!t) throw ConfigError(std::string("[") + name + "] must be a table");
  return t;
}

template <class T>
void read(const toml::table& t, const char* key, T& out) {
  auto* node = t.get(key);
  if (!node) return;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node->value<double>()) {
      out = *v;
      return;
    }
  } else if constexpr (std::is_same_v<T, int>) {
    if (auto v = node->value<int64_t>()) {
      out = static_cast<int>(*v);
      return;
    }
  } else if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node->value<bool>()) {
      out = *v;
      return;
    }
  } else {
    if (auto v = node->value<std::string>()) {
      out = *v;
      return;
    }
  }
  throw ConfigError(std::string("bad value for '") + key + "'");
}

}  // namespace

RunManifest parse_manifest(const std::string& text, const std::string& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "manifest: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(os.str());
  }
  reject_unknown(root, "manifest", {"flow", "seed", "smoother", "chart", "restart", "output"});

  RunManifest m;
  m.base_dir = base_dir;

  if (auto* t = sub(root, "flow")) {
    reject_unknown(*t, "[flow]", {"alpha", "n", "dt_init", "dt_min", "dt_max", "dt_growth", "t_end", "cfl",
                                  "kappa_l2_threshold", "max_kappa_change", "redistribution", "redistribute_every", "snapshot_stride"});
    auto& f = m.flow;
    read(*t, "alpha", f.alpha);
    read(*t, "n", f.n);
    read(*t, "dt_init", f.dt_init);
    read(*t, "dt_min", f.dt_min);
    read(*t, "dt_max", f.dt_max);
    read(*t, "dt_growth", f.dt_growth);
    read(*t, "t_end", f.t_end);
    read(*t, "cfl", f.cfl);
    read(*t, "kappa_l2_threshold", f.kappa_l2_threshold);
    read(*t, "max_kappa_change", f.max_kappa_change);
    read(*t, "redistribute_every", f.redistribute_every);
    read(*t, "snapshot_stride", f.snapshot_stride);
    std::string r = "every_k_steps";
    read(*t, "redistribution", r);
    if (r == "every_step")
      f.redistribution = Redistribution::every_step;
    else if (r == "every_k_steps")
      f.redistribution = Redistribution::every_k_steps;
    else
      throw ConfigError("redistribution must be every_step or every_k_steps");
  }

  if (auto* t = sub(root, "seed")) {
    reject_unknown(*t, "[seed]", {"kind", "radius", "bump", "loop_radius", "loop_pos", "path"});
    read(*t, "kind", m.seed.kind);
    read(*t, "radius", m.seed.radius);
    read(*t, "bump", m.seed.bump);
    read(*t, "loop_radius", m.seed.loop_radius);
    read(*t, "loop_pos", m.seed.loop_pos);
    read(*t, "path", m.seed.path);
  }

  if (auto* t = sub(root, "smoother")) {
    reject_unknown(*t, "[smoother]", {"epsilons", "mu", "steps", "dt", "scheme"});
    if (auto* node = t->get("epsilons")) {
      auto* arr = node->as_array();
      if (!arr) throw ConfigError("smoother.epsilons must be an array");
      m.scan.epsilons.clear();
      for (auto&& e : *arr) {
        auto v = e.value<double>();
        if (!v) throw ConfigError("smoother.epsilons must hold numbers");
        m.scan.epsilons.push_back(*v);
      }
    }
    read(*t, "mu", m.scan.mu);
    read(*t, "steps", m.scan.smooth.steps);
    read(*t, "dt", m.scan.smooth.dt);
    std::string sch = "backward_euler";
    read(*t, "scheme", sch);
    if (sch == "backward_euler")
      m.scan.smooth.scheme = TimeScheme::backward_euler;
    else if (sch == "crank_nicolson")
      m.scan.smooth.scheme = TimeScheme::crank_nicolson;
    else
      throw ConfigError("smoother.scheme must be backward_euler or crank_nicolson");
  }

  if (auto* t = sub(root, "chart")) {
    reject_unknown(*t, "[chart]", {"lambda", "eta_degree", "hat_c", "angle_tol"});
    if (auto* node = t->get("lambda")) {
      if (auto s = node->value<std::string>()) {
        if (*s != "auto") throw ConfigError("chart.lambda must be a number or \"auto\"");
        m.scan.chart.lambda = 0.0;
      } else if (auto v = node->value<double>()) {
        m.scan.chart.lambda = *v;
      } else {
        throw ConfigError("bad value for 'lambda'");
      }
    }
    int deg = 5;
    read(*t, "eta_degree", deg);
    try {
      m.scan.chart.eta = make_eta(deg);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    std::string hc = "reciprocal";
    read(*t, "hat_c", hc);
    if (hc == "reciprocal")
      m.scan.chart.reading = HatCReading::reciprocal;
    else if (hc == "direct")
      m.scan.chart.reading = HatCReading::direct;
    else
      throw ConfigError("chart.hat_c must be reciprocal or direct");
    read(*t, "angle_tol", m.scan.verify.angle_tol);
  }

  if (auto* t = sub(root, "restart")) {
    reject_unknown(*t, "[restart]", {"policy", "at"});
    std::string p = "never";
    read(*t, "policy", p);
    if (p == "never")
      m.restart.policy = RestartPolicy::never;
    else if (p == "at-time")
      m.restart.policy = RestartPolicy::at_time;
    else if (p == "on-blowup-suspect")
      m.restart.policy = RestartPolicy::on_blowup_suspect;
    else
      throw ConfigError("restart.policy must be never, at-time or on-blowup-suspect");
    read(*t, "at", m.restart.at);
  }

  if (auto* t = sub(root, "output")) {
    reject_unknown(*t, "[output]", {"dir", "svg"});
    read(*t, "dir", m.out_dir);
    read(*t, "svg", m.svg);
  }

  if (!m.out_dir.empty() && fs::path(m.out_dir).is_relative()) m.out_dir = (fs::path(base_dir) / m.out_dir).string();
  if (!m.seed.path.empty() && fs::path(m.seed.path).is_relative())
    m.seed.path = (fs::path(base_dir) / m.seed.path).string();
  m.validate();
  return m;
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read manifest " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto dir = fs::path(path).parent_path();
  return parse_manifest(ss.str(), dir.empty() ? "." : dir.string());
}

void RunManifest::validate(bool create_out) const {
  try {
    flow.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("[flow] ") + e.what());
  }
  static const std::set<std::string> kinds = {"semicircle", "cap", "bumped_cap", "looped_cap", "file"};
  if (!kinds.count(seed.kind)) throw ConfigError("unknown seed kind '" + seed.kind + "'");
  if (seed.kind == "file") {
    if (seed.path.empty()) throw ConfigError("seed.path required for kind = file");
    if (!fs::is_regular_file(seed.path)) throw ConfigError("seed file not found: " + seed.path);
  }
  if (seed.kind == "semicircle" && std::abs(flow.alpha - M_PI / 2) > 1e-12)
    throw ConfigError("a semicircle seed needs alpha = pi/2; use kind = cap");
  if (!(seed.radius > 0.0)) throw ConfigError("seed.radius must be positive");
  if (scan.epsilons.empty()) throw ConfigError("smoother.epsilons is empty");
  for (std::size_t i = 0; i < scan.epsilons.size(); ++i) {
    if (!(scan.epsilons[i] > 0.0)) throw ConfigError("smoother.epsilons must be positive");
    if (i && !(scan.epsilons[i] < scan.epsilons[i - 1]))
      throw ConfigError("smoother.epsilons must decrease (scanned large to small)");
  }
  if (!(scan.mu > 7.0 / 8 && scan.mu <= 1.0)) throw ConfigError("smoother.mu must lie in (7/8, 1]");
  if (scan.smooth.steps < 1 || scan.smooth.dt < 0.0) throw ConfigError("smoother steps/dt invalid");
  if (scan.chart.lambda != 0.0 && !(scan.chart.lambda > 0.0 && scan.chart.lambda < 1.0))
    throw ConfigError("chart.lambda must be auto or in (0,1)");
  if (restart.policy == RestartPolicy::at_time && !(restart.at > 0.0 && restart.at < flow.t_end))
    throw ConfigError("restart.at must lie in (0, t_end)");
  if (out_dir.empty()) throw ConfigError("output.dir is empty");

  if (create_out) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());
    auto probe = fs::path(out_dir) / ".write_probe";
    {
      std::ofstream p(probe);
      if (!p) throw ConfigError("output directory not writable: " + out_dir);
    }
    fs::remove(probe, ec);
  }
}

SampledCurve make_seed(const RunManifest& m) {
  const auto& s = m.seed;
  const int n = m.flow.n;
  if (s.kind == "semicircle") return seeds::semicircle(n, s.radius);
  if (s.kind == "cap") return seeds::cap(m.flow.alpha, n, s.radius);
  if (s.kind == "bumped_cap") return seeds::bumped_cap(m.flow.alpha, n, s.bump, s.radius);
  if (s.kind == "looped_cap") return seeds::looped_cap(m.flow.alpha, s.loop_radius, s.loop_pos, n);
  if (s.kind == "file") return read_curve_csv(s.path);
  throw ConfigError("unknown seed kind '" + s.kind + "'");
}

}  // namespace curveflow
