#include "curveflow/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "curveflow/errors.hpp"

namespace curveflow {

void NormSpec::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidSpec("p must lie in (1, inf)");
  if (!(mu > 1.0 / p && mu <= 1.0)) throw InvalidSpec("mu must lie in (1/p, 1]");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidSpec("T must be positive");
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidSpec("s must be non-negative");
}

TimeSeries::TimeSeries(std::vector<double> t, std::vector<double> v, int d)
    : times(std::move(t)), values(std::move(v)), dim(d) {
  validate();
}

void TimeSeries::validate() const {
  if (dim < 1) throw InvalidSpec("series dimension must be positive");
  if (values.size() != times.size() * static_cast<std::size_t>(dim)) throw InvalidSpec("values do not match times");
  if (times.size() < 2) throw InsufficientSamples("a time series needs at least two samples");
  if (!(times.front() >= 0.0)) throw InvalidSpec("sample times must be non-negative");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InvalidSpec("sample times must increase strictly");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidSpec("non-finite sample");
}

namespace {

struct Rule {
  std::vector<double> x, w;  // on [0,1]
};

Rule gauss_legendre(int n) {
  Rule r{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = n == 1 ? z : p1, pm = n == 1 ? 1.0 : p0;
      dp = n * (z * pn - pm) / (z * z - 1);
      double dz = pn / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = 0.5 * (1 - z);
    r.w[i] = 1.0 / ((1 - z * z) * dp * dp);
  }
  return r;
}

const Rule& rule(int n) {
  static const Rule r6 = gauss_legendre(6), r10 = gauss_legendre(10), r16 = gauss_legendre(16);
  return n == 6 ? r6 : n == 10 ? r10 : r16;
}

// Piecewise-linear interpolant on a mesh refined geometrically towards t = 0.
struct Mesh {
  std::vector<double> m;           // cell boundaries, 0 = m_0 < ... < m_K = T
  std::vector<double> u;           // interpolant at the boundaries, dim per node
  int dim;

  const double* at(std::size_t k) const { return u.data() + k * dim; }
  std::size_t cells() const { return m.size() - 1; }
  void eval(std::size_t k, double t, double* out) const {
    double th = (t - m[k]) / (m[k + 1] - m[k]);
    for (int c = 0; c < dim; ++c) out[c] = at(k)[c] + th * (at(k + 1)[c] - at(k)[c]);
  }
  double slope_norm(std::size_t k) const {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) {
      double g = at(k + 1)[c] - at(k)[c];
      s += g * g;
    }
    return std::sqrt(s) / (m[k + 1] - m[k]);
  }
};

void sample(const TimeSeries& s, double t, double* out) {
  const auto& ts = s.times;
  const int d = s.dim;
  if (t <= ts.front()) {
    std::copy_n(s.values.begin(), d, out);
    return;
  }
  if (t >= ts.back()) {
    std::copy_n(s.values.end() - d, d, out);
    return;
  }
  std::size_t i = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin() - 1;
  double th = (t - ts[i]) / (ts[i + 1] - ts[i]);
  for (int c = 0; c < d; ++c) out[c] = s.values[i * d + c] + th * (s.values[(i + 1) * d + c] - s.values[i * d + c]);
}

Mesh build_mesh(const TimeSeries& s, double T) {
  Mesh me;
  me.dim = s.dim;
  me.m.push_back(0.0);
  for (double t : s.times)
    if (t > 0.0 && t < T) me.m.push_back(t);
  me.m.push_back(T);
  // geometric grading of the first cell
  double first = me.m[1];
  std::vector<double> grade;
  for (int k = 40; k >= 1; --k) grade.push_back(first * std::ldexp(1.0, -k));
  me.m.insert(me.m.begin() + 1, grade.begin(), grade.end());
  me.u.resize(me.m.size() * s.dim);
  for (std::size_t k = 0; k < me.m.size(); ++k) sample(s, me.m[k], me.u.data() + k * s.dim);
  return me;
}

double norm_of(const double* v, int d) {
  double s = 0.0;
  for (int c = 0; c < d; ++c) s += v[c] * v[c];
  return std::sqrt(s);
}

double lp_power(const Mesh& me, double p, double w) {
  const Rule& g = rule(10);
  std::vector<double> v(me.dim);
  double total = 0.0;
  auto piece = [&](std::size_t k, double a, double b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      double t = a + (b - a) * g.x[i];
      me.eval(k, t, v.data());
      acc += g.w[i] * std::pow(t, w) * std::pow(norm_of(v.data(), me.dim), p);
    }
    return acc * (b - a);
  };
  for (std::size_t k = 0; k < me.cells(); ++k) {
    double a = me.m[k], b = me.m[k + 1];
    // |u|^p has a kink where a scalar interpolant changes sign
    if (me.dim == 1 && me.at(k)[0] * me.at(k + 1)[0] < 0.0) {
      double z = a + (b - a) * me.at(k)[0] / (me.at(k)[0] - me.at(k + 1)[0]);
      total += piece(k, a, z) + piece(k, z, b);
    } else {
      total += piece(k, a, b);
    }
  }
  return total;
}

}  // namespace

double weighted_lp_norm(const TimeSeries& u, const NormSpec& spec) {
  spec.validate();
  u.validate();
  Mesh me = build_mesh(u, spec.T);
  return std::pow(lp_power(me, spec.p, (1 - spec.mu) * spec.p), 1.0 / spec.p);
}

NormResult slobodetskii_seminorm(const TimeSeries& u, const NormSpec& spec) {
  spec.validate();
  u.validate();
  if (!(spec.s > 0.0 && spec.s < 1.0)) throw InvalidSpec("seminorm needs s in (0, 1)");
  const double p = spec.p, w = (1 - spec.mu) * p, ker = 1 + spec.s * p, a = p - spec.s * p;
  Mesh me = build_mesh(u, spec.T);
  const std::size_t K = me.cells();
  const Rule& g = rule(6);
  const int d = me.dim;
  std::vector<double> ut(d), ua(d);

  // tensor Gauss on a rectangle tau in [t0,t1] (cell ka), t in [s0,s1] (cell kb)
  auto rect = [&](std::size_t ka, double t0, double t1, std::size_t kb, double s0, double s1) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.x.size(); ++j) {
      double t = s0 + (s1 - s0) * g.x[j];
      me.eval(kb, t, ut.data());
      for (std::size_t i = 0; i < g.x.size(); ++i) {
        double tau = t0 + (t1 - t0) * g.x[i];
        me.eval(ka, tau, ua.data());
        double diff = 0.0;
        for (int c = 0; c < d; ++c) diff += (ut[c] - ua[c]) * (ut[c] - ua[c]);
        if (diff == 0.0) continue;
        acc += g.w[i] * g.w[j] * std::pow(tau, w) * std::pow(diff, 0.5 * p) / std::pow(t - tau, ker);
      }
    }
    return acc * (t1 - t0) * (s1 - s0);
  };

  double off = 0.0;
  for (std::size_t kb = 1; kb < K; ++kb) {
    for (std::size_t ka = 0; ka + 1 < kb; ++ka)
      off += rect(ka, me.m[ka], me.m[ka + 1], kb, me.m[kb], me.m[kb + 1]);
    // neighbouring cells share a corner where the kernel is singular: refine towards it
    const std::size_t ka = kb - 1;
    const double c = me.m[kb], ha = c - me.m[ka], hb = me.m[kb + 1] - c;
    for (int j = 0; j < 40; ++j) {
      double r0 = std::ldexp(1.0, -j), r1 = std::ldexp(1.0, -j - 1);
      off += rect(ka, c - ha * r0, c - ha * r1, kb, c, c + hb * r1);
      off += rect(ka, c - ha * r0, c - ha * r1, kb, c + hb * r1, c + hb * r0);
      off += rect(ka, c - ha * r1, c, kb, c + hb * r1, c + hb * r0);
    }
  }

  // diagonal cells: u(t) - u(tau) = g (t - tau) for the interpolant, so the inner integral is explicit
  double band = 0.0;
  const Rule& g16 = rule(16);
  for (std::size_t k = 0; k < K; ++k) {
    double L = me.slope_norm(k);
    if (L == 0.0) continue;
    double m0 = me.m[k], m1 = me.m[k + 1], h = m1 - m0, acc = 0.0;
    if (w == 0.0) {
      acc = std::pow(h, a + 1) / (a + 1);
    } else {
      for (std::size_t i = 0; i < g16.x.size(); ++i) {
        double tau = m0 + h * g16.x[i];
        acc += g16.w[i] * std::pow(tau, w) * std::pow(m1 - tau, a);
      }
      acc *= h;
    }
    band += std::pow(L, p) / a * acc;
  }

  double value = std::pow(off + band, 1.0 / p);
  return {value, value - std::pow(off, 1.0 / p)};
}

TimeSeries time_derivative(const TimeSeries& u, int order) {
  u.validate();
  if (order < 0) throw InvalidSpec("derivative order must be non-negative");
  if (order > 0 && static_cast<int>(u.size()) < std::max(3, order + 2))
    throw InsufficientSamples("derivative of order " + std::to_string(order) + " needs at least " +
                              std::to_string(std::max(3, order + 2)) + " samples");
  TimeSeries cur = u;
  for (int k = 0; k < order; ++k) {
    const auto& t = cur.times;
    const std::size_t n = t.size();
    const int d = cur.dim;
    std::vector<double> out(cur.values.size());
    auto v = [&](std::size_t i, int c) { return cur.values[i * d + c]; };
    for (int c = 0; c < d; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        double r;
        if (i == 0) {
          double h1 = t[1] - t[0], h2 = t[2] - t[1];
          r = -(2 * h1 + h2) / (h1 * (h1 + h2)) * v(0, c) + (h1 + h2) / (h1 * h2) * v(1, c) -
              h1 / (h2 * (h1 + h2)) * v(2, c);
        } else if (i == n - 1) {
          double h1 = t[n - 2] - t[n - 3], h2 = t[n - 1] - t[n - 2];
          r = (2 * h2 + h1) / (h2 * (h1 + h2)) * v(n - 1, c) - (h1 + h2) / (h1 * h2) * v(n - 2, c) +
              h2 / (h1 * (h1 + h2)) * v(n - 3, c);
        } else {
          double h1 = t[i] - t[i - 1], h2 = t[i + 1] - t[i];
          r = -h2 / (h1 * (h1 + h2)) * v(i - 1, c) + (h2 - h1) / (h1 * h2) * v(i, c) +
              h1 / (h2 * (h1 + h2)) * v(i + 1, c);
        }
        out[i * d + c] = r;
      }
    }
    cur.values = std::move(out);
  }
  return cur;
}

NormResult sobolev_slobodetskii_norm(const TimeSeries& u, const NormSpec& spec) {
  spec.validate();
  u.validate();
  const int k = static_cast<int>(std::floor(spec.s));
  const double frac = spec.s - k;
  double sum = 0.0;
  TimeSeries dk = u;
  for (int j = 0; j <= k; ++j) {
    if (j > 0) dk = time_derivative(dk, 1);
    sum += std::pow(weighted_lp_norm(dk, spec), spec.p);
  }
  if (frac == 0.0) return {std::pow(sum, 1.0 / spec.p), 0.0};
  NormSpec sp = spec;
  sp.s = frac;
  auto semi = slobodetskii_seminorm(dk, sp);
  double value = std::pow(sum + std::pow(semi.value, spec.p), 1.0 / spec.p);
  double lower = std::pow(sum + std::pow(semi.value - semi.error_bar, spec.p), 1.0 / spec.p);
  return {value, value - lower};
}

}  // namespace curveflow
