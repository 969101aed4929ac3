#pragma once
#include <vector>

namespace curveflow {

struct NormSpec {
  double s = 0.0;   // smoothness order
  double p = 2.0;   // integrability, in (1, inf)
  double mu = 1.0;  // weight exponent, in (1/p, 1]
  double T = 1.0;   // interval (0, T)

  void validate() const;
};

// Samples u(t_i); values hold dim components per sample (row-major), |.| is the Euclidean norm.
// Between samples u is linear; before the first and after the last sample it is held constant.
// Samples beyond T are ignored.
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  int dim = 1;

  TimeSeries() = default;
  TimeSeries(std::vector<double> t, std::vector<double> v, int d = 1);
  std::size_t size() const { return times.size(); }
  void validate() const;
};

struct NormResult {
  double value;
  double error_bar;  // from the diagonal band of the seminorm; 0 for pure Lebesgue parts
};

// (int_0^T t^{(1-mu)p} |u|^p dt)^{1/p}
double weighted_lp_norm(const TimeSeries& u, const NormSpec& spec);

// (int_0^T int_0^t tau^{(1-mu)p} |u(t)-u(tau)|^p / (t-tau)^{1+sp} dtau dt)^{1/p}, s in (0,1).
// Cell pairs off the diagonal are integrated by Gauss rules; the diagonal cells are taken
// from the local Lipschitz model of the interpolant and their share is the error bar.
NormResult slobodetskii_seminorm(const TimeSeries& u, const NormSpec& spec);

// Time derivative of order k by second-order finite differences on the sample times.
TimeSeries time_derivative(const TimeSeries& u, int order = 1);

// p-sum of ||u^(j)||, j <= floor(s), plus the seminorm of u^(floor s) for fractional s.
NormResult sobolev_slobodetskii_norm(const TimeSeries& u, const NormSpec& spec);

}  // namespace curveflow
