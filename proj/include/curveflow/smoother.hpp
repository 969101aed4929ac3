#pragma once
#include <Eigen/Core>
#include <optional>
#include <vector>

#include "curveflow/curve.hpp"

namespace curveflow {

// d_t f = d^6 f on (0,1), f = f0, f' = f0', f'' = 0 at both ends.
// Split f = xi + v with xi the quintic corrector; v carries homogeneous data.
struct SmootherProblem {
  SampledCurve f0;
  Eigen::Matrix<double, 6, 2> xi_coeffs;  // xi(s) = sum_k c_k s^k per component
  std::vector<Point> xi;                  // xi on the grid
  std::vector<Point> u0;                  // f0 - xi on the grid
  std::vector<Point> h;                   // d^6 xi, identically zero for a quintic
  Point d0, d1;                           // endpoint sigma-derivatives of f0
  double mu = 1.0;

  Point xi_at(double s, int derivative = 0) const;
};

SmootherProblem build_corrector(const SampledCurve& f0, double mu = 1.0);

// Residuals of the six corrector conditions (value, slope, second derivative, both ends).
double corrector_residual(const SmootherProblem& p);

enum class TimeScheme { backward_euler, crank_nicolson };

struct SmoothOptions {
  double dt = 0.0;  // 0: epsilon / steps
  int steps = 200;
  TimeScheme scheme = TimeScheme::backward_euler;
};

struct SmoothResult {
  SampledCurve curve;
  double bc_residual = 0.0;      // worst boundary-condition residual over all steps
  std::vector<double> h3_history;  // discrete H^3 seminorm of v per step
  int steps = 0;
};

SmoothResult smooth_detailed(const SmootherProblem& p, double epsilon, const SmoothOptions& opt = {});
SampledCurve smooth(const SmootherProblem& p, double epsilon, const SmoothOptions& opt = {});

struct RateReport {
  std::vector<double> epsilons;
  std::vector<double> c0_distance, c1_distance, c2_norm;
  std::optional<double> c0_order, c1_order, c2_exponent;  // empty: not applicable
  double theory_c0, theory_c1, theory_c2;
  double mu;
};

RateReport rate_probe(const SmootherProblem& p, const std::vector<double>& epsilons, const SmoothOptions& opt = {});

// sup-norm helpers on grid data (derivatives by the curve_core stencils)
double c0_distance(const SampledCurve& a, const SampledCurve& b);
double c1_distance(const SampledCurve& a, const SampledCurve& b);
double c2_norm(const SampledCurve& a);

}  // namespace curveflow
