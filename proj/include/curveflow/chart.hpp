#pragma once
#include <Eigen/Core>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "curveflow/curve.hpp"
#include "curveflow/spline.hpp"

namespace curveflow {

// Cutoff: -1 on [0,1/6), 0 on [2/6,4/6), 1 on [5/6,1], polynomial smoothstep between.
struct EtaSpec {
  int degree = 5;  // 3, 5 or 7
  double prime_norm = 11.25;

  double operator()(double s) const;
  double d1(double s) const;
};

EtaSpec make_eta(int degree = 5);

// Two readings of the constant C-hat appear in the literature: (sqrt2 sin a)^-1 and sqrt2 sin a.
enum class HatCReading { reciprocal, direct };

double hat_c(double alpha, HatCReading reading);

struct ConstantInputs {
  double alpha;
  double kappa_norm;      // sup |kappa| of the reference
  double length;          // L of the reference
  double eta_prime_norm;
  double lambda;
  HatCReading reading = HatCReading::reciprocal;
};

struct ConstantsReport {
  double alpha, cot_alpha, hat_c;
  double C_alpha, C_alpha_bar, d, K0, K1, xi0, xi1, lambda_max, lambda;
  double eta_prime_norm, kappa_norm, L_phi;
  HatCReading reading;
};

ConstantsReport compute_constants(const ConstantInputs& in);
double lambda_max(double alpha, double C_alpha);
// the bracketed factor of xi1; multiplied by L (reference perspective) or K (initial-curve perspective)
double xi1_factor(double alpha);

struct ChartOptions {
  double lambda = 0.0;  // 0: 0.9 * lambda_max
  EtaSpec eta = make_eta(5);
  HatCReading reading = HatCReading::reciprocal;
};

// Endpoint conditions of a reference: on the axis, angle alpha, zero curvature.
struct ReferenceResiduals {
  double axis = 0.0, angle = 0.0, kappa = 0.0;
};

class ChartSpec {
 public:
  // The reference is resampled to uniform arc length with the same node count.
  ChartSpec(const SampledCurve& reference, double alpha, const ChartOptions& opt = {});

  const SampledCurve& phi_star() const { return phi_star_; }
  double alpha() const { return alpha_; }
  double cot_alpha() const { return cot_; }
  const EtaSpec& eta() const { return eta_; }
  double lambda() const { return consts_.lambda; }
  double d() const { return consts_.d; }
  double length() const { return length_; }
  double kappa_norm() const { return kappa_norm_; }
  const ConstantsReport& constants() const { return consts_; }
  const ReferenceResiduals& residuals() const { return residuals_; }
  bool lambda_admissible() const { return consts_.lambda < consts_.lambda_max; }

  // Reference and frame, linearly extended (eta constant) outside [0,1].
  Point phi(double s) const;
  Point phi_d1(double s) const;
  Point tangent(double s) const;
  Point normal(double s) const { return rot90(tangent(s)); }
  Point tangent_d1(double s) const;
  double kappa(double s) const;
  double eta_at(double s) const;
  // d Psi / d q = n + cot(a) eta tau
  Point fiber(double s) const;

  // Psi without the tube check; valid on the extension too.
  Point psi(double s, double q) const;
  // columns d/dsigma, d/dq
  Eigen::Matrix2d psi_jacobian(double s, double q) const;

 private:
  SampledCurve phi_star_;
  CubicSpline2 spline_;
  double alpha_, cot_;
  EtaSpec eta_;
  double length_ = 0.0, kappa_norm_ = 0.0;
  ConstantsReport consts_{};
  ReferenceResiduals residuals_;
};

// The tube map; throws OutOfTube for |q| >= d and InvalidArgument for sigma outside [0,1].
Point chart_eval(const ChartSpec& chart, double sigma, double q);

struct JacobianReport {
  double min_det;
  double bound;  // (1 - lambda) L
  double sigma_at_min, q_at_min;
  bool passed;
};

// |det D Psi| on sigma in [0,1] (n_sigma nodes) times q midpoints of (-lambda d, lambda d).
JacobianReport chart_jacobian_check(const ChartSpec& chart, int n_sigma = 200, int n_q = 50,
                                    std::optional<double> lambda = std::nullopt);

struct ChartPoint {
  double sigma, q;
};

// Local inverse of Psi by Newton from a guess.
ChartPoint chart_inverse(const ChartSpec& chart, const Point& p, ChartPoint guess);

struct HeightField {
  ChartSpec chart;
  std::vector<double> sigma;  // chart grid
  ScalarField rho;
  ScalarField phi;
  double residual = 0.0;       // max |f0(phi) - Psi(sigma, rho)|
  double compat = 0.0;         // max endpoint |d rho / d sigma|
  double min_phi_step = 0.0;   // min of phi_{j+1} - phi_j, scaled by n
  double min_fiber_cos = 0.0;  // min <n_f0, dPsi/dq>, injectivity certificate when > 1/2

  // build(h)(sigma) = Psi(sigma, rho(sigma))
  SampledCurve build() const;
};

// Height field over the chart grid with rho given pointwise.
HeightField make_height_field(const ChartSpec& chart, ScalarField rho);

HeightField extract_height(const ChartSpec& chart, const SampledCurve& f0);

struct Check {
  std::string name;
  bool passed;
  double value;
  double limit;
  std::string note;
  double margin() const { return limit - value; }
};

struct VerifyOptions {
  std::optional<double> xi1_length;  // default L of the reference
  double angle_tol = 1e-2;           // initial-condition check on f0
};

struct VerifyReport {
  bool passed = false;
  std::vector<Check> checks;
  ConstantsReport constants;
  std::optional<HeightField> height;

  const Check* find(const std::string& name) const;
  // first failing check, empty if all passed
  std::string first_failure() const;
};

VerifyReport verify_reference(const ChartSpec& chart, const SampledCurve& f0, const VerifyOptions& opt = {});

}  // namespace curveflow
