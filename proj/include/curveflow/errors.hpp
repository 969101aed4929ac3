#pragma once
#include <stdexcept>
#include <string>

namespace curveflow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidCurve : Error { using Error::Error; };
struct DegenerateCurve : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };
struct IncompatibleInitialCurve : Error { using Error::Error; };
struct InvalidAngle : Error { using Error::Error; };
struct AngleMismatch : Error { using Error::Error; };
struct EndpointsOffAxis : Error { using Error::Error; };

// dt fell below dt_min; treated downstream as a candidate blow-up
struct StepFailure : Error {
  double t;
  double dt;
  StepFailure(const std::string& msg, double t_, double dt_) : Error(msg), t(t_), dt(dt_) {}
};

struct LinearSolveFailure : Error { using Error::Error; };
struct IncompatibleBoundary : Error { using Error::Error; };
struct InvalidProfile : Error { using Error::Error; };
struct InvalidChart : Error { using Error::Error; };
struct OutOfTube : Error { using Error::Error; };

struct OutsideTube : Error {
  double sigma;
  OutsideTube(const std::string& msg, double s) : Error(msg), sigma(s) {}
};
struct NonMonotone : Error {
  double sigma;
  NonMonotone(const std::string& msg, double s) : Error(msg), sigma(s) {}
};
struct NewtonDivergence : Error {
  double sigma;
  NewtonDivergence(const std::string& msg, double s) : Error(msg), sigma(s) {}
};

struct InsufficientSamples : Error { using Error::Error; };
struct NoAdmissibleEpsilon : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };
struct NotReadyForRestart : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace curveflow
