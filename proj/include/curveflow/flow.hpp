#pragma once
#include <optional>
#include <string>
#include <vector>

#include "curveflow/curve.hpp"

namespace curveflow {

enum class Redistribution { every_step, every_k_steps };

struct FlowConfig {
  double alpha = 1.5707963267948966;
  int n = 200;
  double dt_init = 1e-5;
  double dt_min = 1e-12;
  double dt_max = 0.0;     // 0: dt_init
  double dt_growth = 1.0;  // factor applied after a step accepted without retry
  double t_end = 1e-2;
  double cfl = 0.25;  // explicit fallback step = cfl (L/n)^4; 0 disables the fallback
  double kappa_l2_threshold = 1e3;
  double max_kappa_change = 0.0;  // largest relative change of kappa_l2 per accepted step; 0: unlimited
  Redistribution redistribution = Redistribution::every_k_steps;
  int redistribute_every = 25;
  int snapshot_stride = 100;  // accepted steps between snapshots

  void validate() const;
};

struct DiagRow {
  double t = 0.0;
  double energy = 0.0;
  double length = 0.0;
  double area = 0.0;
  double kappa_l2 = 0.0;
  double kappa_max = 0.0;
  double dt = 0.0;
  double res_y = 0.0;        // max |y| at the endpoints
  double res_angle = 0.0;    // discrete (ghost-centred) contact-angle residual
  double res_dskappa = 0.0;  // discrete d_s kappa at the endpoints
  double angle_onesided = 0.0;  // one-sided stencil tangent error, informational
  bool seam = false;            // first row after a restart
};

class DiagnosticsRecord {
 public:
  void append(const DiagRow& r);
  const std::vector<DiagRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const DiagRow& back() const { return rows_.back(); }

 private:
  std::vector<DiagRow> rows_;
};

struct FlowState {
  SampledCurve curve;
  double t = 0.0;
  double dt = 0.0;
  DiagnosticsRecord diag;
  long accepted = 0;
  int streak = 0;  // accepted steps since the last retry
};

DiagRow measure(const SampledCurve& c, double alpha, double t, double dt);

FlowState init_state(const SampledCurve& curve, const FlowConfig& cfg);

struct StepReport {
  int retries = 0;
  bool explicit_fallback = false;
};

// One accepted step. dt_cap (if positive) bounds the step without changing the
// state's nominal dt; used to land on t_end.
FlowState step(const FlowState& s, const FlowConfig& cfg, double dt_cap = 0.0, StepReport* report = nullptr);

// In-place variant used by run(); appends to s.diag.
void advance(FlowState& s, const FlowConfig& cfg, double dt_cap = 0.0, StepReport* report = nullptr);

// Forward Euler on the normal velocity, endpoints sliding on the axis; the
// fallback when the implicit system is singular.
SampledCurve explicit_step(const SampledCurve& c, double alpha, double dt);

enum class Verdict { completed, blowup_suspected, step_failure };
std::string to_string(Verdict v);

struct BlowupVerdict {
  Verdict verdict = Verdict::completed;
  std::optional<std::size_t> index;
  std::optional<double> t;
};

BlowupVerdict detect_blowup(const DiagnosticsRecord& diag, const FlowConfig& cfg);

struct Snapshot {
  double t;
  SampledCurve curve;
  DiagRow row;
  bool self_intersecting = false;
};

struct RunResult {
  std::vector<Snapshot> snapshots;
  BlowupVerdict verdict;
  FlowState final_state;
  std::optional<FlowState> pre_trigger;  // last accepted state before the monitor fired
  std::string message;
};

RunResult run(const FlowState& s, const FlowConfig& cfg);

bool polyline_self_intersects(const SampledCurve& c);

}  // namespace curveflow
