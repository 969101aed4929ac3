#pragma once
#include <optional>
#include <string>
#include <vector>

#include "curveflow/chart.hpp"
#include "curveflow/flow.hpp"
#include "curveflow/smoother.hpp"

namespace curveflow {

enum class RestartPolicy { never, at_time, on_blowup_suspect };
std::string to_string(RestartPolicy p);

struct SeedSpec {
  std::string kind = "semicircle";  // semicircle | cap | bumped_cap | looped_cap | file
  double radius = 1.0;
  double bump = 0.0;
  double loop_radius = 0.15;
  double loop_pos = 0.4;
  std::string path;  // kind = file, resolved against the manifest directory
};

struct ScanSettings {
  std::vector<double> epsilons = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};  // tried large to small
  double mu = 1.0;
  SmoothOptions smooth;
  ChartOptions chart;
  VerifyOptions verify;
};

struct RestartSettings {
  RestartPolicy policy = RestartPolicy::never;
  double at = 0.0;  // trigger time for at_time
};

struct RunManifest {
  FlowConfig flow;
  SeedSpec seed;
  ScanSettings scan;
  RestartSettings restart;
  std::string out_dir = "out";
  bool svg = true;
  std::string base_dir = ".";  // directory of the manifest file

  // Throws ConfigError; creates out_dir when create_out is set.
  void validate(bool create_out = false) const;
};

RunManifest parse_manifest(const std::string& toml_text, const std::string& base_dir = ".");
RunManifest load_manifest(const std::string& path);

SampledCurve make_seed(const RunManifest& m);

struct ScanEntry {
  double epsilon;
  bool passed;
  std::string failure;  // first failing check or the exception text
};

struct RestartPrep {
  SampledCurve f_tilde;  // arc-length reparametrized, anchored at f(0)
  double epsilon = 0.0;
  HeightField height;  // over the accepted chart
  VerifyReport report;
  std::vector<ScanEntry> scan;

  // W^2_2 ingredients of f_tilde on I = (0,1)
  double length = 0.0;
  double ds_l2 = 0.0;          // ||d_s f_tilde||, equals L
  double tangent_l2_arc = 0.0; // ||tau||_{L2(0,L)}, equals L^{1/2}
  double dss_l2 = 0.0;         // ||d_s^2 f_tilde||
  double dss_expected = 0.0;   // L^{3/2} ||kappa||_{L2(0,L)}

  const ChartSpec& chart() const { return height.chart; }
  // Psi(sigma, rho(sigma)) brought to arc-length parametrization; the flow restarts from it
  SampledCurve restarted() const;
};

// Arc-length resample through a not-a-knot spline on the curve's own uniform grid.
// Unlike resample_uniform_arclength (chord knots) it stays fourth order for strongly
// non-uniform node spacing.
SampledCurve reparametrize_arclength(const SampledCurve& c);

// f_tilde(s) = L ( int_0^s int_0^r kvec L dy + tau(0) ) dr, then shifted by f(0).
SampledCurve reconstruct_arclength(const SampledCurve& c);

RestartPrep restart_prepare(const FlowState& state, const FlowConfig& cfg, const ScanSettings& scan = {});

struct Seam {
  double t = 0.0;
  std::size_t diag_index = 0;      // first row after the restart
  std::size_t snapshot_index = 0;  // first snapshot after the restart
  double epsilon = 0.0;
  ConstantsReport constants{};
  std::vector<Check> checks;
  std::vector<ScanEntry> scan;
  // relative jumps of the intrinsic quantities, and the Hausdorff distance of the images
  double jump_energy = 0.0, jump_length = 0.0, jump_area = 0.0, jump_kappa_l2 = 0.0;
  double abs_jump_area = 0.0;
  double hausdorff = 0.0;
};

struct Trajectory {
  double alpha = 0.0;
  std::vector<Snapshot> snapshots;
  std::vector<DiagRow> diag;  // every accepted step; the seam repeats the restart time, marked
  BlowupVerdict verdict;
  std::string message;
  std::vector<Seam> seams;
  FlowState final_state;
};

Trajectory extend_run(const RunManifest& m);
// Same, from an explicit initial curve.
Trajectory extend_run(const SampledCurve& seed, const RunManifest& m);

// Symmetric Hausdorff distance of the two polylines' vertex sets against the other polyline.
double hausdorff_distance(const SampledCurve& a, const SampledCurve& b);

struct OutputFiles {
  std::string diag_csv, report_json, svg;
  std::vector<std::string> snapshots;
};

// diag.csv (one row per snapshot), snap_<k>.csv, report.json, curves.svg. Throws IoFailure.
OutputFiles emit_outputs(const Trajectory& tr, const RunManifest& m);

int exit_code(const Verdict& v);

}  // namespace curveflow
