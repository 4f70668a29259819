#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvfunc/functionals.hpp"
#include "curvfunc/metric.hpp"

namespace curvfunc {

/// One diagnostic row of a flow trace; column set matches the CSV schema.
struct FlowRow {
  long step = 0;
  double t = 0.0;
  double S = 0.0;
  double H = 0.0;
  double Vol = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
  double Lambda = 0.0;
  double v_norm = 0.0;
  double critical_residual = 0.0;
  double trace_residual = 0.0;
  double dt = 0.0;
};

struct FlowTrace {
  std::string kind;  // gradient | yamabe | perturbed-yamabe
  std::string grid_descriptor;
  std::uint64_t seed = 0;
  std::vector<FlowRow> rows;
  bool halted_early = false;
  std::string halt_reason;
  MetricField final_metric;
  /// Perturbed flow only: worst |<s + mean(s), A(u - v)>| over the recorded
  /// states (the per-step orthogonality defect of the construction).
  double worst_ortho_defect = 0.0;
};

struct FlowOptions {
  double dt = 1e-3;
  double solver_rel_tol = 1e-10;
  /// Gradient flow only: abort the run after this many consecutive
  /// substep-halvings without an energy decrease.
  int max_rejections = 40;
  /// Gradient flow only: cap on inner Euler substeps per recorded step.
  int max_substeps = 64;
};

/// Volume-projected steepest descent of S: dg/dt = -(grad S - mu(t) g).
/// Each recorded step advances up to opt.dt of flow time by sub-cycling
/// explicit Euler substeps whose size adapts (halving on any S increase) to
/// the stability limit of the stiff fourth-order velocity; volume is
/// renormalized after every substep. The dt column reports the flow time
/// actually advanced in that step.
FlowTrace gradient_flow_run(const MetricField& g0, int steps, const FlowOptions& opt = {});

/// Yamabe flow dg/dt = (mean(s) - s) g, RK4, volume renormalized per step.
/// Each recorded step of size opt.dt is internally divided into equal RK4
/// substeps below the linear stability limit of the conformal velocity.
FlowTrace yamabe_flow_run(const MetricField& g0, int steps, const FlowOptions& opt = {});

/// Projection coefficient of the perturbed flow:
/// Lambda = <s + mean(s), A u> / ||s + mean(s)||^2 with u = mean(s) - s and
/// A = (2n-2) Lap + (n-4)/2 (s - mean(s)). Returns 0 for constant s; hard
/// error when the denominator sits below floor with nonconstant s.
double compute_Lambda(const MetricField& g);

/// Solve A v = Lambda (s + mean(s)) on the mean-zero subspace; the returned
/// v is scaled so that <s + mean(s), A (u - v)> vanishes identically.
/// Rejects n = 4, where the (n-4)/2 coefficient of the construction is zero.
ScalarField solve_perturbation_v(const MetricField& g, double solver_rel_tol = 1e-10);

/// Perturbed Yamabe flow dg/dt = (mean(s) - s - v) g, RK4 with Lambda and v
/// recomputed at every stage. Solver failure halts the run cleanly with the
/// last valid state in the trace.
FlowTrace perturbed_yamabe_run(const MetricField& g0, int steps, const FlowOptions& opt = {});

/// Second-variation form at h = gdot(0) = (mean(s) - s - v) g of a
/// perturbed-flow start.
double level_set_hessian_check(const MetricField& g0, const FlowTrace& trace);

/// Orthogonality defect <s + mean(s), A(u - v)> for diagnostics.
double perturbation_orthogonality_defect(const MetricField& g, const ScalarField& v);

}  // namespace curvfunc
