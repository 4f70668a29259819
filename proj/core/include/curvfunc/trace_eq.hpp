#pragma once

#include <vector>

#include "curvfunc/metric.hpp"

namespace curvfunc {

/// Trajectory of the planar system u' = w, w' = (c^2 - u^2)/2, the critical
/// trace equation reduced to one dimension.
struct OdeOrbit {
  double c = 0.0;
  double u0 = 0.0;
  double v0 = 0.0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<double> values;  // u(t)
  std::vector<double> derivs;  // u'(t)
  bool constant = false;       // equilibrium orbit
  bool periodic = false;
  double period = 0.0;         // valid when periodic
  double energy_K = 0.0;       // K = u'^2 - c^2 u + u^3/3 at t = 0
  double energy_drift = 0.0;   // max |K(t) - K(0)| along the trajectory
  bool blew_up = false;
};

/// RK4 integration of 2 u'' = c^2 - u^2 up to t_max, with period detection
/// by a Poincare section (u' = 0 with u decreasing through a maximum above
/// the center u = c) and quadratic crossing interpolation.
OdeOrbit ode_integrate(double c, double u0, double v0, double t_max);

/// Period of the bounded orbit at energy K from the first integral:
/// T = 2 int_{u-}^{u+} du / sqrt(K + c^2 u - u^3/3), with square-root
/// substitutions at both turning points. Throws config_error when K does
/// not correspond to a bounded orbit.
double ode_period_quadrature(double c, double K);

/// Newton iteration for 2 Lap u - (u^2 - c^2) = 0 on a flat torus metric;
/// the linearized problems reuse the Krylov solver. Returns u with
/// L2-residual below tol.
ScalarField pde_solve_torus(const MetricField& g, double c, const ScalarField& u_init,
                            double tol = 1e-8, int max_newton = 50);

/// L2 residual of 2 Lap u - (u^2 - c^2) under g.
double pde_residual(const MetricField& g, double c, const ScalarField& u);

/// Resample a periodic orbit along one chart axis (constant in the other
/// axes). The axis period must be an integer multiple of the orbit period.
ScalarField embed_ode_profile(const OdeOrbit& orbit, const ChartPtr& chart, int axis,
                              double period_tol = 1e-6);

}  // namespace curvfunc
