#include "curvfunc/trace_eq.hpp"

#include <cmath>
#include <string>

#include "curvfunc/curvature.hpp"
#include "curvfunc/errors.hpp"
#include "curvfunc/geometry.hpp"
#include "curvfunc/solver.hpp"

namespace curvfunc {

namespace {

double energy_of(double c, double u, double w) {
  return w * w - c * c * u + u * u * u / 3.0;
}

struct State {
  double u, w;
};

State rhs(double c, const State& y) { return {y.w, 0.5 * (c * c - y.u * y.u)}; }

State rk4_step(double c, const State& y, double dt) {
  const State k1 = rhs(c, y);
  const State k2 = rhs(c, {y.u + 0.5 * dt * k1.u, y.w + 0.5 * dt * k1.w});
  const State k3 = rhs(c, {y.u + 0.5 * dt * k2.u, y.w + 0.5 * dt * k2.w});
  const State k4 = rhs(c, {y.u + dt * k3.u, y.w + dt * k3.w});
  return {y.u + dt / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
          y.w + dt / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w)};
}

/// Root of the quadratic through (t0,f0),(t1,f1),(t2,f2) inside [t1,t2].
double quadratic_crossing(double t0, double f0, double t1, double f1, double t2, double f2) {
  // Newton-form quadratic in tau = t - t1
  const double h0 = t1 - t0, h1 = t2 - t1;
  const double d0 = (f1 - f0) / h0, d1 = (f2 - f1) / h1;
  const double a = (d1 - d0) / (h0 + h1);
  const double b = d1 - a * h1;  // derivative at t1 from the forward side
  const double cq = f1;
  // solve a tau^2 + b tau + cq = 0
  if (a == 0.0) return t1 - cq / b;
  const double disc = b * b - 4.0 * a * cq;
  if (disc < 0.0) return t1 - cq / b;
  const double sq = std::sqrt(disc);
  const double tau1 = (-b + sq) / (2.0 * a);
  const double tau2 = (-b - sq) / (2.0 * a);
  const double pick = (tau1 >= 0.0 && tau1 <= h1) ? tau1 : tau2;
  return t1 + pick;
}

double cubic_p(double c, double K, double u) { return K + c * c * u - u * u * u / 3.0; }

/// One smooth half of the period integral after the substitution
/// u = turning + sign * xi^2, integrated with composite Simpson.
double half_period(double c, double K, double turning, double mid, int sign) {
  const double xi_max = std::sqrt(std::abs(mid - turning));
  const int intervals = 4000;  // even
  const double h = xi_max / intervals;
  auto f = [&](double xi) {
    const double u = turning + sign * xi * xi;
    const double p = cubic_p(c, K, u);
    if (xi == 0.0 || p <= 0.0) {
      // limit at (or roundoff below) the turning point: 2/sqrt(|P'(u)|)
      const double dp = c * c - u * u;
      return 2.0 / std::sqrt(std::abs(dp));
    }
    return 2.0 * xi / std::sqrt(p);
  };
  double acc = f(0.0) + f(xi_max);
  for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(h * i);
  return acc * h / 3.0;
}

double bisect_root(double c, double K, double lo, double hi) {
  double flo = cubic_p(c, K, lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = cubic_p(c, K, mid);
    if ((flo > 0.0) == (fm > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

OdeOrbit ode_integrate(double c, double u0, double v0, double t_max) {
  if (!std::isfinite(c) || !std::isfinite(u0) || !std::isfinite(v0) || !(t_max > 0.0))
    throw config_error("ode_integrate: inputs must be finite and t_max positive");

  OdeOrbit orbit;
  orbit.c = c;
  orbit.u0 = u0;
  orbit.v0 = v0;
  orbit.energy_K = energy_of(c, u0, v0);

  // equilibrium orbits
  if (v0 == 0.0 && std::abs(c * c - u0 * u0) == 0.0) {
    orbit.constant = true;
    orbit.dt = t_max / 2000.0;
    for (int i = 0; i <= 2000; ++i) {
      orbit.times.push_back(orbit.dt * i);
      orbit.values.push_back(u0);
      orbit.derivs.push_back(0.0);
    }
    return orbit;
  }

  const double t_est = c > 0.0 ? 2.0 * 3.14159265358979323846 / std::sqrt(c) : 1.0;
  const double dt = t_est / 2000.0;
  orbit.dt = dt;
  const double escape = 10.0 * std::max({std::abs(c), std::abs(u0), 1.0});

  State y{u0, v0};
  orbit.times.push_back(0.0);
  orbit.values.push_back(y.u);
  orbit.derivs.push_back(y.w);

  std::vector<double> crossings;
  const std::size_t nsteps = static_cast<std::size_t>(std::ceil(t_max / dt));
  for (std::size_t k = 1; k <= nsteps; ++k) {
    y = rk4_step(c, y, dt);
    const double t = dt * static_cast<double>(k);
    orbit.times.push_back(t);
    orbit.values.push_back(y.u);
    orbit.derivs.push_back(y.w);
    orbit.energy_drift = std::max(orbit.energy_drift,
                                  std::abs(energy_of(c, y.u, y.w) - orbit.energy_K));
    if (std::abs(y.u) > escape) {
      orbit.blew_up = true;
      break;
    }
    // Poincare section: u' falls through zero at a maximum above the center
    const std::size_t m = orbit.values.size();
    if (m >= 3) {
      const double w_prev = orbit.derivs[m - 2];
      const double w_cur = orbit.derivs[m - 1];
      if (w_prev > 0.0 && w_cur <= 0.0 && orbit.values[m - 1] > c) {
        crossings.push_back(quadratic_crossing(orbit.times[m - 3], orbit.derivs[m - 3],
                                               orbit.times[m - 2], w_prev,
                                               orbit.times[m - 1], w_cur));
      }
    }
  }

  if (crossings.size() >= 2) {
    orbit.periodic = true;
    orbit.period = (crossings.back() - crossings.front()) /
                   static_cast<double>(crossings.size() - 1);
  }
  return orbit;
}

double ode_period_quadrature(double c, double K) {
  if (!(c > 0.0)) throw config_error("ode_period_quadrature: c must be positive");
  const double saddle_level = 2.0 / 3.0 * c * c * c;  // energy through u = -c
  if (!(K > -saddle_level && K < saddle_level))
    throw config_error("ode_period_quadrature: no bounded orbit at this energy");

  // turning points bracket the center u = c: P > 0 at c, P < 0 outside
  double hi = c;
  while (cubic_p(c, K, hi) > 0.0) hi += c;
  const double u_plus = bisect_root(c, K, c, hi);
  const double u_minus = bisect_root(c, K, -c, c);
  const double mid = 0.5 * (u_minus + u_plus);
  return 2.0 * (half_period(c, K, u_minus, mid, +1) + half_period(c, K, u_plus, mid, -1));
}

double pde_residual(const MetricField& g, double c, const ScalarField& u) {
  ScalarField lap = laplacian(u, g);
  ScalarField resid(u.chart());
  for (std::size_t i = 0; i < resid.nodes(); ++i)
    resid[i] = 2.0 * lap[i] - (u[i] * u[i] - c * c);
  return l2_norm(resid, g);
}

ScalarField pde_solve_torus(const MetricField& g, double c, const ScalarField& u_init,
                            double tol, int max_newton) {
  require_same_chart(u_init.grid(), g.grid(), "pde_solve_torus");
  ScalarField u = u_init;
  for (int it = 0; it < max_newton; ++it) {
    ScalarField lap = laplacian(u, g);
    ScalarField resid(u.chart());
    for (std::size_t i = 0; i < resid.nodes(); ++i)
      resid[i] = 2.0 * lap[i] - (u[i] * u[i] - c * c);
    if (l2_norm(resid, g) < tol) return u;

    // Newton correction: (2 Lap - 2u) w = -resid
    ScalarOp jacobian = [&](const ScalarField& in, ScalarField& out) {
      out = laplacian(in, g);
      for (std::size_t i = 0; i < out.nodes(); ++i)
        out[i] = 2.0 * out[i] - 2.0 * u[i] * in[i];
    };
    SolveOptions sopt;
    sopt.rel_tol = 1e-12;
    ScalarField w = krylov_solve(jacobian, scale(resid, -1.0), g, sopt);
    for (std::size_t i = 0; i < u.nodes(); ++i) u[i] += w[i];
  }
  throw numerical_error("pde_solve_torus: Newton did not converge; final residual " +
                        std::to_string(pde_residual(g, c, u)));
}

ScalarField embed_ode_profile(const OdeOrbit& orbit, const ChartPtr& chart, int axis,
                              double period_tol) {
  if (axis < 0 || axis >= chart->dim)
    throw config_error("embed_ode_profile: axis out of range");
  ScalarField out(chart);
  if (orbit.constant) {
    std::fill(out.values().begin(), out.values().end(), orbit.u0);
    return out;
  }
  if (!orbit.periodic) throw config_error("embed_ode_profile: orbit is not periodic");
  if (orbit.values.size() < 2 ||
      orbit.dt * static_cast<double>(orbit.values.size() - 1) < orbit.period)
    throw config_error("embed_ode_profile: trajectory shorter than one period");

  const double length = chart->extent[axis];
  const double waves = length / orbit.period;
  const double k = std::round(waves);
  if (!(k >= 1.0) || std::abs(k * orbit.period - length) > period_tol)
    throw config_error("embed_ode_profile: axis period is not an integer multiple "
                       "of the orbit period");

  // per-axis-index profile by linear interpolation of the trajectory
  std::vector<double> profile(static_cast<std::size_t>(chart->res[axis]));
  for (int i = 0; i < chart->res[axis]; ++i) {
    double phase = std::fmod(chart->coord(axis, i) - chart->origin[axis], orbit.period);
    if (phase < 0.0) phase += orbit.period;
    const double pos = phase / orbit.dt;
    std::size_t j = static_cast<std::size_t>(pos);
    if (j + 1 >= orbit.values.size()) j = orbit.values.size() - 2;
    const double frac = pos - static_cast<double>(j);
    profile[static_cast<std::size_t>(i)] =
        (1.0 - frac) * orbit.values[j] + frac * orbit.values[j + 1];
  }

  std::array<int, kMaxDim> ix{};
  for (std::size_t node = 0; node < chart->node_count; ++node) {
    out[node] = profile[static_cast<std::size_t>(ix[axis])];
    for (int a = 0; a < chart->dim; ++a) {
      if (++ix[a] < chart->res[a]) break;
      ix[a] = 0;
    }
  }
  return out;
}

}  // namespace curvfunc
