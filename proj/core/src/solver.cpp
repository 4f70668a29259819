#include "curvfunc/solver.hpp"

#include <cmath>
#include <string>

#include "curvfunc/errors.hpp"
#include "curvfunc/geometry.hpp"

namespace curvfunc {

namespace {

/// Quadrature weights of the dmu_g inner product, one per node.
std::vector<double> quad_weights(const MetricField& g) {
  const ScalarField& rho = g.volume_density();
  const double w = g.grid().cell_weight();
  std::vector<double> out(g.nodes());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rho[i] * w;
  return out;
}

double weighted_inner(const std::vector<double>& w, const ScalarField& a,
                      const ScalarField& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * a[i] * b[i];
  return acc;
}

void remove_mean(const std::vector<double>& w, double total_weight, ScalarField& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f[i];
  const double mean = acc / total_weight;
  for (std::size_t i = 0; i < f.nodes(); ++i) f[i] -= mean;
}

struct Workspace {
  const ScalarOp& apply;
  const std::vector<double>& w;
  double total_weight;
  bool project;

  void op(const ScalarField& in, ScalarField& out) const {
    apply(in, out);
    if (project) remove_mean(w, total_weight, out);
  }
  double inner(const ScalarField& a, const ScalarField& b) const {
    return weighted_inner(w, a, b);
  }
};

void axpy(ScalarField& y, double a, const ScalarField& x) {
  for (std::size_t i = 0; i < y.nodes(); ++i) y[i] += a * x[i];
}

void scale_in_place(ScalarField& y, double a) {
  for (double& v : y.values()) v *= a;
}

bool minres(const Workspace& ws, const ScalarField& b, ScalarField& x,
            double rel_tol, std::size_t max_iter, SolveStats& stats) {
  const ChartPtr chart = b.chart();
  const double norm_b = std::sqrt(ws.inner(b, b));
  if (norm_b == 0.0) {
    std::fill(x.values().begin(), x.values().end(), 0.0);
    stats.relative_residual = 0.0;
    return true;
  }

  // residual of the incoming iterate
  ScalarField r(chart);
  ws.op(x, r);
  for (std::size_t i = 0; i < r.nodes(); ++i) r[i] = b[i] - r[i];

  double beta = std::sqrt(ws.inner(r, r));
  if (beta / norm_b <= rel_tol) {
    stats.relative_residual = beta / norm_b;
    return true;
  }

  ScalarField v = r;
  scale_in_place(v, 1.0 / beta);
  ScalarField v_old(chart), av(chart);
  ScalarField w_new(chart), w_cur(chart), w_old(chart);

  double eta = beta;
  double c = 1.0, c_old = 1.0, s = 0.0, s_old = 0.0;

  for (std::size_t k = 0; k < max_iter; ++k) {
    ws.op(v, av);
    const double alpha = ws.inner(v, av);
    axpy(av, -alpha, v);
    if (k > 0) axpy(av, -beta, v_old);
    const double beta_new = std::sqrt(std::max(0.0, ws.inner(av, av)));

    // Givens rotation applied to the new tridiagonal column
    const double delta = c * alpha - c_old * s * beta;
    const double rho1 = std::hypot(delta, beta_new);
    const double rho2 = s * alpha + c_old * c * beta;
    const double rho3 = s_old * beta;
    if (rho1 == 0.0) break;  // breakdown: stagnant Krylov space
    const double c_new = delta / rho1;
    const double s_new = beta_new / rho1;

    for (std::size_t i = 0; i < w_new.nodes(); ++i)
      w_new[i] = (v[i] - rho3 * w_old[i] - rho2 * w_cur[i]) / rho1;
    axpy(x, c_new * eta, w_new);
    eta = -s_new * eta;

    ++stats.iterations;
    stats.relative_residual = std::abs(eta) / norm_b;
    if (stats.relative_residual <= rel_tol) return true;
    if (beta_new == 0.0) break;

    std::swap(v_old, v);
    v = av;
    scale_in_place(v, 1.0 / beta_new);
    beta = beta_new;
    c_old = c; c = c_new;
    s_old = s; s = s_new;
    std::swap(w_old, w_cur);
    std::swap(w_cur, w_new);
  }
  return stats.relative_residual <= rel_tol;
}

}  // namespace

ScalarField krylov_solve(const ScalarOp& apply, const ScalarField& b,
                         const MetricField& g, const SolveOptions& opt,
                         SolveStats* stats_out) {
  require_same_chart(b.grid(), g.grid(), "krylov_solve");
  const std::vector<double> w = quad_weights(g);
  double total_weight = 0.0;
  for (double v : w) total_weight += v;
  Workspace ws{apply, w, total_weight, opt.project_mean_zero};

  ScalarField rhs = b;
  if (opt.project_mean_zero) remove_mean(w, total_weight, rhs);

  const std::size_t max_iter =
      opt.max_iterations != 0
          ? opt.max_iterations
          : static_cast<std::size_t>(10.0 * std::sqrt(static_cast<double>(b.nodes()))) + 10;

  SolveStats stats;
  ScalarField x(b.chart());
  const double norm_b = std::sqrt(ws.inner(rhs, rhs));
  if (norm_b == 0.0) {
    if (stats_out) *stats_out = stats;
    return x;
  }

  // Conjugate gradients (optionally preconditioned), watching for
  // indefiniteness. Convergence is always judged on the true residual.
  ScalarField r = rhs;
  ScalarField z(b.chart());
  auto precondition = [&](const ScalarField& in, ScalarField& out) {
    if (opt.precond) {
      opt.precond(in, out);
      if (opt.project_mean_zero) remove_mean(w, total_weight, out);
    } else {
      out = in;
    }
  };
  precondition(r, z);
  ScalarField p = z;
  ScalarField ap(b.chart());
  double rho = ws.inner(r, z);
  while (stats.iterations < max_iter && rho > 0.0) {
    ws.op(p, ap);
    const double p_ap = ws.inner(p, ap);
    if (!(p_ap > 1e-14 * ws.inner(p, p))) break;  // (near-)indefinite direction
    const double alpha = rho / p_ap;
    axpy(x, alpha, p);
    axpy(r, -alpha, ap);
    ++stats.iterations;
    stats.relative_residual = std::sqrt(ws.inner(r, r)) / norm_b;
    if (stats.relative_residual <= opt.rel_tol) {
      if (stats_out) *stats_out = stats;
      return x;
    }
    precondition(r, z);
    const double rho_new = ws.inner(r, z);
    if (!(rho_new > 0.0)) break;  // preconditioner lost positivity
    const double beta = rho_new / rho;
    rho = rho_new;
    for (std::size_t i = 0; i < p.nodes(); ++i) p[i] = z[i] + beta * p[i];
  }

  // CG broke down or exhausted its budget: restart with MINRES (warm start
  // from the CG iterate), which also handles indefinite operators.
  stats.used_minres = true;
  if (minres(ws, rhs, x, opt.rel_tol, max_iter, stats)) {
    if (stats_out) *stats_out = stats;
    return x;
  }
  if (stats_out) *stats_out = stats;
  throw solver_failure("krylov_solve: no convergence in " + std::to_string(stats.iterations) +
                       " iterations (relative residual " +
                       std::to_string(stats.relative_residual) + ")");
}

}  // namespace curvfunc
