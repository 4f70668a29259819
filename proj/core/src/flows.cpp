#include "curvfunc/flows.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <sstream>
#include <vector>

#include "curvfunc/errors.hpp"
#include "curvfunc/solver.hpp"

namespace curvfunc {

namespace {

std::string describe_grid(const GridChart& chart) {
  std::ostringstream os;
  os << chart.dim << "d:";
  for (int a = 0; a < chart.dim; ++a) {
    if (a) os << "x";
    os << chart.res[a];
  }
  os << ":order" << chart.fd_order;
  return os.str();
}

FlowRow make_row(long step, double t, double dt, const MetricField& g, double lambda_flow,
                 double v_norm) {
  FunctionalReport rep = functional_report(g);
  FlowRow row;
  row.step = step;
  row.t = t;
  row.S = rep.S;
  row.H = rep.H;
  row.Vol = rep.volume;
  row.min_s = rep.min_s;
  row.max_s = rep.max_s;
  row.Lambda = lambda_flow;
  row.v_norm = v_norm;
  row.critical_residual = rep.critical_residual;
  row.trace_residual = rep.trace_residual;
  row.dt = dt;
  return row;
}

/// k = w * g, the conformal velocity tensor.
SymTensorField conformal_tensor(const ScalarField& w, const MetricField& g) {
  SymTensorField out(g.chart());
  for (int c = 0; c < out.comps(); ++c) {
    double* oc = out.comp(c);
    const double* gc = g.tensor().comp(c);
    for (std::size_t i = 0; i < out.nodes(); ++i) oc[i] = w[i] * gc[i];
  }
  return out;
}

/// Sharp Fourier low-pass along every periodic axis, keeping |k| <= res/3
/// (the classical 2/3 dealiasing rule). Implemented as a circulant
/// convolution with the Dirichlet kernel, so it is exact projection onto
/// the retained modes and the identity on them. Non-periodic axes are left
/// untouched.
///
/// Rationale: the composed central-difference Laplacian has zero symbol at
/// the grid (Nyquist) frequency, so the trace operator a_n Lap + b_n (s -
/// mean s) has no coercivity on those modes; they carry no resolvable
/// information but, once excited, make the elliptic solve for v arbitrarily
/// ill-conditioned and feed an unphysical instability back into the flow.
/// Restricting the v-solve to the retained band removes exactly those
/// redundant degrees of freedom and vanishes under grid refinement.
ScalarField band_limit(const ScalarField& f) {
  const GridChart& chart = f.grid();
  ScalarField out = f;
  ScalarField tmp(f.chart());
  std::array<int, kMaxDim> ix{};
  for (int a = 0; a < chart.dim; ++a) {
    if (!chart.periodic[a]) continue;
    const int res = chart.res[a];
    const int kc = res / 3;
    if (2 * kc + 1 >= res) continue;  // filter would be the identity
    std::vector<double> kernel(static_cast<std::size_t>(res));
    const double pi = 3.14159265358979323846;
    kernel[0] = (2.0 * kc + 1.0) / res;
    for (int m = 1; m < res; ++m) {
      const double x = pi * m / res;
      kernel[static_cast<std::size_t>(m)] =
          std::sin((2.0 * kc + 1.0) * x) / (res * std::sin(x));
    }
    ix.fill(0);
    for (std::size_t i = 0; i < out.nodes(); ++i) {
      const std::size_t base = i - static_cast<std::size_t>(ix[a]) * chart.stride[a];
      double acc = 0.0;
      for (int m = 0; m < res; ++m) {
        const int j = ix[a] - m >= 0 ? ix[a] - m : ix[a] - m + res;
        acc += kernel[static_cast<std::size_t>(m)] *
               out[base + static_cast<std::size_t>(j) * chart.stride[a]];
      }
      tmp[i] = acc;
      for (int b = 0; b < chart.dim; ++b) {
        if (++ix[b] < chart.res[b]) break;
        ix[b] = 0;
      }
    }
    std::swap(out, tmp);
  }
  return out;
}

/// Frozen-coefficient spectral preconditioner for the banded v-solve on a
/// fully periodic, unmasked chart. M is the dominant (2n-2) Lap part of the
/// trace operator with its coefficients replaced by their dmu-means, so
/// M^{-1} is exact in Fourier space (plain per-axis DFTs; the grids are far
/// too small for an FFT to matter). The input is multiplied by the
/// quadrature weights first, which makes r -> M^{-1}(w r) self-adjoint and
/// positive in the L2(dmu) inner product as preconditioned CG requires.
/// Modes outside the dealiased band (and the zero mode, which the solver's
/// mean projection owns) are annihilated, matching band_limit.
class SpectralPrecond {
 public:
  static bool eligible(const MetricField& g) {
    const GridChart& c = g.grid();
    if (!c.mask.empty()) return false;
    for (int a = 0; a < c.dim; ++a)
      if (!c.periodic[a]) return false;
    return true;
  }

  explicit SpectralPrecond(const MetricField& g) : chart_(g.grid()) {
    const GridChart& c = chart_;
    const std::size_t n = g.nodes();
    const ScalarField& rho = g.volume_density();
    double rho_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) rho_sum += rho[i];
    const double rho_mean = rho_sum / static_cast<double>(n);

    // weights normalized by the mean density: P is then scale-equivalent
    // to the inverse of the frozen operator itself
    weight_.resize(n);
    for (std::size_t i = 0; i < n; ++i) weight_[i] = rho[i] / rho_mean;

    // frozen coefficients: dmu-mean of the inverse-metric diagonal
    std::array<double, kMaxDim> coef{};
    for (int a = 0; a < c.dim; ++a) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += rho[i] * g.inverse().at(a, a, i);
      coef[static_cast<std::size_t>(a)] = acc / rho_sum;
    }

    const double pi = 3.14159265358979323846;
    twiddle_.resize(static_cast<std::size_t>(c.dim));
    band_.resize(static_cast<std::size_t>(c.dim));
    for (int a = 0; a < c.dim; ++a) {
      const int res = c.res[a];
      auto& tw = twiddle_[static_cast<std::size_t>(a)];
      tw.resize(static_cast<std::size_t>(res));
      for (int j = 0; j < res; ++j)
        tw[static_cast<std::size_t>(j)] =
            std::polar(1.0, -2.0 * pi * static_cast<double>(j) / res);
      const int kc = res / 3;
      for (int k = 0; k < res; ++k) {
        const int m = k <= res / 2 ? k : k - res;
        if (2 * kc + 1 >= res || std::abs(m) <= kc)
          band_[static_cast<std::size_t>(a)].push_back(k);
      }
    }

    // inverse symbol of (2n-2) * sum_a coef_a * D_a^2 with the composed
    // central-difference first-derivative symbol, masked to the band
    inv_symbol_.assign(n, 0.0);
    const double a_n = 2.0 * c.dim - 2.0;
    std::array<int, kMaxDim> ix{};
    for (std::size_t i = 0; i < n; ++i) {
      bool keep = true;
      double sig = 0.0;
      for (int a = 0; a < c.dim; ++a) {
        const int res = c.res[a];
        const int kc = res / 3;
        const int m = ix[a] <= res / 2 ? ix[a] : ix[a] - res;
        if (2 * kc + 1 < res && std::abs(m) > kc) keep = false;
        const double th = 2.0 * pi * static_cast<double>(m) / res;
        const double sym =
            (8.0 * std::sin(th) - std::sin(2.0 * th)) / (6.0 * c.spacing[a]);
        sig += coef[static_cast<std::size_t>(a)] * sym * sym;
      }
      if (keep && sig > 0.0) inv_symbol_[i] = 1.0 / (a_n * sig);
      for (int b = 0; b < c.dim; ++b) {
        if (++ix[b] < c.res[b]) break;
        ix[b] = 0;
      }
    }
  }

  ScalarField operator()(const ScalarField& f) {
    const std::size_t n = f.nodes();
    buf_.resize(n);
    for (std::size_t i = 0; i < n; ++i) buf_[i] = weight_[i] * f[i];
    for (int a = 0; a < chart_.dim; ++a) dft_axis(a, false);
    for (std::size_t i = 0; i < n; ++i) buf_[i] *= inv_symbol_[i];
    for (int a = 0; a < chart_.dim; ++a) dft_axis(a, true);
    ScalarField out(f.chart());
    for (std::size_t i = 0; i < n; ++i) out[i] = buf_[i].real();
    return out;
  }

 private:
  /// Forward: physical -> frequency, computing only the in-band modes (the
  /// rest are annihilated by the symbol anyway). Inverse: frequency ->
  /// physical, summing only over the in-band modes, which are the only
  /// nonzero entries after the symbol multiply.
  void dft_axis(int a, bool inverse) {
    const int res = chart_.res[a];
    const std::size_t st = chart_.stride[a];
    const auto& tw = twiddle_[static_cast<std::size_t>(a)];
    const auto& band = band_[static_cast<std::size_t>(a)];
    line_.resize(static_cast<std::size_t>(res));
    for (std::size_t i = 0; i < buf_.size(); ++i) {
      if ((i / st) % static_cast<std::size_t>(res) != 0) continue;
      for (int m = 0; m < res; ++m)
        line_[static_cast<std::size_t>(m)] = buf_[i + static_cast<std::size_t>(m) * st];
      if (inverse) {
        for (int k = 0; k < res; ++k) {
          std::complex<double> acc = 0.0;
          for (const int m : band)
            acc += line_[static_cast<std::size_t>(m)] *
                   std::conj(tw[static_cast<std::size_t>(k * m % res)]);
          buf_[i + static_cast<std::size_t>(k) * st] = acc / static_cast<double>(res);
        }
      } else {
        for (int k = 0; k < res; ++k)
          buf_[i + static_cast<std::size_t>(k) * st] = 0.0;
        for (const int k : band) {
          std::complex<double> acc = 0.0;
          for (int m = 0; m < res; ++m)
            acc += line_[static_cast<std::size_t>(m)] * tw[static_cast<std::size_t>(k * m % res)];
          buf_[i + static_cast<std::size_t>(k) * st] = acc;
        }
      }
    }
  }

  const GridChart& chart_;
  std::vector<double> weight_;
  std::vector<double> inv_symbol_;
  std::vector<std::vector<std::complex<double>>> twiddle_;
  std::vector<std::vector<int>> band_;
  std::vector<std::complex<double>> buf_;
  std::vector<std::complex<double>> line_;
};

/// The linearized trace operator A f = (2n-2) Lap f + (n-4)/2 (s - mean s) f.
struct TraceOperator {
  const MetricField& g;
  ScalarField s;
  double pi_s;
  double a_n;
  double b_n;

  explicit TraceOperator(const MetricField& metric)
      : g(metric), s(scalar_curvature(metric)),
        pi_s(project_constants(s, metric)),
        a_n(2.0 * metric.dim() - 2.0),
        b_n((metric.dim() - 4.0) / 2.0) {}

  ScalarField apply(const ScalarField& f) const {
    ScalarField out = laplacian(f, g);
    for (std::size_t i = 0; i < out.nodes(); ++i)
      out[i] = a_n * out[i] + b_n * (s[i] - pi_s) * f[i];
    return out;
  }

  ScalarField u() const {  // mean(s) - s
    ScalarField out(s.chart());
    for (std::size_t i = 0; i < out.nodes(); ++i) out[i] = pi_s - s[i];
    return out;
  }

  ScalarField s_plus_mean() const {
    ScalarField out(s.chart());
    for (std::size_t i = 0; i < out.nodes(); ++i) out[i] = s[i] + pi_s;
    return out;
  }

  bool s_constant() const {
    double mn, mx;
    min_max(s, mn, mx);
    return mx - mn <= 1e-12 * std::max({1.0, std::abs(mn), std::abs(mx)});
  }
};

double lambda_from_operator(const TraceOperator& op) {
  if (op.s_constant()) return 0.0;
  ScalarField sp = op.s_plus_mean();
  const double den = l2_inner(sp, sp, op.g);
  if (den <= 1e-28)
    throw numerical_error("compute_Lambda: ||s + mean(s)|| below floor with nonconstant s");
  return l2_inner(sp, op.apply(op.u()), op.g) / den;
}

/// v with mean zero, scaled so that <s + mean(s), A(u - v)> = 0 exactly.
ScalarField v_from_operator(const TraceOperator& op, double rel_tol) {
  if (op.g.dim() == 4)
    throw config_error(
        "solve_perturbation_v: n = 4 is rejected; the construction needs "
        "b_n = (n-4)/2 != 0");
  if (op.s_constant()) return ScalarField(op.g.chart());
  ScalarField sp = op.s_plus_mean();
  (void)lambda_from_operator(op);  // validates the denominator floor

  SolveOptions sopt;
  sopt.rel_tol = rel_tol;
  sopt.project_mean_zero = true;
  if (SpectralPrecond::eligible(op.g)) {
    auto pc = std::make_shared<SpectralPrecond>(op.g);
    sopt.precond = [pc](const ScalarField& in, ScalarField& out) { out = (*pc)(in); };
  }
  // The Krylov iteration runs inside the dealiased band (see band_limit):
  // rhs and every operator output are projected, so all iterates stay in
  // the subspace where the operator is uniformly coercive.
  ScalarOp apply = [&op](const ScalarField& in, ScalarField& out) {
    out = band_limit(op.apply(in));
  };
  ScalarField rhs = band_limit(sp);
  ScalarField v1 = krylov_solve(apply, rhs, op.g, sopt);

  // Scale with the unfiltered operator so that <s + mean(s), A(u - v)> = 0
  // holds exactly for the operator as defined, not just within the band.
  ScalarField u = op.u();
  const double num = l2_inner(sp, op.apply(u), op.g);
  const double den = l2_inner(sp, op.apply(v1), op.g);
  if (std::abs(den) <= 1e-28)
    throw solver_failure("solve_perturbation_v: degenerate projection denominator");
  const double c1 = num / den;
  return scale(v1, c1);
}

/// Largest RK4-stable substep for the conformal flows. The stiffest part of
/// the linearized velocity is (n-1) * Lap, so the spectral bound uses the
/// maximal symbol of the composed first-derivative stencils, max_theta
/// (8 sin t - sin 2t)/6 = 1.3722 per axis, weighted by the inverse metric
/// diagonal; the admitted step keeps |z| <= 1.4, well inside the RK4
/// stability interval (2.79) on the negative real axis.
double conformal_stable_dt(const MetricField& g) {
  const GridChart& chart = g.grid();
  const int n = chart.dim;
  double lap_max = 0.0;
  for (int a = 0; a < n; ++a) {
    const double sym = 1.3722 / chart.spacing[a];
    double gaa_max = 0.0;
    const double* inv = g.inverse().comp(sym_index(n, a, a));
    for (std::size_t i = 0; i < g.nodes(); ++i)
      if (chart.included(i)) gaa_max = std::max(gaa_max, inv[i]);
    lap_max += gaa_max * sym * sym;
  }
  const double operator_norm = (n - 1) * lap_max;
  return operator_norm > 0.0 ? 1.4 / operator_norm : 1.0;
}

/// One RK4 step of dg/dt = velocity(g) * g. velocity may throw; the caller
/// handles halting.
template <class Velocity>
MetricField rk4_conformal_step(const MetricField& g, double dt, Velocity&& velocity) {
  ScalarField w1 = velocity(g);
  SymTensorField k1 = conformal_tensor(w1, g);
  MetricField g2(add(g.tensor(), k1, 0.5 * dt), g.spd_floor());
  SymTensorField k2 = conformal_tensor(velocity(g2), g2);
  MetricField g3(add(g.tensor(), k2, 0.5 * dt), g.spd_floor());
  SymTensorField k3 = conformal_tensor(velocity(g3), g3);
  MetricField g4(add(g.tensor(), k3, dt), g.spd_floor());
  SymTensorField k4 = conformal_tensor(velocity(g4), g4);

  SymTensorField sum = add(k1, k4);
  sum = add(sum, k2, 2.0);
  sum = add(sum, k3, 2.0);
  return MetricField(add(g.tensor(), sum, dt / 6.0), g.spd_floor());
}

}  // namespace

double compute_Lambda(const MetricField& g) {
  return lambda_from_operator(TraceOperator(g));
}

ScalarField solve_perturbation_v(const MetricField& g, double solver_rel_tol) {
  return v_from_operator(TraceOperator(g), solver_rel_tol);
}

double perturbation_orthogonality_defect(const MetricField& g, const ScalarField& v) {
  TraceOperator op(g);
  ScalarField h = add(op.u(), v, -1.0);
  return l2_inner(op.s_plus_mean(), op.apply(h), g);
}

FlowTrace gradient_flow_run(const MetricField& g0, int steps, const FlowOptions& opt) {
  if (steps < 0) throw config_error("gradient_flow_run: steps must be nonnegative");
  FlowTrace trace;
  trace.kind = "gradient";
  trace.grid_descriptor = describe_grid(g0.grid());

  MetricField g = normalize_volume(g0);
  const int n = g.dim();
  double dt_inner = opt.dt;
  double t = 0.0;
  trace.rows.push_back(make_row(0, t, opt.dt, g, 0.0, 0.0));
  double s_old = trace.rows.back().S;

  // Each recorded step advances (up to) opt.dt of flow time by sub-cycling
  // explicit Euler substeps; the substep size adapts to the stability limit
  // of the stiff fourth-order velocity by halving whenever S would increase.
  for (long step = 1; step <= steps; ++step) {
    double advanced = 0.0;
    int substeps = 0;
    int rejections = 0;
    bool collapsed = false;
    while (advanced < opt.dt && substeps < opt.max_substeps) {
      SymTensorField grad = grad_S(g);
      const double mu = integrate(metric_trace(grad, g), g) / (n * g.volume());
      SymTensorField velocity = add(grad, g.tensor(), -mu);  // descend along -velocity
      const double dt_try = std::min(dt_inner, opt.dt - advanced);

      bool spd_ok = true;
      MetricField g_next;
      double s_new = 0.0;
      try {
        g_next = MetricField(add(g.tensor(), velocity, -dt_try), g.spd_floor());
      } catch (const spd_violation&) {
        spd_ok = false;
      }
      if (spd_ok) {
        g_next = normalize_volume(g_next);
        s_new = energy_S(g_next);
      }
      // relative slack for roundoff plus an absolute floor so that a flow
      // already sitting at the discretization noise level keeps running
      if (!spd_ok || s_new > s_old * (1.0 + 1e-12) + 1e-24) {
        dt_inner *= 0.5;
        if (++rejections > opt.max_rejections) {
          collapsed = true;
          break;
        }
        continue;
      }
      g = std::move(g_next);
      s_old = s_new;
      advanced += dt_try;
      ++substeps;
      dt_inner = std::min(dt_inner * 1.5, opt.dt);
    }
    if (collapsed) {
      trace.halted_early = true;
      trace.halt_reason = "step size collapsed without an energy decrease";
      break;
    }
    t += advanced;
    trace.rows.push_back(make_row(step, t, advanced, g, 0.0, 0.0));
  }
  trace.final_metric = g;
  return trace;
}

FlowTrace yamabe_flow_run(const MetricField& g0, int steps, const FlowOptions& opt) {
  if (steps < 0) throw config_error("yamabe_flow_run: steps must be nonnegative");
  FlowTrace trace;
  trace.kind = "yamabe";
  trace.grid_descriptor = describe_grid(g0.grid());

  MetricField g = normalize_volume(g0);
  double t = 0.0;
  trace.rows.push_back(make_row(0, t, opt.dt, g, 0.0, 0.0));

  auto velocity = [](const MetricField& gs) {
    ScalarField s = scalar_curvature(gs);
    const double mean = project_constants(s, gs);
    ScalarField w(s.chart());
    for (std::size_t i = 0; i < w.nodes(); ++i) w[i] = mean - s[i];
    return w;
  };

  for (long step = 1; step <= steps; ++step) {
    try {
      const int nsub = std::max(1, static_cast<int>(std::ceil(opt.dt / conformal_stable_dt(g))));
      for (int sub = 0; sub < nsub; ++sub)
        g = normalize_volume(rk4_conformal_step(g, opt.dt / nsub, velocity));
    } catch (const spd_violation& e) {
      trace.halted_early = true;
      trace.halt_reason = e.what();
      break;
    }
    t += opt.dt;
    trace.rows.push_back(make_row(step, t, opt.dt, g, 0.0, 0.0));
  }
  trace.final_metric = g;
  return trace;
}

FlowTrace perturbed_yamabe_run(const MetricField& g0, int steps, const FlowOptions& opt) {
  if (steps < 0) throw config_error("perturbed_yamabe_run: steps must be nonnegative");
  if (g0.dim() == 4)
    throw config_error(
        "perturbed_yamabe_run: n = 4 is rejected; the construction needs "
        "b_n = (n-4)/2 != 0");
  FlowTrace trace;
  trace.kind = "perturbed-yamabe";
  trace.grid_descriptor = describe_grid(g0.grid());

  MetricField g = normalize_volume(g0);
  double t = 0.0;

  double lambda_first = 0.0, v_norm_first = 0.0;
  bool at_recorded_state = false;
  auto velocity = [&](const MetricField& gs) {
    TraceOperator op(gs);
    const double lam = lambda_from_operator(op);
    ScalarField v = v_from_operator(op, opt.solver_rel_tol);
    lambda_first = lam;
    v_norm_first = l2_norm(v, gs);
    ScalarField w = op.u();
    for (std::size_t i = 0; i < w.nodes(); ++i) w[i] -= v[i];
    if (at_recorded_state) {
      // per-step orthogonality defect of the construction at this state
      trace.worst_ortho_defect = std::max(trace.worst_ortho_defect,
                                          std::abs(l2_inner(op.s_plus_mean(), op.apply(w), gs)));
      at_recorded_state = false;
    }
    return w;
  };

  // diagnostics of the initial state
  {
    TraceOperator op(g);
    const double lam = lambda_from_operator(op);
    ScalarField v = v_from_operator(op, opt.solver_rel_tol);
    ScalarField h = add(op.u(), v, -1.0);
    trace.worst_ortho_defect = std::abs(l2_inner(op.s_plus_mean(), op.apply(h), g));
    trace.rows.push_back(make_row(0, t, opt.dt, g, lam, l2_norm(v, g)));
  }

  for (long step = 1; step <= steps; ++step) {
    try {
      const int nsub = std::max(1, static_cast<int>(std::ceil(opt.dt / conformal_stable_dt(g))));
      at_recorded_state = true;
      for (int sub = 0; sub < nsub; ++sub)
        g = normalize_volume(rk4_conformal_step(g, opt.dt / nsub, velocity));
    } catch (const numerical_error& e) {
      trace.halted_early = true;
      trace.halt_reason = e.what();
      break;
    }
    t += opt.dt;
    trace.rows.push_back(make_row(step, t, opt.dt, g, lambda_first, v_norm_first));
  }
  trace.final_metric = g;
  return trace;
}

double level_set_hessian_check(const MetricField& g0, const FlowTrace& trace) {
  if (trace.kind != "perturbed-yamabe")
    throw config_error("level_set_hessian_check: trace must come from the perturbed flow");
  MetricField g = normalize_volume(g0);
  TraceOperator op(g);
  ScalarField v = op.s_constant() ? ScalarField(g.chart())
                                  : v_from_operator(op, 1e-10);
  ScalarField w = op.u();
  for (std::size_t i = 0; i < w.nodes(); ++i) w[i] -= v[i];
  return second_variation_form(g, conformal_tensor(w, g));
}

}  // namespace curvfunc
