#include "curvfunc/functionals.hpp"

#include <cmath>

#include "curvfunc/errors.hpp"

namespace curvfunc {

namespace {

struct CurvatureData {
  ScalarField s;
  SymTensorField ric;
  ScalarField lap_s;
  SymTensorField hess_s;
};

CurvatureData curvature_data(const MetricField& g, bool need_second_order) {
  CurvatureData d;
  ricci_and_scalar(g, d.ric, d.s);
  if (need_second_order) {
    d.lap_s = laplacian(d.s, g);
    d.hess_s = hessian(d.s, g);
  }
  return d;
}

SymTensorField grad_from_data(const MetricField& g, const CurvatureData& d) {
  const std::size_t nn = g.nodes();
  SymTensorField out(g.chart());
  for (int c = 0; c < out.comps(); ++c) {
    double* oc = out.comp(c);
    const double* gc = g.tensor().comp(c);
    const double* hc = d.hess_s.comp(c);
    const double* rc = d.ric.comp(c);
    for (std::size_t i = 0; i < nn; ++i)
      oc[i] = (2.0 * d.lap_s[i] + 0.5 * d.s[i] * d.s[i]) * gc[i] + 2.0 * hc[i] -
              2.0 * d.s[i] * rc[i];
  }
  return out;
}

double mean_s2(const MetricField& g, const ScalarField& s) {
  return integrate(multiply(s, s), g) / g.volume();
}

}  // namespace

double hilbert_H(const MetricField& g) { return integrate(scalar_curvature(g), g); }

double energy_S(const MetricField& g) {
  ScalarField s = scalar_curvature(g);
  return integrate(multiply(s, s), g);
}

SymTensorField grad_S(const MetricField& g) {
  return grad_from_data(g, curvature_data(g, true));
}

SymTensorField grad_S_mapform(const MetricField& g) {
  CurvatureData d = curvature_data(g, true);
  const int n = g.dim();
  const std::size_t nn = g.nodes();
  SymTensorField out(g.chart());
  for (int c = 0; c < out.comps(); ++c) {
    double* oc = out.comp(c);
    const double* gc = g.tensor().comp(c);
    const double* hc = d.hess_s.comp(c);
    const double* rc = d.ric.comp(c);
    for (std::size_t i = 0; i < nn; ++i) {
      const double s = d.s[i];
      const double conf = (2.0 * n - 2.0) / n * d.lap_s[i] + (n - 4.0) / (2.0 * n) * s * s;
      const double tf = hc[i] + d.lap_s[i] / n * gc[i] - s * (rc[i] - s / n * gc[i]);
      oc[i] = conf * gc[i] + 2.0 * tf;
    }
  }
  return out;
}

double lambda_multiplier(const MetricField& g) {
  const int n = g.dim();
  ScalarField s = scalar_curvature(g);
  return (n - 4.0) / (2.0 * n) * mean_s2(g, s);
}

double critical_residual(const MetricField& g) {
  CurvatureData d = curvature_data(g, true);
  SymTensorField grad = grad_from_data(g, d);
  const double lambda = (g.dim() - 4.0) / (2.0 * g.dim()) * mean_s2(g, d.s);
  return l2_norm(add(grad, g.tensor(), -lambda), g);
}

double critical_residual_einstein(const MetricField& g, double s_value,
                                  double* lambda_out) {
  const int n = g.dim();
  CurvatureData d;
  d.s = constant_field(g.chart(), s_value);
  d.ric = scale(g.tensor(), s_value / n);
  d.lap_s = ScalarField(g.chart());
  d.hess_s = SymTensorField(g.chart());
  SymTensorField grad = grad_from_data(g, d);
  const double lambda = (n - 4.0) / (2.0 * n) * s_value * s_value;
  if (lambda_out) *lambda_out = lambda;
  return l2_norm(add(grad, g.tensor(), -lambda), g);
}

ScalarField trace_residual_field(const MetricField& g) {
  const int n = g.dim();
  ScalarField s = scalar_curvature(g);
  ScalarField lap = laplacian(s, g);
  const double pi_s2 = mean_s2(g, s);
  ScalarField out(g.chart());
  for (std::size_t i = 0; i < out.nodes(); ++i)
    out[i] = (2.0 * n - 2.0) * lap[i] + (n - 4.0) / 2.0 * (s[i] * s[i] - pi_s2);
  return out;
}

std::pair<double, double> einstein_te_residuals(const MetricField& g) {
  CurvatureData d = curvature_data(g, false);
  const int n = g.dim();
  const std::size_t nn = g.nodes();
  SymTensorField einstein(g.chart());  // Ric - (s/n) g
  SymTensorField te(g.chart());        // 2 s ((s/n) g - Ric)
  for (int c = 0; c < einstein.comps(); ++c) {
    double* ec = einstein.comp(c);
    double* tc = te.comp(c);
    const double* gc = g.tensor().comp(c);
    const double* rc = d.ric.comp(c);
    for (std::size_t i = 0; i < nn; ++i) {
      ec[i] = rc[i] - d.s[i] / n * gc[i];
      tc[i] = -2.0 * d.s[i] * ec[i];
    }
  }
  return {l2_norm(einstein, g), l2_norm(te, g)};
}

double bianchi_residual(const MetricField& g) {
  CurvatureData d = curvature_data(g, false);
  VectorField delta_r = divergence(d.ric, g);  // contravariant
  const int n = g.dim();
  const std::size_t nn = g.nodes();
  std::vector<ScalarField> ds(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) ds[static_cast<std::size_t>(a)] = partial_derivative(d.s, a);
  const SymTensorField& gi = g.inverse();
  VectorField resid(g.chart());
  for (int i = 0; i < n; ++i) {
    double* rc = resid.comp(i);
    for (std::size_t node = 0; node < nn; ++node) {
      double grad_s = 0.0;
      for (int j = 0; j < n; ++j)
        grad_s += gi.comp(sym_index(n, i, j))[node] * ds[static_cast<std::size_t>(j)][node];
      rc[node] = delta_r.comp(i)[node] + 0.5 * grad_s;
    }
  }
  return l2_norm(resid, g);
}

namespace {

struct VariationDefects {
  double volume = 0.0;
  double scalar = 0.0;
  double energy = 0.0;
};

VariationDefects variation_defects(const MetricField& g, const SymTensorField& h,
                                   double dt) {
  MetricField gp(add(g.tensor(), h, dt), g.spd_floor());
  MetricField gm(add(g.tensor(), h, -dt), g.spd_floor());

  CurvatureData d = curvature_data(g, true);
  const std::size_t nn = g.nodes();
  VariationDefects out;

  // volume form: d(rho)/dt = 1/2 trace_g h * rho
  {
    ScalarField tr = metric_trace(h, g);
    ScalarField defect(g.chart());
    const ScalarField& rp = gp.volume_density();
    const ScalarField& rm = gm.volume_density();
    const ScalarField& r0 = g.volume_density();
    for (std::size_t i = 0; i < nn; ++i)
      defect[i] = (rp[i] - rm[i]) / (2.0 * dt) - 0.5 * tr[i] * r0[i];
    out.volume = l2_norm(defect, g);
  }

  // scalar curvature: ds/dt = Lap(trace h) + delta delta h - (Ric, h)
  {
    ScalarField tr = metric_trace(h, g);
    ScalarField formula = laplacian(tr, g);
    ScalarField ddh = double_divergence(h, g);
    ScalarField rh = pointwise_inner(d.ric, h, g);
    ScalarField sp = scalar_curvature(gp);
    ScalarField sm = scalar_curvature(gm);
    ScalarField defect(g.chart());
    for (std::size_t i = 0; i < nn; ++i)
      defect[i] = (sp[i] - sm[i]) / (2.0 * dt) - (formula[i] + ddh[i] - rh[i]);
    out.scalar = l2_norm(defect, g);
  }

  // energy: dS/dt = <grad S, h>
  {
    SymTensorField grad = grad_from_data(g, d);
    const double pairing = integrate(pointwise_inner(grad, h, g), g);
    const double fd = (energy_S(gp) - energy_S(gm)) / (2.0 * dt);
    out.energy = std::abs(fd - pairing);
  }
  return out;
}

}  // namespace

VariationCheck first_variation_checks(const MetricField& g, const SymTensorField& h,
                                      double dt) {
  if (!(dt >= 1e-6 && dt <= 1e-2))
    throw config_error("first_variation_checks: dt must lie in [1e-6, 1e-2]");
  VariationDefects full = variation_defects(g, h, dt);
  VariationDefects half = variation_defects(g, h, 0.5 * dt);
  VariationCheck out;
  out.volume_defect = full.volume;
  out.scalar_defect = full.scalar;
  out.energy_defect = full.energy;
  out.volume_defect_half = half.volume;
  out.scalar_defect_half = half.scalar;
  out.energy_defect_half = half.energy;
  return out;
}

double second_variation_form(const MetricField& g, const SymTensorField& h) {
  const int n = g.dim();
  ScalarField s = scalar_curvature(g);
  const double pi_s2 = mean_s2(g, s);
  SymTensorField z = trace_free_part(h, g);
  const double zz = integrate(pointwise_inner(z, z, g), g);
  ScalarField tr = metric_trace(h, g);
  const double trtr = integrate(multiply(tr, tr), g);
  return (n - 4.0) / (2.0 * n) * pi_s2 * (-zz + (n - 2.0) / (2.0 * n) * trtr);
}

double pairing_fact(const MetricField& g, const ScalarField& phi, double c) {
  const int n = g.dim();
  ScalarField s = scalar_curvature(g);
  ScalarField lap = laplacian(s, g);
  ScalarField integrand(g.chart());
  for (std::size_t i = 0; i < integrand.nodes(); ++i) {
    const double factor =
        (2.0 * n - 2.0) / n * lap[i] + (n - 4.0) / (2.0 * n) * (s[i] * s[i] - c * c);
    integrand[i] = factor * n * phi[i];  // (g, phi g)_g = n phi
  }
  return integrate(integrand, g);
}

double kazdan_warner_integral(const MetricField& g, const VectorField& x) {
  ScalarField s = scalar_curvature(g);
  const int n = g.dim();
  ScalarField xs(g.chart());
  for (int a = 0; a < n; ++a) {
    ScalarField ds = partial_derivative(s, a);
    const double* xc = x.comp(a);
    for (std::size_t i = 0; i < xs.nodes(); ++i) xs[i] += xc[i] * ds[i];
  }
  return integrate(xs, g);
}

namespace {
std::string classify_extrema(double min_s, double max_s) {
  const double span = max_s - min_s;
  const double scale = std::max({1.0, std::abs(max_s), std::abs(min_s)});
  if (span <= 1e-10 * scale) return "constant";
  if (max_s >= std::abs(min_s)) return "case-1-applicable";
  if (min_s <= -std::abs(max_s)) return "case-2-applicable";
  return "neither";
}
}  // namespace

Lemma3Result lemma3_classify(const MetricField& g) {
  ScalarField s = scalar_curvature(g);
  Lemma3Result out;
  min_max(s, out.min_s, out.max_s);
  out.pi_s2 = mean_s2(g, s);
  out.tag = classify_extrema(out.min_s, out.max_s);
  return out;
}

FunctionalReport functional_report(const MetricField& g) {
  const int n = g.dim();
  CurvatureData d = curvature_data(g, true);
  FunctionalReport rep;
  rep.volume = g.volume();
  rep.H = integrate(d.s, g);
  rep.S = integrate(multiply(d.s, d.s), g);
  rep.pi_s = integrate(d.s, g) / rep.volume;
  rep.pi_s2 = rep.S / rep.volume;
  min_max(d.s, rep.min_s, rep.max_s);
  rep.lambda = (n - 4.0) / (2.0 * n) * rep.pi_s2;

  SymTensorField grad = grad_from_data(g, d);
  rep.critical_residual = l2_norm(add(grad, g.tensor(), -rep.lambda), g);

  ScalarField tr_res(g.chart());
  for (std::size_t i = 0; i < tr_res.nodes(); ++i)
    tr_res[i] = (2.0 * n - 2.0) * d.lap_s[i] +
                (n - 4.0) / 2.0 * (d.s[i] * d.s[i] - rep.pi_s2);
  rep.trace_residual = l2_norm(tr_res, g);

  SymTensorField einstein(g.chart());
  SymTensorField te(g.chart());
  for (int c = 0; c < einstein.comps(); ++c) {
    double* ec = einstein.comp(c);
    double* tc = te.comp(c);
    const double* gc = g.tensor().comp(c);
    const double* rc = d.ric.comp(c);
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      ec[i] = rc[i] - d.s[i] / n * gc[i];
      tc[i] = -2.0 * d.s[i] * ec[i];
    }
  }
  rep.einstein_residual = l2_norm(einstein, g);
  rep.te_residual = l2_norm(te, g);
  rep.lemma3 = classify_extrema(rep.min_s, rep.max_s);
  return rep;
}

}  // namespace curvfunc
