#include "curvfunc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvfunc/fd.hpp"

namespace curvfunc {

ScalarField partial_derivative(const ScalarField& f, int axis) {
  ScalarField out(f.chart());
  derivative_sweep(f.grid(), f.data(), out.data(), axis, 1);
  return out;
}

double integrate(const ScalarField& f, const MetricField& g) {
  require_same_chart(f.grid(), g.grid(), "integrate");
  const GridChart& chart = f.grid();
  const ScalarField& rho = g.volume_density();
  const double w = chart.cell_weight();
  if (chart.mask.empty()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.nodes(); ++i) acc += f[i] * rho[i];
    return acc * w;
  }
  // Masked chart: renormalize the masked quadrature by the full volume.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.nodes(); ++i) {
    if (!chart.mask[i]) continue;
    num += f[i] * rho[i];
    den += rho[i];
  }
  return (num / den) * g.volume();
}

ScalarField pointwise_inner(const SymTensorField& a, const SymTensorField& b,
                            const MetricField& g) {
  require_same_chart(a.grid(), g.grid(), "pointwise_inner");
  require_same_chart(b.grid(), g.grid(), "pointwise_inner");
  const int n = g.dim();
  ScalarField out(a.chart());
  const std::size_t nn = a.nodes();
  const SymTensorField& gi = g.inverse();
  for (std::size_t node = 0; node < nn; ++node) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double aij = a.comp(sym_index(n, i, j))[node];
        if (aij == 0.0) continue;
        for (int p = 0; p < n; ++p) {
          const double gip = gi.comp(sym_index(n, i, p))[node];
          if (gip == 0.0) continue;
          for (int q = 0; q < n; ++q)
            acc += aij * b.comp(sym_index(n, p, q))[node] * gip *
                   gi.comp(sym_index(n, j, q))[node];
        }
      }
    out[node] = acc;
  }
  return out;
}

ScalarField pointwise_inner(const VectorField& a, const VectorField& b,
                            const MetricField& g) {
  require_same_chart(a.grid(), g.grid(), "pointwise_inner");
  const int n = g.dim();
  ScalarField out(a.chart());
  for (std::size_t node = 0; node < a.nodes(); ++node) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        acc += a.comp(i)[node] * b.comp(j)[node] *
               g.tensor().comp(sym_index(n, i, j))[node];
    out[node] = acc;
  }
  return out;
}

ScalarField metric_trace(const SymTensorField& h, const MetricField& g) {
  require_same_chart(h.grid(), g.grid(), "metric_trace");
  const int n = g.dim();
  ScalarField out(h.chart());
  const SymTensorField& gi = g.inverse();
  for (std::size_t node = 0; node < h.nodes(); ++node) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        acc += gi.comp(sym_index(n, i, j))[node] * h.comp(sym_index(n, i, j))[node];
    out[node] = acc;
  }
  return out;
}

SymTensorField trace_free_part(const SymTensorField& h, const MetricField& g) {
  ScalarField tr = metric_trace(h, g);
  const int n = g.dim();
  SymTensorField z = h;
  for (int c = 0; c < z.comps(); ++c) {
    double* zc = z.comp(c);
    const double* gc = g.tensor().comp(c);
    for (std::size_t node = 0; node < z.nodes(); ++node)
      zc[node] -= (tr[node] / n) * gc[node];
  }
  return z;
}

double project_constants(const ScalarField& f, const MetricField& g) {
  return integrate(f, g) / g.volume();
}

MetricField normalize_volume(const MetricField& g) {
  const double vol = g.volume();
  if (!(vol > 0.0)) throw numerical_error("normalize_volume: nonpositive volume");
  const double c = std::pow(vol, -2.0 / g.dim());
  return MetricField(scale(g.tensor(), c), g.spd_floor());
}

namespace {
double masked_l2(const GridChart& chart, const ScalarField& rho, double vol,
                 const std::vector<double>& sq) {
  const double w = chart.cell_weight();
  if (chart.mask.empty()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < sq.size(); ++i) acc += sq[i] * rho[i];
    return std::sqrt(std::max(0.0, acc * w));
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < sq.size(); ++i) {
    if (!chart.mask[i]) continue;
    num += sq[i] * rho[i];
    den += rho[i];
  }
  return std::sqrt(std::max(0.0, (num / den) * vol));
}
}  // namespace

double l2_norm(const ScalarField& f, const MetricField& g) {
  std::vector<double> sq(f.nodes());
  for (std::size_t i = 0; i < f.nodes(); ++i) sq[i] = f[i] * f[i];
  return masked_l2(f.grid(), g.volume_density(), g.volume(), sq);
}

double l2_norm(const SymTensorField& h, const MetricField& g) {
  ScalarField hh = pointwise_inner(h, h, g);
  return masked_l2(h.grid(), g.volume_density(), g.volume(), hh.values());
}

double l2_norm(const VectorField& v, const MetricField& g) {
  ScalarField vv = pointwise_inner(v, v, g);
  return masked_l2(v.grid(), g.volume_density(), g.volume(), vv.values());
}

double l2_inner(const ScalarField& a, const ScalarField& b, const MetricField& g) {
  return integrate(multiply(a, b), g);
}

double max_abs(const ScalarField& f) {
  const GridChart& chart = f.grid();
  double m = 0.0;
  for (std::size_t i = 0; i < f.nodes(); ++i)
    if (chart.included(i)) m = std::max(m, std::abs(f[i]));
  return m;
}

void min_max(const ScalarField& f, double& mn, double& mx) {
  const GridChart& chart = f.grid();
  mn = std::numeric_limits<double>::infinity();
  mx = -mn;
  for (std::size_t i = 0; i < f.nodes(); ++i) {
    if (!chart.included(i)) continue;
    mn = std::min(mn, f[i]);
    mx = std::max(mx, f[i]);
  }
}

ScalarField constant_field(const ChartPtr& chart, double value) {
  ScalarField f(chart);
  std::fill(f.values().begin(), f.values().end(), value);
  return f;
}

ScalarField add(const ScalarField& a, const ScalarField& b, double bscale) {
  ScalarField out = a;
  for (std::size_t i = 0; i < out.nodes(); ++i) out[i] += bscale * b[i];
  return out;
}

SymTensorField add(const SymTensorField& a, const SymTensorField& b, double bscale) {
  SymTensorField out = a;
  for (int c = 0; c < out.comps(); ++c) {
    double* oc = out.comp(c);
    const double* bc = b.comp(c);
    for (std::size_t i = 0; i < out.nodes(); ++i) oc[i] += bscale * bc[i];
  }
  return out;
}

ScalarField scale(const ScalarField& a, double s) {
  ScalarField out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

SymTensorField scale(const SymTensorField& a, double s) {
  SymTensorField out = a;
  for (int c = 0; c < out.comps(); ++c) {
    double* oc = out.comp(c);
    for (std::size_t i = 0; i < out.nodes(); ++i) oc[i] *= s;
  }
  return out;
}

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  for (std::size_t i = 0; i < out.nodes(); ++i) out[i] *= b[i];
  return out;
}

SymTensorField add_scaled_tensor(const SymTensorField& h, const ScalarField& f,
                                 const SymTensorField& k, double s) {
  SymTensorField out = h;
  for (int c = 0; c < out.comps(); ++c) {
    double* oc = out.comp(c);
    const double* kc = k.comp(c);
    for (std::size_t i = 0; i < out.nodes(); ++i) oc[i] += s * f[i] * kc[i];
  }
  return out;
}

SymTensorField conformal_direction(const ScalarField& phi, const MetricField& g) {
  require_same_chart(phi.grid(), g.grid(), "conformal_direction");
  SymTensorField out(g.chart());
  for (int c = 0; c < out.comps(); ++c) {
    double* oc = out.comp(c);
    const double* gc = g.tensor().comp(c);
    for (std::size_t i = 0; i < out.nodes(); ++i) oc[i] = phi[i] * gc[i];
  }
  return out;
}

}  // namespace curvfunc
