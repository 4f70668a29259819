#include "curvfunc/curvature.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <vector>

#include "curvfunc/fd.hpp"
#include "curvfunc/geometry.hpp"

namespace curvfunc {

namespace {

// Wrap index j into [0,res) for periodic axes.
inline int wrap(int j, int res) {
  if (j >= res) return j - res;
  if (j < 0) return j + res;
  return j;
}

// Streaming evaluation of the Ricci tensor / scalar curvature. All
// derivatives of the metric are taken from local stencil windows, so no
// Christoffel field is materialized (the 4d charts would not fit in memory
// otherwise).
struct CurvatureKernel {
  const MetricField& g;
  const GridChart& chart;
  const std::vector<AxisStencils>& st;
  int n, m;
  std::vector<bool> zero;

  explicit CurvatureKernel(const MetricField& metric)
      : g(metric), chart(metric.grid()), st(chart_stencils(chart)),
        n(chart.dim), m(sym_count(chart.dim)), zero(metric.zero_component()) {}

  // dg[a][c], ddg[a][b][c] with a<=b, at one node
  void run(SymTensorField* ricci_out, ScalarField* scalar_out) const {
    const std::size_t nn = chart.node_count;
    std::array<int, kMaxDim> ix{};

    double dg[kMaxDim][kMaxDim * (kMaxDim + 1) / 2];
    double ddg[kMaxDim][kMaxDim][kMaxDim * (kMaxDim + 1) / 2];
    double ginv[kMaxDim * kMaxDim];
    double dginv[kMaxDim][kMaxDim * kMaxDim];
    double gamma[kMaxDim][kMaxDim * (kMaxDim + 1) / 2];
    double dgamma[kMaxDim][kMaxDim][kMaxDim * (kMaxDim + 1) / 2];
    double rloc[kMaxDim * (kMaxDim + 1) / 2];

    for (std::size_t node = 0; node < nn; ++node) {
      // derivative taps per axis at this node
      // (rows depend only on the index along each axis)
      for (int c = 0; c < m; ++c) {
        if (zero[static_cast<std::size_t>(c)]) {
          for (int a = 0; a < n; ++a) {
            dg[a][c] = 0.0;
            for (int b = a; b < n; ++b) ddg[a][b][c] = 0.0;
          }
          continue;
        }
        const double* plane = g.tensor().comp(c);
        for (int a = 0; a < n; ++a) {
          const AxisStencils::Row& ra = st[static_cast<std::size_t>(a)].row(ix[a]);
          const int res_a = chart.res[a];
          const std::size_t str_a = chart.stride[a];
          const double* p = plane + node;
          const auto sstr = static_cast<std::ptrdiff_t>(str_a);
          double d1 = 0.0;
          for (std::size_t q = 0; q < ra.off1.size(); ++q) {
            int j = ix[a] + ra.off1[q];
            if (chart.periodic[a]) j = wrap(j, res_a);
            d1 += ra.w1[q] * p[static_cast<std::ptrdiff_t>(j - ix[a]) * sstr];
          }
          dg[a][c] = d1;
          double d2 = 0.0;
          for (std::size_t q = 0; q < ra.off2.size(); ++q) {
            int j = ix[a] + ra.off2[q];
            if (chart.periodic[a]) j = wrap(j, res_a);
            d2 += ra.w2[q] * p[static_cast<std::ptrdiff_t>(j - ix[a]) * sstr];
          }
          ddg[a][a][c] = d2;
        }
        for (int a = 0; a < n; ++a) {
          const AxisStencils::Row& ra = st[static_cast<std::size_t>(a)].row(ix[a]);
          for (int b = a + 1; b < n; ++b) {
            const AxisStencils::Row& rb = st[static_cast<std::size_t>(b)].row(ix[b]);
            double acc = 0.0;
            for (std::size_t qa = 0; qa < ra.off1.size(); ++qa) {
              int ja = ix[a] + ra.off1[qa];
              if (chart.periodic[a]) ja = wrap(ja, chart.res[a]);
              const double* base = plane + node +
                  static_cast<std::ptrdiff_t>(ja - ix[a]) * static_cast<std::ptrdiff_t>(chart.stride[a]);
              double inner = 0.0;
              for (std::size_t qb = 0; qb < rb.off1.size(); ++qb) {
                int jb = ix[b] + rb.off1[qb];
                if (chart.periodic[b]) jb = wrap(jb, chart.res[b]);
                inner += rb.w1[qb] * base[static_cast<std::ptrdiff_t>(jb - ix[b]) * static_cast<std::ptrdiff_t>(chart.stride[b])];
              }
              acc += ra.w1[qa] * inner;
            }
            ddg[a][b][c] = acc;
          }
        }
      }

      g.dense_inverse_at(node, ginv);
      // d(g^-1) = -g^-1 dg g^-1
      for (int a = 0; a < n; ++a) {
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < n; ++p) {
              const double gip = ginv[i * n + p];
              if (gip == 0.0) continue;
              for (int q = 0; q < n; ++q)
                acc += gip * dg[a][sym_index(n, p, q)] * ginv[q * n + j];
            }
            dginv[a][i * n + j] = -acc;
            dginv[a][j * n + i] = -acc;
          }
      }

      // Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int l = 0; l < n; ++l) {
              const double gkl = ginv[k * n + l];
              if (gkl == 0.0) continue;
              acc += gkl * (dg[i][sym_index(n, j, l)] + dg[j][sym_index(n, i, l)] -
                            dg[l][sym_index(n, i, j)]);
            }
            gamma[k][sym_index(n, i, j)] = 0.5 * acc;
          }

      // d_a Gamma^k_ij
      for (int a = 0; a < n; ++a)
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
              double acc = 0.0;
              for (int l = 0; l < n; ++l) {
                const double gkl = ginv[k * n + l];
                const double dgkl = dginv[a][k * n + l];
                if (dgkl != 0.0)
                  acc += dgkl * (dg[i][sym_index(n, j, l)] + dg[j][sym_index(n, i, l)] -
                                 dg[l][sym_index(n, i, j)]);
                if (gkl != 0.0) {
                  const int ai = a <= i ? a : i, ia = a <= i ? i : a;
                  const int aj = a <= j ? a : j, ja = a <= j ? j : a;
                  const int al = a <= l ? a : l, la = a <= l ? l : a;
                  acc += gkl * (ddg[ai][ia][sym_index(n, j, l)] + ddg[aj][ja][sym_index(n, i, l)] -
                                ddg[al][la][sym_index(n, i, j)]);
                }
              }
              dgamma[a][k][sym_index(n, i, j)] = 0.5 * acc;
            }

      // R_ij = d_k Gamma^k_ij - d_i Gamma^k_kj + Gamma^k_kl Gamma^l_ij
      //        - Gamma^k_il Gamma^l_kj
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double acc = 0.0;
          for (int k = 0; k < n; ++k) {
            acc += dgamma[k][k][sym_index(n, i, j)];
            acc -= dgamma[i][k][sym_index(n, k, j)];
          }
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
              acc += gamma[k][sym_index(n, k, l)] * gamma[l][sym_index(n, i, j)];
              acc -= gamma[k][sym_index(n, i, l)] * gamma[l][sym_index(n, k, j)];
            }
          rloc[sym_index(n, i, j)] = acc;
        }

      if (ricci_out)
        for (int c = 0; c < m; ++c) ricci_out->comp(c)[node] = rloc[c];
      if (scalar_out) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            s += ginv[i * n + j] * rloc[sym_index(n, i, j)];
        (*scalar_out)[node] = s;
      }

      // advance multi-index
      for (int a = 0; a < n; ++a) {
        if (++ix[a] < chart.res[a]) break;
        ix[a] = 0;
      }
    }
  }
};

}  // namespace

ChristoffelField christoffel(const MetricField& g) {
  const GridChart& chart = g.grid();
  const int n = chart.dim;
  const int m = sym_count(n);
  ChristoffelField out(g.chart());

  // first derivatives of each metric component by sweeps
  std::vector<ScalarField> dg(static_cast<std::size_t>(n) * m);
  for (int c = 0; c < m; ++c)
    for (int a = 0; a < n; ++a) {
      ScalarField d(g.chart());
      if (!g.zero_component()[static_cast<std::size_t>(c)])
        derivative_sweep(chart, g.tensor().comp(c), d.data(), a, 1);
      dg[static_cast<std::size_t>(a) * m + c] = std::move(d);
    }

  const SymTensorField& gi = g.inverse();
  const std::size_t nn = chart.node_count;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double* gk = out.comp(k, sym_index(n, i, j));
        for (int l = 0; l < n; ++l) {
          const double* gkl = gi.comp(sym_index(n, k, l));
          const double* dij = dg[static_cast<std::size_t>(i) * m + sym_index(n, j, l)].data();
          const double* dji = dg[static_cast<std::size_t>(j) * m + sym_index(n, i, l)].data();
          const double* dl = dg[static_cast<std::size_t>(l) * m + sym_index(n, i, j)].data();
          for (std::size_t node = 0; node < nn; ++node)
            gk[node] += 0.5 * gkl[node] * (dij[node] + dji[node] - dl[node]);
        }
      }
  return out;
}

SymTensorField ricci(const MetricField& g) {
  SymTensorField out(g.chart());
  CurvatureKernel(g).run(&out, nullptr);
  return out;
}

ScalarField scalar_curvature(const MetricField& g) {
  ScalarField out(g.chart());
  CurvatureKernel(g).run(nullptr, &out);
  return out;
}

void ricci_and_scalar(const MetricField& g, SymTensorField& ricci_out,
                      ScalarField& scalar_out) {
  ricci_out = SymTensorField(g.chart());
  scalar_out = ScalarField(g.chart());
  CurvatureKernel(g).run(&ricci_out, &scalar_out);
}

namespace {
bool g_sign_canary = false;
}

void set_sign_canary(bool enabled) { g_sign_canary = enabled; }
bool sign_canary() { return g_sign_canary; }

ScalarField laplacian(const ScalarField& f, const MetricField& g) {
  require_same_chart(f.grid(), g.grid(), "laplacian");
  const GridChart& chart = f.grid();
  const int n = chart.dim;
  const std::size_t nn = chart.node_count;
  const ScalarField& rho = g.volume_density();
  const SymTensorField& gi = g.inverse();

  std::vector<ScalarField> df(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    df[static_cast<std::size_t>(a)] = ScalarField(f.chart());
    derivative_sweep(chart, f.data(), df[static_cast<std::size_t>(a)].data(), a, 1);
  }

  ScalarField out(f.chart());
  ScalarField flux(f.chart());
  ScalarField dflux(f.chart());
  for (int i = 0; i < n; ++i) {
    for (std::size_t node = 0; node < nn; ++node) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += gi.comp(sym_index(n, i, j))[node] * df[static_cast<std::size_t>(j)][node];
      flux[node] = rho[node] * acc;
    }
    derivative_sweep(chart, flux.data(), dflux.data(), i, 1);
    for (std::size_t node = 0; node < nn; ++node) out[node] -= dflux[node] / rho[node];
  }
  if (g_sign_canary) return scale(out, -1.0);
  return out;
}

SymTensorField hessian(const ScalarField& f, const MetricField& g,
                       const ChristoffelField& gamma) {
  require_same_chart(f.grid(), g.grid(), "hessian");
  const GridChart& chart = f.grid();
  const int n = chart.dim;
  const std::size_t nn = chart.node_count;

  std::vector<ScalarField> df(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    df[static_cast<std::size_t>(a)] = ScalarField(f.chart());
    derivative_sweep(chart, f.data(), df[static_cast<std::size_t>(a)].data(), a, 1);
  }

  SymTensorField out(f.chart());
  ScalarField tmp(f.chart());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      derivative_sweep(chart, df[static_cast<std::size_t>(j)].data(), tmp.data(), i, 1);
      double* oc = out.comp(sym_index(n, i, j));
      for (std::size_t node = 0; node < nn; ++node) {
        double acc = tmp[node];
        for (int k = 0; k < n; ++k)
          acc -= gamma.at(k, i, j, node) * df[static_cast<std::size_t>(k)][node];
        oc[node] = acc;
      }
    }
  return out;
}

SymTensorField hessian(const ScalarField& f, const MetricField& g) {
  return hessian(f, g, christoffel(g));
}

VectorField divergence(const SymTensorField& h, const MetricField& g,
                       const ChristoffelField& gamma) {
  require_same_chart(h.grid(), g.grid(), "divergence");
  const GridChart& chart = h.grid();
  const int n = chart.dim;
  const std::size_t nn = chart.node_count;
  const SymTensorField& gi = g.inverse();

  // covariant (delta h)_j = -g^ik nabla_i h_kj
  std::vector<ScalarField> cov(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) cov[static_cast<std::size_t>(j)] = ScalarField(h.chart());

  // partial derivatives of every component along every axis, reused per j
  std::vector<ScalarField> dcomp(static_cast<std::size_t>(n) * sym_count(n));
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < sym_count(n); ++c) {
      ScalarField d(h.chart());
      derivative_sweep(chart, h.comp(c), d.data(), a, 1);
      dcomp[static_cast<std::size_t>(a) * sym_count(n) + c] = std::move(d);
    }

  for (int j = 0; j < n; ++j) {
    double* out = cov[static_cast<std::size_t>(j)].data();
    for (std::size_t node = 0; node < nn; ++node) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          const double gik = gi.comp(sym_index(n, i, k))[node];
          if (gik == 0.0) continue;
          double nab = dcomp[static_cast<std::size_t>(i) * sym_count(n) + sym_index(n, k, j)][node];
          for (int l = 0; l < n; ++l)
            nab -= gamma.at(l, i, k, node) * h.comp(sym_index(n, l, j))[node] +
                   gamma.at(l, i, j, node) * h.comp(sym_index(n, k, l))[node];
          acc += gik * nab;
        }
      out[node] = -acc;
    }
  }

  // raise the index
  VectorField out(h.chart());
  for (int i = 0; i < n; ++i) {
    double* oc = out.comp(i);
    for (std::size_t node = 0; node < nn; ++node) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += gi.comp(sym_index(n, i, j))[node] * cov[static_cast<std::size_t>(j)][node];
      oc[node] = g_sign_canary ? -acc : acc;
    }
  }
  return out;
}

VectorField divergence(const SymTensorField& h, const MetricField& g) {
  return divergence(h, g, christoffel(g));
}

ScalarField divergence_vector(const VectorField& x, const MetricField& g) {
  require_same_chart(x.grid(), g.grid(), "divergence_vector");
  const GridChart& chart = x.grid();
  const int n = chart.dim;
  const std::size_t nn = chart.node_count;
  const ScalarField& rho = g.volume_density();
  ScalarField out(x.chart());
  ScalarField flux(x.chart());
  ScalarField dflux(x.chart());
  for (int i = 0; i < n; ++i) {
    for (std::size_t node = 0; node < nn; ++node) flux[node] = rho[node] * x.comp(i)[node];
    derivative_sweep(chart, flux.data(), dflux.data(), i, 1);
    for (std::size_t node = 0; node < nn; ++node) out[node] += dflux[node] / rho[node];
  }
  return out;
}

ScalarField double_divergence(const SymTensorField& h, const MetricField& g) {
  VectorField dh = divergence(h, g);
  return scale(divergence_vector(dh, g), -1.0);
}

SymTensorField delta_star(const VectorField& x, const MetricField& g) {
  require_same_chart(x.grid(), g.grid(), "delta_star");
  const GridChart& chart = x.grid();
  const int n = chart.dim;
  const std::size_t nn = chart.node_count;
  ChristoffelField gamma = christoffel(g);

  // lower the index
  std::vector<ScalarField> omega(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    omega[static_cast<std::size_t>(i)] = ScalarField(x.chart());
    double* oc = omega[static_cast<std::size_t>(i)].data();
    for (std::size_t node = 0; node < nn; ++node) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += g.tensor().comp(sym_index(n, i, j))[node] * x.comp(j)[node];
      oc[node] = acc;
    }
  }

  SymTensorField out(x.chart());
  ScalarField di(x.chart()), dj(x.chart());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      derivative_sweep(chart, omega[static_cast<std::size_t>(j)].data(), di.data(), i, 1);
      derivative_sweep(chart, omega[static_cast<std::size_t>(i)].data(), dj.data(), j, 1);
      double* oc = out.comp(sym_index(n, i, j));
      for (std::size_t node = 0; node < nn; ++node) {
        double acc = 0.5 * (di[node] + dj[node]);
        for (int k = 0; k < n; ++k)
          acc -= gamma.at(k, i, j, node) * omega[static_cast<std::size_t>(k)][node];
        oc[node] = acc;
      }
    }
  return out;
}

double conformal_residual(const VectorField& x, const MetricField& g) {
  const int n = g.dim();
  SymTensorField lie = scale(delta_star(x, g), 2.0);
  ScalarField divx = divergence_vector(x, g);
  SymTensorField resid = add_scaled_tensor(lie, divx, g.tensor(), -2.0 / n);
  return l2_norm(resid, g);
}

}  // namespace curvfunc
