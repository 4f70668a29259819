#include "curvfunc/exact.hpp"

#include <cmath>
#include <cstring>
#include <memory>
#include <random>

#include "curvfunc/curvature.hpp"
#include "curvfunc/errors.hpp"
#include "curvfunc/geometry.hpp"

namespace curvfunc {

namespace {

constexpr double kPi = 3.14159265358979323846;

double uniform01(std::mt19937_64& rng) {
  // same 53-bit mantissa draw as the sampled-field generator
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void require_trig_chart(const TrigSymTensor& t, const GridChart& chart, const char* what) {
  if (t.dim != chart.dim || static_cast<int>(t.comp.size()) != sym_count(chart.dim))
    throw config_error(std::string(what) + ": tensor/chart dimension mismatch");
  for (int a = 0; a < chart.dim; ++a)
    if (!chart.periodic[a]) throw config_error(std::string(what) + ": periodic grid required");
}

// ---------------------------------------------------------------- sampling

/// Value and partial derivatives (to third order, fully symmetrized) of a
/// scalar function at one node.
struct Jet3 {
  double v;
  double d1[kMaxDim];
  double d2[kMaxDim][kMaxDim];
  double d3[kMaxDim][kMaxDim][kMaxDim];
};

void jet_combine(const Jet3& a, const Jet3& b, double t, Jet3& out) {
  const double* pa = &a.v;
  const double* pb = &b.v;
  double* po = &out.v;
  constexpr std::size_t total = sizeof(Jet3) / sizeof(double);
  for (std::size_t i = 0; i < total; ++i) po[i] = pa[i] + t * pb[i];
}

struct Cx {
  double re, im;
};

inline Cx cmul(Cx a, Cx b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

constexpr int kMaxTriples = kMaxDim * (kMaxDim + 1) * (kMaxDim + 2) / 6;

/// Evaluates jets of the components of one TrigSymTensor over a chart. The
/// phase factors exp(i 2 pi k x / L) come from per-axis lookup tables, so
/// no trigonometric call happens inside the node loop.
class TensorSampler {
 public:
  TensorSampler(const TrigSymTensor& t, const GridChart& chart)
      : chart_(chart), n_(chart.dim) {
    int F = 0;
    for (const TrigScalar& c : t.comp)
      for (const TrigMode& m : c.modes)
        for (int a = 0; a < n_; ++a) F = std::max(F, std::abs(m.k[a]));
    const int span = 2 * F + 1;
    for (int a = 0; a < n_; ++a) {
      tab_[a].resize(static_cast<std::size_t>(span) * chart.res[a]);
      for (int kk = -F; kk <= F; ++kk) {
        const double omega = 2.0 * kPi * kk / chart.extent[a];
        for (int i = 0; i < chart.res[a]; ++i) {
          const double arg = omega * chart.coord(a, i);
          tab_[a][static_cast<std::size_t>(kk + F) * chart.res[a] + i] = {std::cos(arg),
                                                                          std::sin(arg)};
        }
      }
    }
    comps_.resize(t.comp.size());
    for (std::size_t c = 0; c < t.comp.size(); ++c) {
      comps_[c].constant = t.comp[c].constant;
      comps_[c].modes.reserve(t.comp[c].modes.size());
      for (const TrigMode& m : t.comp[c].modes) {
        Mode pm;
        pm.base = {m.amplitude * std::cos(m.phase), m.amplitude * std::sin(m.phase)};
        for (int a = 0; a < n_; ++a) {
          pm.idx[a] = m.k[a] + F;
          pm.omega[a] = 2.0 * kPi * m.k[a] / chart.extent[a];
        }
        int q = 0;
        for (int a = 0; a < n_; ++a)
          for (int b = a; b < n_; ++b) pm.c2[q++] = pm.omega[a] * pm.omega[b];
        q = 0;
        for (int a = 0; a < n_; ++a)
          for (int b = a; b < n_; ++b)
            for (int c3 = b; c3 < n_; ++c3)
              pm.c3[q++] = pm.omega[a] * pm.omega[b] * pm.omega[c3];
        comps_[c].modes.push_back(pm);
      }
    }
  }

  int comps() const { return static_cast<int>(comps_.size()); }

  double value(int c, const std::array<int, kMaxDim>& ix) const {
    double acc = comps_[static_cast<std::size_t>(c)].constant;
    for (const Mode& m : comps_[static_cast<std::size_t>(c)].modes)
      acc += phase_factor(m, ix).re;
    return acc;
  }

  /// Derivative values: d/dx_a of amp*cos(arg) multiplies by omega_a and
  /// advances the phase by pi/2, so consecutive orders alternate between
  /// the real and imaginary parts of the tabulated factor.
  void jet(int c, const std::array<int, kMaxDim>& ix, Jet3& out) const {
    const int n = n_;
    std::memset(&out, 0, sizeof(Jet3));
    out.v = comps_[static_cast<std::size_t>(c)].constant;
    for (const Mode& m : comps_[static_cast<std::size_t>(c)].modes) {
      const Cx w = phase_factor(m, ix);
      out.v += w.re;
      for (int a = 0; a < n; ++a) out.d1[a] -= m.omega[a] * w.im;
      int q = 0;
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) out.d2[a][b] -= m.c2[q++] * w.re;
      q = 0;
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b)
          for (int c3 = b; c3 < n; ++c3) out.d3[a][b][c3] += m.c3[q++] * w.im;
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) out.d2[b][a] = out.d2[a][b];
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b)
        for (int c3 = b; c3 < n; ++c3) {
          const double v3 = out.d3[a][b][c3];
          out.d3[a][c3][b] = v3;
          out.d3[b][a][c3] = v3;
          out.d3[b][c3][a] = v3;
          out.d3[c3][a][b] = v3;
          out.d3[c3][b][a] = v3;
        }
  }

 private:
  struct Mode {
    Cx base;
    int idx[kMaxDim];
    double omega[kMaxDim];
    double c2[kMaxDim * (kMaxDim + 1) / 2];
    double c3[kMaxTriples];
  };
  struct Comp {
    double constant = 0.0;
    std::vector<Mode> modes;
  };

  Cx phase_factor(const Mode& m, const std::array<int, kMaxDim>& ix) const {
    Cx w = m.base;
    for (int a = 0; a < n_; ++a)
      w = cmul(w, tab_[a][static_cast<std::size_t>(m.idx[a]) * chart_.res[a] + ix[a]]);
    return w;
  }

  const GridChart& chart_;
  int n_;
  std::array<std::vector<Cx>, kMaxDim> tab_;
  std::vector<Comp> comps_;
};

inline void advance(const GridChart& chart, std::array<int, kMaxDim>& ix) {
  for (int a = 0; a < chart.dim; ++a) {
    if (++ix[a] < chart.res[a]) break;
    ix[a] = 0;
  }
}

// ---------------------------------------------------- pointwise curvature

/// Exact pointwise curvature chain of one metric, mirroring the stencil
/// kernel's conventions: R_ij = d_k Gamma^k_ij - d_i Gamma^k_kj + GG - GG.
struct PointGeom {
  double g[kMaxDim][kMaxDim];
  double dg[kMaxDim][kMaxDim][kMaxDim];            // dg[a][i][j] = d_a g_ij
  double ddg[kMaxDim][kMaxDim][kMaxDim][kMaxDim];  // ddg[a][b][i][j]
  double dddg[kMaxDim][kMaxDim][kMaxDim][kMaxDim][kMaxDim];
  double det;
  double ginv[kMaxDim][kMaxDim];
  double dginv[kMaxDim][kMaxDim][kMaxDim];
  double ddginv[kMaxDim][kMaxDim][kMaxDim][kMaxDim];
  double gamma[kMaxDim][kMaxDim][kMaxDim];  // gamma[k][i][j] = Gamma^k_ij
  double dgamma[kMaxDim][kMaxDim][kMaxDim][kMaxDim];
  double ddgamma[kMaxDim][kMaxDim][kMaxDim][kMaxDim][kMaxDim];
  double R[kMaxDim][kMaxDim];
  double dR[kMaxDim][kMaxDim][kMaxDim];  // dR[a][i][j]
  double s;
  double ds[kMaxDim];
};

/// Dense inverse by Gauss-Jordan with partial pivoting; returns det.
double invert_dense(int n, const double m[kMaxDim][kMaxDim],
                    double out[kMaxDim][kMaxDim]) {
  double a[kMaxDim][2 * kMaxDim];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a[i][j] = m[i][j];
      a[i][n + j] = (i == j) ? 1.0 : 0.0;
    }
  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (piv != col) {
      for (int j = 0; j < 2 * n; ++j) std::swap(a[piv][j], a[col][j]);
      det = -det;
    }
    const double d = a[col][col];
    if (d == 0.0) throw spd_violation("exact evaluation: singular metric value");
    det *= d;
    const double inv = 1.0 / d;
    for (int j = 0; j < 2 * n; ++j) a[col][j] *= inv;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (int j = 0; j < 2 * n; ++j) a[r][j] -= f * a[col][j];
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i][j] = a[i][n + j];
  return det;
}

void build_geom(int n, const Jet3* jets, bool want_third, PointGeom& P) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Jet3& J = jets[sym_index(n, i, j)];
      P.g[i][j] = J.v;
      for (int a = 0; a < n; ++a) {
        P.dg[a][i][j] = J.d1[a];
        for (int b = 0; b < n; ++b) {
          P.ddg[a][b][i][j] = J.d2[a][b];
          if (want_third)
            for (int c = 0; c < n; ++c) P.dddg[a][b][c][i][j] = J.d3[a][b][c];
        }
      }
    }

  P.det = invert_dense(n, P.g, P.ginv);

  // d(g^-1) = -g^-1 (dg) g^-1
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q)
            acc += P.ginv[i][p] * P.dg[a][p][q] * P.ginv[q][j];
        P.dginv[a][i][j] = -acc;
      }

  // d_b of the line above
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double acc = 0.0;
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
              acc += P.dginv[b][i][p] * P.dg[a][p][q] * P.ginv[q][j] +
                     P.ginv[i][p] * P.ddg[a][b][p][q] * P.ginv[q][j] +
                     P.ginv[i][p] * P.dg[a][p][q] * P.dginv[b][q][j];
          P.ddginv[a][b][i][j] = -acc;
        }

  auto T = [&](int i, int j, int l) {
    return P.dg[i][j][l] + P.dg[j][i][l] - P.dg[l][i][j];
  };
  auto dT = [&](int a, int i, int j, int l) {
    return P.ddg[a][i][j][l] + P.ddg[a][j][i][l] - P.ddg[a][l][i][j];
  };
  auto ddT = [&](int a, int b, int i, int j, int l) {
    return P.dddg[a][b][i][j][l] + P.dddg[a][b][j][i][l] - P.dddg[a][b][l][i][j];
  };

  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += P.ginv[k][l] * T(i, j, l);
        P.gamma[k][i][j] = 0.5 * acc;
      }

  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double acc = 0.0;
          for (int l = 0; l < n; ++l)
            acc += P.dginv[a][k][l] * T(i, j, l) + P.ginv[k][l] * dT(a, i, j, l);
          P.dgamma[a][k][i][j] = 0.5 * acc;
        }

  if (want_third)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              double acc = 0.0;
              for (int l = 0; l < n; ++l)
                acc += P.ddginv[a][b][k][l] * T(i, j, l) +
                       P.dginv[a][k][l] * dT(b, i, j, l) +
                       P.dginv[b][k][l] * dT(a, i, j, l) +
                       P.ginv[k][l] * ddT(a, b, i, j, l);
              P.ddgamma[a][b][k][i][j] = 0.5 * acc;
            }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        acc += P.dgamma[k][k][i][j] - P.dgamma[i][k][k][j];
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          acc += P.gamma[k][k][l] * P.gamma[l][i][j] -
                 P.gamma[k][i][l] * P.gamma[l][k][j];
      P.R[i][j] = acc;
    }

  P.s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) P.s += P.ginv[i][j] * P.R[i][j];

  if (want_third) {
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double acc = 0.0;
          for (int k = 0; k < n; ++k)
            acc += P.ddgamma[a][k][k][i][j] - P.ddgamma[a][i][k][k][j];
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
              acc += P.dgamma[a][k][k][l] * P.gamma[l][i][j] +
                     P.gamma[k][k][l] * P.dgamma[a][l][i][j] -
                     P.dgamma[a][k][i][l] * P.gamma[l][k][j] -
                     P.gamma[k][i][l] * P.dgamma[a][l][k][j];
          P.dR[a][i][j] = acc;
        }
    for (int a = 0; a < n; ++a) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          acc += P.dginv[a][i][j] * P.R[i][j] + P.ginv[i][j] * P.dR[a][i][j];
      P.ds[a] = acc;
    }
  }
}

}  // namespace

// --------------------------------------------------------------- builders

TrigSymTensor trig_flat_metric(int n) {
  TrigSymTensor out;
  out.dim = n;
  out.comp.resize(static_cast<std::size_t>(sym_count(n)));
  for (int i = 0; i < n; ++i) out.comp[static_cast<std::size_t>(sym_index(n, i, i))].constant = 1.0;
  return out;
}

TrigSymTensor trig_random_sym_tensor(const ChartPtr& chart, double amplitude,
                                     int max_frequency, std::uint64_t seed) {
  const int n = chart->dim;
  for (int a = 0; a < n; ++a)
    if (!chart->periodic[a])
      throw config_error("trig_random_sym_tensor: periodic grid required");

  // same mode traversal and RNG stream as random_sym_tensor
  const int F = max_frequency;
  const int span = 2 * F + 1;
  int total = 1;
  for (int a = 0; a < n; ++a) total *= span;
  std::vector<std::array<int, kMaxDim>> modes;
  for (int t = 0; t < total; ++t) {
    int v = t;
    std::array<int, kMaxDim> k{};
    bool zero = true;
    for (int a = 0; a < n; ++a) {
      k[a] = v % span - F;
      v /= span;
      zero &= (k[a] == 0);
    }
    if (!zero) modes.push_back(k);
  }

  std::mt19937_64 rng(seed);
  TrigSymTensor out;
  out.dim = n;
  out.comp.resize(static_cast<std::size_t>(sym_count(n)));
  for (auto& f : out.comp)
    for (const auto& k : modes) {
      TrigMode m;
      m.k = k;
      m.amplitude = 2.0 * uniform01(rng) - 1.0;
      m.phase = 2.0 * kPi * uniform01(rng);
      f.modes.push_back(m);
    }

  // grid-max normalization, component by component
  TensorSampler sampler(out, *chart);
  for (std::size_t c = 0; c < out.comp.size(); ++c) {
    double mx = 0.0;
    std::array<int, kMaxDim> ix{};
    for (std::size_t node = 0; node < chart->node_count; ++node) {
      mx = std::max(mx, std::abs(sampler.value(static_cast<int>(c), ix)));
      advance(*chart, ix);
    }
    if (mx == 0.0) continue;
    const double s = amplitude / mx;
    for (TrigMode& m : out.comp[c].modes) m.amplitude *= s;
  }
  return out;
}

TrigSymTensor trig_add(const TrigSymTensor& a, const TrigSymTensor& b, double bscale) {
  if (a.dim != b.dim || a.comp.size() != b.comp.size())
    throw config_error("trig_add: dimension mismatch");
  TrigSymTensor out = a;
  for (std::size_t c = 0; c < out.comp.size(); ++c) {
    out.comp[c].constant += bscale * b.comp[c].constant;
    for (const TrigMode& m : b.comp[c].modes) {
      TrigMode scaled = m;
      scaled.amplitude *= bscale;
      out.comp[c].modes.push_back(scaled);
    }
  }
  return out;
}

SymTensorField sample(const TrigSymTensor& t, const ChartPtr& chart) {
  require_trig_chart(t, *chart, "sample");
  TensorSampler sampler(t, *chart);
  SymTensorField out(chart);
  for (int c = 0; c < out.comps(); ++c) {
    double* oc = out.comp(c);
    std::array<int, kMaxDim> ix{};
    for (std::size_t node = 0; node < chart->node_count; ++node) {
      oc[node] = sampler.value(c, ix);
      advance(*chart, ix);
    }
  }
  return out;
}

ScalarField scalar_curvature_exact(const TrigSymTensor& t, const ChartPtr& chart) {
  require_trig_chart(t, *chart, "scalar_curvature_exact");
  const int n = chart->dim;
  TensorSampler sampler(t, *chart);
  std::vector<Jet3> jets(static_cast<std::size_t>(sym_count(n)));
  auto P = std::make_unique<PointGeom>();
  ScalarField out(chart);
  std::array<int, kMaxDim> ix{};
  for (std::size_t node = 0; node < chart->node_count; ++node) {
    for (int c = 0; c < sym_count(n); ++c) sampler.jet(c, ix, jets[static_cast<std::size_t>(c)]);
    build_geom(n, jets.data(), false, *P);
    out[node] = P->s;
    advance(*chart, ix);
  }
  return out;
}

double bianchi_residual_exact(const TrigSymTensor& t, const ChartPtr& chart) {
  require_trig_chart(t, *chart, "bianchi_residual_exact");
  const int n = chart->dim;
  TensorSampler sampler(t, *chart);
  MetricField g(sample(t, chart));
  VectorField resid(chart);

  std::vector<Jet3> jets(static_cast<std::size_t>(sym_count(n)));
  auto P = std::make_unique<PointGeom>();
  const bool flip = sign_canary();
  std::array<int, kMaxDim> ix{};
  for (std::size_t node = 0; node < chart->node_count; ++node) {
    for (int c = 0; c < sym_count(n); ++c) sampler.jet(c, ix, jets[static_cast<std::size_t>(c)]);
    build_geom(n, jets.data(), true, *P);

    // covariant (delta Ric)_j = -g^{ik} (d_i R_kj - Gamma^l_ik R_lj - Gamma^l_ij R_kl)
    double cov[kMaxDim];
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          double nab = P->dR[i][k][j];
          for (int l = 0; l < n; ++l)
            nab -= P->gamma[l][i][k] * P->R[l][j] + P->gamma[l][i][j] * P->R[k][l];
          acc += P->ginv[i][k] * nab;
        }
      cov[j] = -acc;
    }
    for (int i = 0; i < n; ++i) {
      double dr = 0.0, grad_s = 0.0;
      for (int j = 0; j < n; ++j) {
        dr += P->ginv[i][j] * cov[j];
        grad_s += P->ginv[i][j] * P->ds[j];
      }
      if (flip) dr = -dr;  // mirrors the divergence sign canary
      resid.comp(i)[node] = dr + 0.5 * grad_s;
    }
    advance(*chart, ix);
  }
  return l2_norm(resid, g);
}

VariationCheck first_variation_checks_exact(const TrigSymTensor& gt,
                                            const TrigSymTensor& ht,
                                            const ChartPtr& chart, double dt) {
  if (!(dt >= 1e-6 && dt <= 1e-2))
    throw config_error("first_variation_checks_exact: dt must lie in [1e-6, 1e-2]");
  require_trig_chart(gt, *chart, "first_variation_checks_exact");
  require_trig_chart(ht, *chart, "first_variation_checks_exact");
  const int n = chart->dim;
  const int m = sym_count(n);

  TensorSampler sg(gt, *chart);
  TensorSampler sh(ht, *chart);
  std::vector<Jet3> jg(static_cast<std::size_t>(m)), jh(static_cast<std::size_t>(m)),
      jc(static_cast<std::size_t>(m));
  auto P0 = std::make_unique<PointGeom>();
  auto Pt = std::make_unique<PointGeom>();
  const double w = chart->cell_weight();
  const bool flip = sign_canary();

  const double steps[2] = {dt, 0.5 * dt};
  double vol_acc[2] = {0.0, 0.0}, sc_acc[2] = {0.0, 0.0};
  double S_plus[2] = {0.0, 0.0}, S_minus[2] = {0.0, 0.0};
  double pairing = 0.0;

  std::array<int, kMaxDim> ix{};
  for (std::size_t node = 0; node < chart->node_count; ++node) {
    for (int c = 0; c < m; ++c) {
      sg.jet(c, ix, jg[static_cast<std::size_t>(c)]);
      sh.jet(c, ix, jh[static_cast<std::size_t>(c)]);
    }
    build_geom(n, jg.data(), false, *P0);
    const double rho0 = std::sqrt(P0->det);

    // h and its partials at the node
    double h0[kMaxDim][kMaxDim], dh[kMaxDim][kMaxDim][kMaxDim];
    double ddh[kMaxDim][kMaxDim][kMaxDim][kMaxDim];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Jet3& J = jh[static_cast<std::size_t>(sym_index(n, i, j))];
        h0[i][j] = J.v;
        for (int a = 0; a < n; ++a) {
          dh[a][i][j] = J.d1[a];
          for (int b = 0; b < n; ++b) ddh[a][b][i][j] = J.d2[a][b];
        }
      }

    // tr_g h and its first two partials
    double tr = 0.0, dtr[kMaxDim] = {}, ddtr[kMaxDim][kMaxDim] = {};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        tr += P0->ginv[i][j] * h0[i][j];
        for (int a = 0; a < n; ++a) {
          dtr[a] += P0->dginv[a][i][j] * h0[i][j] + P0->ginv[i][j] * dh[a][i][j];
          for (int b = 0; b < n; ++b)
            ddtr[a][b] += P0->ddginv[a][b][i][j] * h0[i][j] +
                          P0->dginv[a][i][j] * dh[b][i][j] +
                          P0->dginv[b][i][j] * dh[a][i][j] +
                          P0->ginv[i][j] * ddh[a][b][i][j];
        }
      }

    // Laplacian of tr_g h (positive-spectrum convention, canary-sensitive)
    double lap = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double corr = ddtr[a][b];
        for (int c = 0; c < n; ++c) corr -= P0->gamma[c][a][b] * dtr[c];
        lap -= P0->ginv[a][b] * corr;
      }
    if (flip) lap = -lap;

    // delta delta h = g^{jb} g^{ia} nabla_b nabla_a h_ij
    double Ta[kMaxDim][kMaxDim][kMaxDim];
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double acc = dh[a][i][j];
          for (int l = 0; l < n; ++l)
            acc -= P0->gamma[l][a][i] * h0[l][j] + P0->gamma[l][a][j] * h0[i][l];
          Ta[a][i][j] = acc;
        }
    double ddh_scalar = 0.0;
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double dTa = ddh[b][a][i][j];
            for (int l = 0; l < n; ++l)
              dTa -= P0->dgamma[b][l][a][i] * h0[l][j] + P0->gamma[l][a][i] * dh[b][l][j] +
                     P0->dgamma[b][l][a][j] * h0[i][l] + P0->gamma[l][a][j] * dh[b][i][l];
            double cov2 = dTa;
            for (int l = 0; l < n; ++l)
              cov2 -= P0->gamma[l][b][a] * Ta[l][i][j] + P0->gamma[l][b][i] * Ta[a][l][j] +
                      P0->gamma[l][b][j] * Ta[a][i][l];
            ddh_scalar += P0->ginv[j][b] * P0->ginv[i][a] * cov2;
          }
    if (flip) ddh_scalar = -ddh_scalar;

    // (Ric, h)
    double rh = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q)
            rh += P0->ginv[i][p] * P0->ginv[j][q] * P0->R[i][j] * h0[p][q];

    const double formula = lap + ddh_scalar - rh;

    for (int tlev = 0; tlev < 2; ++tlev) {
      const double eps = steps[tlev];
      for (int c = 0; c < m; ++c)
        jet_combine(jg[static_cast<std::size_t>(c)], jh[static_cast<std::size_t>(c)], eps,
                    jc[static_cast<std::size_t>(c)]);
      build_geom(n, jc.data(), false, *Pt);
      const double s_p = Pt->s, rho_p = std::sqrt(Pt->det);
      for (int c = 0; c < m; ++c)
        jet_combine(jg[static_cast<std::size_t>(c)], jh[static_cast<std::size_t>(c)], -eps,
                    jc[static_cast<std::size_t>(c)]);
      build_geom(n, jc.data(), false, *Pt);
      const double s_m = Pt->s, rho_m = std::sqrt(Pt->det);

      const double vol_def = (rho_p - rho_m) / (2.0 * eps) - 0.5 * tr * rho0;
      const double sc_def = (s_p - s_m) / (2.0 * eps) - formula;
      vol_acc[tlev] += w * rho0 * vol_def * vol_def;
      sc_acc[tlev] += w * rho0 * sc_def * sc_def;
      S_plus[tlev] += w * rho_p * s_p * s_p;
      S_minus[tlev] += w * rho_m * s_m * s_m;
    }
    pairing += w * rho0 * (2.0 * P0->s * formula + 0.5 * P0->s * P0->s * tr);
    advance(*chart, ix);
  }

  VariationCheck out;
  out.volume_defect = std::sqrt(vol_acc[0]);
  out.scalar_defect = std::sqrt(sc_acc[0]);
  out.energy_defect = std::abs((S_plus[0] - S_minus[0]) / (2.0 * steps[0]) - pairing);
  out.volume_defect_half = std::sqrt(vol_acc[1]);
  out.scalar_defect_half = std::sqrt(sc_acc[1]);
  out.energy_defect_half = std::abs((S_plus[1] - S_minus[1]) / (2.0 * steps[1]) - pairing);
  return out;
}

}  // namespace curvfunc
