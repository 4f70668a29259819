#include "curvfunc/models.hpp"

#include <cmath>
#include <random>

#include "curvfunc/errors.hpp"
#include "curvfunc/geometry.hpp"
#include "curvfunc/grid.hpp"

namespace curvfunc {

namespace {

constexpr double kPi = 3.14159265358979323846;

double uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa draw; avoids unspecified std::uniform_real_distribution
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// sigma such that sigma * h * sum sin(theta_i) integrates sin exactly on
/// a cell-centered grid over (0, pi).
double polar_weight_scale(double h) { return 2.0 * std::sin(0.5 * h) / h; }

int excision_margin(int fd_order) { return 2 * (fd_order / 2 + 1); }

struct SphereAxes {
  std::vector<double> lengths;
  std::vector<bool> periodic;
  std::vector<double> scales;  // quad_scale per axis
};

/// Angular axes of the round S^n chart: (n-1) bounded polar angles and one
/// periodic azimuth. Only the last polar angle needs a weight correction;
/// the sin^2k densities of the others integrate exactly under midpoint.
SphereAxes sphere_axes(int n, double h_polar) {
  SphereAxes ax;
  for (int a = 0; a < n - 1; ++a) {
    ax.lengths.push_back(kPi);
    ax.periodic.push_back(false);
    // density factor sin^(n-1-a); odd powers need the exact-mass scale
    const int power = n - 1 - a;
    ax.scales.push_back(power % 2 == 1 ? polar_weight_scale(h_polar) : 1.0);
  }
  ax.lengths.push_back(2.0 * kPi);
  ax.periodic.push_back(true);
  ax.scales.push_back(1.0);
  return ax;
}

void fill_sphere_block(SymTensorField& t, const GridChart& chart, int axis0, int n_sphere,
                       double radius) {
  // metric block diag(r^2, r^2 sin^2 a0, r^2 sin^2 a0 sin^2 a1, ...)
  const int dim = chart.dim;
  const std::size_t nn = chart.node_count;
  std::array<int, kMaxDim> ix{};
  for (std::size_t node = 0; node < nn; ++node) {
    double factor = radius * radius;
    for (int a = 0; a < n_sphere; ++a) {
      t.comp(sym_index(dim, axis0 + a, axis0 + a))[node] = factor;
      if (a + 1 < n_sphere) {
        const double ang = chart.coord(axis0 + a, ix[axis0 + a]);
        const double s = std::sin(ang);
        factor *= s * s;
      }
    }
    for (int a = 0; a < dim; ++a) {
      if (++ix[a] < chart.res[a]) break;
      ix[a] = 0;
    }
  }
}

}  // namespace

ModelMetric flat_torus(int n, const std::vector<double>& periods, int resolution,
                       int fd_order) {
  auto chart = build_torus_grid(n, resolution, periods);
  if (fd_order != 4) {
    auto* raw = const_cast<GridChart*>(chart.get());
    if (fd_order != 2 && fd_order != 6) throw config_error("flat_torus: fd_order must be 2, 4 or 6");
    raw->fd_order = fd_order;
  }
  SymTensorField t(chart);
  for (int i = 0; i < n; ++i)
    for (std::size_t node = 0; node < t.nodes(); ++node)
      t.comp(sym_index(n, i, i))[node] = 1.0;
  ModelMetric m{"flat_torus", MetricField(std::move(t))};
  m.oracle_scalar = 0.0;
  double vol = 1.0;
  for (double p : periods) vol *= p;
  m.oracle_volume = vol;
  m.einstein = true;     // Ricci flat
  m.scalar_flat = true;
  return m;
}

ModelMetric round_sphere_chart(int n, double radius, int resolution, int fd_order) {
  if (n != 2 && n != 3) throw config_error("round_sphere_chart: n must be 2 or 3");
  if (radius <= 0.0) throw config_error("round_sphere_chart: radius must be positive");
  const double h_polar = kPi / static_cast<double>(resolution);
  SphereAxes ax = sphere_axes(n, h_polar);
  ChartPtr chart = build_chart(n, std::vector<int>(static_cast<std::size_t>(n), resolution),
                               ax.lengths, ax.periodic, fd_order, excision_margin(fd_order));
  auto* raw = const_cast<GridChart*>(chart.get());
  for (int a = 0; a < n; ++a) raw->quad_scale[a] = ax.scales[static_cast<std::size_t>(a)];

  SymTensorField t(chart);
  fill_sphere_block(t, *chart, 0, n, radius);
  ModelMetric m{"round_sphere", MetricField(std::move(t))};
  m.oracle_scalar = static_cast<double>(n) * (n - 1) / (radius * radius);
  m.oracle_volume = (n == 2) ? 4.0 * kPi * radius * radius
                             : 2.0 * kPi * kPi * radius * radius * radius;
  m.einstein = true;
  m.scalar_flat = false;
  return m;
}

ModelMetric product_spheres(int p, double r1, int q, double r2, int resolution,
                            int fd_order) {
  if ((p != 2 && p != 3) || (q != 2 && q != 3))
    throw config_error("product_spheres: factors must be 2- or 3-spheres");
  if (p + q > kMaxDim) throw config_error("product_spheres: total dimension above 5");
  const int dim = p + q;
  const double h_polar = kPi / static_cast<double>(resolution);
  SphereAxes a1 = sphere_axes(p, h_polar);
  SphereAxes a2 = sphere_axes(q, h_polar);
  std::vector<double> lengths = a1.lengths;
  lengths.insert(lengths.end(), a2.lengths.begin(), a2.lengths.end());
  std::vector<bool> periodic = a1.periodic;
  periodic.insert(periodic.end(), a2.periodic.begin(), a2.periodic.end());
  std::vector<double> scales = a1.scales;
  scales.insert(scales.end(), a2.scales.begin(), a2.scales.end());

  ChartPtr chart = build_chart(dim, std::vector<int>(static_cast<std::size_t>(dim), resolution),
                               lengths, periodic, fd_order, excision_margin(fd_order));
  auto* raw = const_cast<GridChart*>(chart.get());
  for (int a = 0; a < dim; ++a) raw->quad_scale[a] = scales[static_cast<std::size_t>(a)];

  SymTensorField t(chart);
  fill_sphere_block(t, *chart, 0, p, r1);
  fill_sphere_block(t, *chart, p, q, r2);
  ModelMetric m{"product_spheres", MetricField(std::move(t))};
  const double s1 = static_cast<double>(p) * (p - 1) / (r1 * r1);
  const double s2 = static_cast<double>(q) * (q - 1) / (r2 * r2);
  m.oracle_scalar = s1 + s2;
  const double v1 = (p == 2) ? 4.0 * kPi * r1 * r1 : 2.0 * kPi * kPi * r1 * r1 * r1;
  const double v2 = (q == 2) ? 4.0 * kPi * r2 * r2 : 2.0 * kPi * kPi * r2 * r2 * r2;
  m.oracle_volume = v1 * v2;
  m.einstein = std::abs((p - 1) / (r1 * r1) - (q - 1) / (r2 * r2)) < 1e-14;
  m.scalar_flat = std::abs(m.oracle_scalar) < 1e-14;
  return m;
}

MetricField conformal_deform(const MetricField& g, const ScalarField& f) {
  require_same_chart(f.grid(), g.grid(), "conformal_deform");
  SymTensorField t = g.tensor();
  for (int c = 0; c < t.comps(); ++c) {
    double* tc = t.comp(c);
    for (std::size_t node = 0; node < t.nodes(); ++node)
      tc[node] *= std::exp(2.0 * f[node]);
  }
  return MetricField(std::move(t), g.spd_floor());
}

namespace {

/// Band-limited trig polynomial, modes |k|_inf <= F excluding 0, fixed
/// deterministic traversal order. Returned un-normalized.
std::vector<double> raw_band_limited(const GridChart& chart, int F, std::mt19937_64& rng) {
  const int n = chart.dim;
  std::vector<std::array<int, kMaxDim>> modes;
  std::array<int, kMaxDim> k{};
  const int span = 2 * F + 1;
  const int total = static_cast<int>(std::pow(span, n));
  for (int t = 0; t < total; ++t) {
    int v = t;
    bool zero = true;
    for (int a = 0; a < n; ++a) {
      k[a] = v % span - F;
      v /= span;
      zero &= (k[a] == 0);
    }
    if (!zero) modes.push_back(k);
  }
  std::vector<double> amp(modes.size()), phase(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    amp[i] = 2.0 * uniform01(rng) - 1.0;
    phase[i] = 2.0 * kPi * uniform01(rng);
  }
  std::vector<double> out(chart.node_count, 0.0);
  std::array<int, kMaxDim> ix{};
  for (std::size_t node = 0; node < chart.node_count; ++node) {
    double x[kMaxDim];
    for (int a = 0; a < n; ++a) x[a] = chart.coord(a, ix[a]) / chart.extent[a];
    double acc = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      double arg = phase[i];
      for (int a = 0; a < n; ++a) arg += 2.0 * kPi * modes[i][a] * x[a];
      acc += amp[i] * std::cos(arg);
    }
    out[node] = acc;
    for (int a = 0; a < n; ++a) {
      if (++ix[a] < chart.res[a]) break;
      ix[a] = 0;
    }
  }
  return out;
}

void normalize_max(std::vector<double>& v, double amplitude) {
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::abs(x));
  if (mx == 0.0) return;
  const double s = amplitude / mx;
  for (double& x : v) x *= s;
}

void require_periodic(const GridChart& chart, const char* what) {
  for (int a = 0; a < chart.dim; ++a)
    if (!chart.periodic[a]) throw config_error(std::string(what) + ": periodic grid required");
}

}  // namespace

ScalarField random_scalar(const ChartPtr& chart, double amplitude, int max_frequency,
                          std::uint64_t seed) {
  require_periodic(*chart, "random_scalar");
  std::mt19937_64 rng(seed);
  ScalarField f(chart);
  f.values() = raw_band_limited(*chart, max_frequency, rng);
  normalize_max(f.values(), amplitude);
  return f;
}

VectorField random_vector(const ChartPtr& chart, double amplitude, int max_frequency,
                          std::uint64_t seed) {
  require_periodic(*chart, "random_vector");
  std::mt19937_64 rng(seed);
  VectorField f(chart);
  for (int c = 0; c < f.comps(); ++c) {
    std::vector<double> v = raw_band_limited(*chart, max_frequency, rng);
    normalize_max(v, amplitude);
    std::copy(v.begin(), v.end(), f.comp(c));
  }
  return f;
}

SymTensorField random_sym_tensor(const ChartPtr& chart, double amplitude,
                                 int max_frequency, std::uint64_t seed) {
  require_periodic(*chart, "random_sym_tensor");
  std::mt19937_64 rng(seed);
  SymTensorField f(chart);
  for (int c = 0; c < f.comps(); ++c) {
    std::vector<double> v = raw_band_limited(*chart, max_frequency, rng);
    normalize_max(v, amplitude);
    std::copy(v.begin(), v.end(), f.comp(c));
  }
  return f;
}

MetricField random_perturbation(const MetricField& g, double amplitude,
                                int max_frequency, std::uint64_t seed) {
  if (amplitude == 0.0) return g;
  SymTensorField pert = random_sym_tensor(g.chart(), amplitude, max_frequency, seed);
  SymTensorField t = add(g.tensor(), pert);
  try {
    return MetricField(std::move(t), g.spd_floor());
  } catch (const spd_violation&) {
    throw spd_violation("random_perturbation: metric lost positivity; reduce the amplitude");
  }
}

}  // namespace curvfunc
