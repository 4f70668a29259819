#include <doctest.h>

#include <cmath>

#include "curvfunc/curvature.hpp"
#include "curvfunc/geometry.hpp"
#include "curvfunc/models.hpp"
#include "helpers.hpp"

using namespace curvfunc;
using test_helpers::rel_err;

namespace {
constexpr double kPi = 3.14159265358979323846;

double masked_scalar_defect(const ModelMetric& m) {
  ScalarField s = scalar_curvature(m.metric);
  double worst = 0.0;
  const GridChart& chart = s.grid();
  for (std::size_t i = 0; i < s.nodes(); ++i)
    if (chart.included(i)) worst = std::max(worst, std::abs(s[i] - m.oracle_scalar));
  return worst;
}

}  // namespace

TEST_CASE("flat torus curvature vanishes to machine precision") {
  MetricField g = test_helpers::flat_t3();
  SymTensorField r = ricci(g);
  ScalarField s = scalar_curvature(g);
  for (int c = 0; c < r.comps(); ++c)
    for (std::size_t i = 0; i < r.nodes(); ++i) CHECK(std::abs(r.comp(c)[i]) < 1e-13);
  CHECK(max_abs(s) < 1e-12);
}

TEST_CASE("round sphere scalar curvature oracles") {
  CHECK(masked_scalar_defect(round_sphere_chart(2, 1.0, 48)) < 1e-4);
  CHECK(masked_scalar_defect(round_sphere_chart(2, 2.0, 48)) < 1e-4);
  CHECK(masked_scalar_defect(round_sphere_chart(3, 1.0, 24)) < 2e-3);
}

TEST_CASE("scalar curvature convergence order on the 2-sphere") {
  const double e1 = masked_scalar_defect(round_sphere_chart(2, 1.0, 24));
  const double e2 = masked_scalar_defect(round_sphere_chart(2, 1.0, 48));
  CHECK(std::log2(e1 / e2) > 3.5);
}

TEST_CASE("laplacian is self-adjoint in the dmu quadrature") {
  MetricField g = test_helpers::perturbed_t3(16, 0.1);
  ScalarField a = random_scalar(g.chart(), 1.0, 2, 1);
  ScalarField b = random_scalar(g.chart(), 1.0, 2, 2);
  const double lhs = l2_inner(laplacian(a, g), b, g);
  const double rhs = l2_inner(a, laplacian(b, g), g);
  CHECK(rel_err(lhs, rhs) < 1e-11);
}

TEST_CASE("laplacian has the geometer sign") {
  // On the flat unit torus, Lap sin(2 pi x) = (2 pi)^2 sin(2 pi x) >= 0 spectrum
  MetricField g = test_helpers::flat_t2(32);
  ScalarField f(g.chart());
  const GridChart& chart = g.grid();
  std::array<int, kMaxDim> ix{};
  for (std::size_t i = 0; i < f.nodes(); ++i) {
    f[i] = std::sin(2 * kPi * chart.coord(0, ix[0]));
    if (++ix[0] == chart.res[0]) { ix[0] = 0; ++ix[1]; }
  }
  ScalarField lf = laplacian(f, g);
  const double ray = l2_inner(lf, f, g) / l2_inner(f, f, g);
  CHECK(ray > 0.0);
  CHECK(rel_err(ray, 4 * kPi * kPi) < 1e-3);
}

TEST_CASE("hessian of a linear-phase field on the flat torus") {
  MetricField g = test_helpers::flat_t2(32);
  ScalarField f(g.chart());
  const GridChart& chart = g.grid();
  std::array<int, kMaxDim> ix{};
  for (std::size_t i = 0; i < f.nodes(); ++i) {
    f[i] = std::sin(2 * kPi * (chart.coord(0, ix[0]) + chart.coord(1, ix[1])));
    if (++ix[0] == chart.res[0]) { ix[0] = 0; ++ix[1]; }
  }
  SymTensorField hess = hessian(f, g);
  // all components equal -(2 pi)^2 sin(...)
  double worst = 0.0;
  for (int c = 0; c < hess.comps(); ++c)
    for (std::size_t i = 0; i < hess.nodes(); ++i)
      worst = std::max(worst, std::abs(hess.comp(c)[i] + 4 * kPi * kPi * f[i]));
  CHECK(worst < 2e-2);  // order-4 phase error at resolution 32
}

TEST_CASE("divergence sign follows the Bianchi convention") {
  // || delta Ric + 1/2 ds || is small, || delta Ric - 1/2 ds || is not
  MetricField g = test_helpers::perturbed_t3(16, 0.05);
  SymTensorField r = ricci(g);
  ScalarField s = scalar_curvature(g);
  VectorField dr = divergence(r, g);
  const int n = g.dim();
  VectorField plus(g.chart()), minus(g.chart());
  const SymTensorField& gi = g.inverse();
  std::vector<ScalarField> ds;
  for (int a = 0; a < n; ++a) ds.push_back(partial_derivative(s, a));
  for (int i = 0; i < n; ++i)
    for (std::size_t node = 0; node < g.nodes(); ++node) {
      double grad = 0.0;
      for (int j = 0; j < n; ++j)
        grad += gi.comp(sym_index(n, i, j))[node] * ds[static_cast<std::size_t>(j)][node];
      plus.comp(i)[node] = dr.comp(i)[node] + 0.5 * grad;
      minus.comp(i)[node] = dr.comp(i)[node] - 0.5 * grad;
    }
  // the + branch is pure stencil truncation, the - branch carries the full
  // 2 ds scale; two decades of separation fix the sign unambiguously
  CHECK(l2_norm(plus, g) < 1e-2 * l2_norm(minus, g));
}

TEST_CASE("delta_star is adjoint to divergence on the flat torus") {
  MetricField g = test_helpers::flat_t3();
  VectorField x = random_vector(g.chart(), 1.0, 2, 5);
  SymTensorField h = random_sym_tensor(g.chart(), 1.0, 2, 6);
  const double lhs = integrate(pointwise_inner(delta_star(x, g), h, g), g);
  const double rhs = integrate(pointwise_inner(x, divergence(h, g), g), g);
  CHECK(rel_err(lhs, rhs) < 1e-11);
}

TEST_CASE("conformal residual separates conformal from generic fields") {
  MetricField flat = test_helpers::flat_t2(32);
  ScalarField f = random_scalar(flat.chart(), 0.1, 2, 11);
  MetricField g = conformal_deform(flat, f);
  VectorField translation(g.chart());
  for (std::size_t i = 0; i < translation.nodes(); ++i) translation.comp(0)[i] = 1.0;
  VectorField generic = random_vector(g.chart(), 1.0, 2, 12);
  CHECK(conformal_residual(translation, g) < 1e-6);
  CHECK(conformal_residual(generic, g) > 1e-2);
}

TEST_CASE("sign canary flips the laplacian") {
  MetricField g = test_helpers::flat_t2();
  ScalarField f = random_scalar(g.chart(), 1.0, 2, 3);
  ScalarField l1 = laplacian(f, g);
  set_sign_canary(true);
  ScalarField l2 = laplacian(f, g);
  set_sign_canary(false);
  for (std::size_t i = 0; i < f.nodes(); ++i) CHECK(l1[i] == -l2[i]);
}
