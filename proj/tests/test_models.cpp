#include <doctest.h>

#include <cmath>

#include "curvfunc/errors.hpp"
#include "curvfunc/geometry.hpp"
#include "curvfunc/models.hpp"
#include "helpers.hpp"

using namespace curvfunc;
using test_helpers::rel_err;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("flat torus basics") {
  ModelMetric m = flat_torus(2, {1.0, 1.0}, 32);
  CHECK(m.metric.volume() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.scalar_flat);
  CHECK(m.einstein);

  ModelMetric m2 = flat_torus(3, {1.0, 2.0, 3.0}, 16);
  CHECK(m2.metric.volume() == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("sphere chart volumes are quadrature-exact") {
  ModelMetric s2 = round_sphere_chart(2, 1.0, 32);
  CHECK(rel_err(s2.metric.volume(), 4 * kPi) < 1e-12);
  ModelMetric s2r = round_sphere_chart(2, 2.0, 32);
  CHECK(rel_err(s2r.metric.volume(), 16 * kPi) < 1e-12);
  ModelMetric s3 = round_sphere_chart(3, 1.0, 16);
  CHECK(rel_err(s3.metric.volume(), 2 * kPi * kPi) < 1e-12);
}

TEST_CASE("product sphere oracles") {
  ModelMetric m = product_spheres(2, 1.0, 2, 1.0, 12);
  CHECK(m.einstein);
  CHECK(m.oracle_scalar == doctest::Approx(4.0));
  CHECK(rel_err(m.metric.volume(), 16 * kPi * kPi) < 1e-12);

  ModelMetric m2 = product_spheres(2, 1.0, 3, 1.0, 8);
  CHECK_FALSE(m2.einstein);
  CHECK(m2.oracle_scalar == doctest::Approx(8.0));
}

TEST_CASE("conformal deformation round trip") {
  MetricField g = test_helpers::flat_t2();
  ScalarField f = random_scalar(g.chart(), 0.3, 2, 7);
  MetricField gc = conformal_deform(g, f);
  MetricField back = conformal_deform(gc, scale(f, -1.0));
  double worst = 0.0;
  for (int c = 0; c < back.tensor().comps(); ++c)
    for (std::size_t i = 0; i < back.nodes(); ++i)
      worst = std::max(worst,
                       std::abs(back.tensor().comp(c)[i] - g.tensor().comp(c)[i]));
  CHECK(worst < 1e-14);
}

TEST_CASE("random fields are deterministic and band-limited in amplitude") {
  auto chart = test_helpers::flat_t3().chart();
  ScalarField a = random_scalar(chart, 0.25, 3, 1234);
  ScalarField b = random_scalar(chart, 0.25, 3, 1234);
  for (std::size_t i = 0; i < a.nodes(); ++i) CHECK(a[i] == b[i]);
  CHECK(max_abs(a) == doctest::Approx(0.25).epsilon(1e-12));

  ScalarField c = random_scalar(chart, 0.25, 3, 1235);
  bool differs = false;
  for (std::size_t i = 0; i < a.nodes(); ++i) differs |= (a[i] != c[i]);
  CHECK(differs);
}

TEST_CASE("random perturbation preserves determinism and flags SPD loss") {
  MetricField g = test_helpers::flat_t3();
  MetricField p1 = random_perturbation(g, 0.05, 3, 42);
  MetricField p2 = random_perturbation(g, 0.05, 3, 42);
  for (int c = 0; c < p1.tensor().comps(); ++c)
    for (std::size_t i = 0; i < p1.nodes(); ++i)
      CHECK(p1.tensor().comp(c)[i] == p2.tensor().comp(c)[i]);

  CHECK_THROWS_WITH_AS(random_perturbation(g, 5.0, 3, 42),
                       doctest::Contains("amplitude"), spd_violation);
}

TEST_CASE("amplitude zero returns the base metric") {
  MetricField g = test_helpers::flat_t3();
  MetricField p = random_perturbation(g, 0.0, 3, 42);
  for (int c = 0; c < p.tensor().comps(); ++c)
    for (std::size_t i = 0; i < p.nodes(); ++i)
      CHECK(p.tensor().comp(c)[i] == g.tensor().comp(c)[i]);
}
