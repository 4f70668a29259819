#include <doctest.h>

#include <cmath>

#include "curvfunc/curvature.hpp"
#include "curvfunc/errors.hpp"
#include "curvfunc/exact.hpp"
#include "curvfunc/models.hpp"
#include "helpers.hpp"

using namespace curvfunc;

TEST_CASE("trig draw samples to the same field as the stencil-path generator") {
  MetricField flat = test_helpers::flat_t3();
  SymTensorField a = random_sym_tensor(flat.chart(), 0.05, 2, 123);
  SymTensorField b = sample(trig_random_sym_tensor(flat.chart(), 0.05, 2, 123), flat.chart());
  double worst = 0.0;
  for (int c = 0; c < a.comps(); ++c)
    for (std::size_t i = 0; i < a.nodes(); ++i)
      worst = std::max(worst, std::abs(a.comp(c)[i] - b.comp(c)[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("exact scalar curvature: zero on flat, limit of the stencil kernel") {
  TrigSymTensor flat3 = trig_flat_metric(3);
  MetricField f16 = test_helpers::flat_t3();
  CHECK(max_abs(scalar_curvature_exact(flat3, f16.chart())) == 0.0);

  // the stencil evaluation converges to the exact one at its design order
  double defect[2];
  int slot = 0;
  for (int res : {16, 32}) {
    MetricField flat = flat_torus(3, {1.0, 1.0, 1.0}, res).metric;
    TrigSymTensor g = trig_add(flat3, trig_random_sym_tensor(flat.chart(), 0.05, 2, 7));
    ScalarField se = scalar_curvature_exact(g, flat.chart());
    ScalarField sf = scalar_curvature(MetricField(sample(g, flat.chart())));
    double worst = 0.0;
    for (std::size_t i = 0; i < se.nodes(); ++i)
      worst = std::max(worst, std::abs(se[i] - sf[i]));
    defect[slot++] = worst;
  }
  CHECK(std::log2(defect[0] / defect[1]) > 3.0);
}

TEST_CASE("exact Bianchi residual sits at roundoff and catches the sign canary") {
  MetricField flat2 = test_helpers::flat_t2(24);
  MetricField flat3 = test_helpers::flat_t3();
  struct Case { const ChartPtr& chart; int dim; };
  const Case cases[] = {{flat2.chart(), 2}, {flat3.chart(), 3}};
  for (const Case& c : cases) {
    TrigSymTensor g = trig_add(trig_flat_metric(c.dim),
                               trig_random_sym_tensor(c.chart, 0.05, 2, 77));
    const double healthy = bianchi_residual_exact(g, c.chart);
    CHECK(healthy < 1e-10);
    set_sign_canary(true);
    const double broken = bianchi_residual_exact(g, c.chart);
    set_sign_canary(false);
    CHECK(broken > 1e-2);
  }
}

TEST_CASE("exact first variation: all defects at the t-differencing floor") {
  MetricField flat = test_helpers::flat_t2(32);
  TrigSymTensor g = trig_add(trig_flat_metric(2),
                             trig_random_sym_tensor(flat.chart(), 0.02, 2, 31));
  TrigSymTensor h = trig_random_sym_tensor(flat.chart(), 0.05, 2, 32);
  VariationCheck chk = first_variation_checks_exact(g, h, flat.chart(), 1e-4);
  CHECK(chk.volume_defect < 1e-10);
  CHECK(chk.scalar_defect < 1e-7);
  CHECK(chk.energy_defect < 1e-7);
  // quartic central-difference error in t: quartering under dt -> dt/2
  CHECK(chk.scalar_defect_half < 0.5 * chk.scalar_defect);

  SUBCASE("dt bounds are enforced") {
    CHECK_THROWS_AS(first_variation_checks_exact(g, h, flat.chart(), 1e-7), config_error);
    CHECK_THROWS_AS(first_variation_checks_exact(g, h, flat.chart(), 0.1), config_error);
  }
}

TEST_CASE("trig_add is linear under sampling") {
  MetricField flat = test_helpers::flat_t2();
  TrigSymTensor a = trig_random_sym_tensor(flat.chart(), 0.3, 2, 1);
  TrigSymTensor b = trig_random_sym_tensor(flat.chart(), 0.2, 2, 2);
  SymTensorField lhs = sample(trig_add(a, b, -1.5), flat.chart());
  SymTensorField sa = sample(a, flat.chart());
  SymTensorField sb = sample(b, flat.chart());
  double worst = 0.0;
  for (int c = 0; c < lhs.comps(); ++c)
    for (std::size_t i = 0; i < lhs.nodes(); ++i)
      worst = std::max(worst,
                       std::abs(lhs.comp(c)[i] - (sa.comp(c)[i] - 1.5 * sb.comp(c)[i])));
  CHECK(worst < 1e-14);
}

TEST_CASE("dimension mismatches are config errors") {
  MetricField flat2 = test_helpers::flat_t2();
  TrigSymTensor g3 = trig_flat_metric(3);
  CHECK_THROWS_AS(sample(g3, flat2.chart()), config_error);
  CHECK_THROWS_AS(bianchi_residual_exact(g3, flat2.chart()), config_error);
  CHECK_THROWS_AS(trig_add(g3, trig_flat_metric(2)), config_error);
}
