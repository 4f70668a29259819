#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "curvfunc/field.hpp"
#include "curvfunc/functionals.hpp"
#include "curvfunc/metric.hpp"

namespace curvfunc {

/// One Fourier mode of a real trig polynomial on a periodic chart:
/// amplitude * cos(phase + sum_a 2 pi k_a x_a / extent_a).
struct TrigMode {
  std::array<int, kMaxDim> k{};
  double amplitude = 0.0;
  double phase = 0.0;
};

/// Real trig polynomial. Every spatial derivative is available in closed
/// form, so identities evaluated through these objects carry no stencil
/// truncation error; residuals are limited by roundoff alone.
struct TrigScalar {
  double constant = 0.0;
  std::vector<TrigMode> modes;
};

/// Symmetric 2-tensor with trig-polynomial components, packed like
/// SymTensorField (upper triangle, sym_index order).
struct TrigSymTensor {
  int dim = 0;
  std::vector<TrigScalar> comp;
};

/// The identity matrix as a constant tensor.
TrigSymTensor trig_flat_metric(int n);

/// Closed-form twin of random_sym_tensor: the identical seeded mode draw
/// and the same grid-max normalization, returned as a trig polynomial
/// instead of a sampled field. Sampling it on the chart reproduces
/// random_sym_tensor up to roundoff.
TrigSymTensor trig_random_sym_tensor(const ChartPtr& chart, double amplitude,
                                     int max_frequency, std::uint64_t seed);

/// a + bscale * b, componentwise.
TrigSymTensor trig_add(const TrigSymTensor& a, const TrigSymTensor& b,
                       double bscale = 1.0);

/// Evaluate on the chart nodes.
SymTensorField sample(const TrigSymTensor& t, const ChartPtr& chart);

/// Pointwise exact scalar curvature of a trig-polynomial metric.
ScalarField scalar_curvature_exact(const TrigSymTensor& g, const ChartPtr& chart);

/// || delta Ric + 1/2 ds ||_L2 with every spatial derivative exact
/// (metric derivatives to third order in closed form, curvature assembled
/// pointwise). The norm uses the chart quadrature of the sampled metric.
double bianchi_residual_exact(const TrigSymTensor& g, const ChartPtr& chart);

/// First-variation defects along g + t h with exact spatial derivatives:
/// only the t-derivative is a central finite difference, so the defects
/// measure the variational formulas themselves rather than stencil error.
/// The energy pairing uses the divergence-form assembly
/// dS/dt = int (2 s ds/dt + 1/2 s^2 tr_g h) dmu.
VariationCheck first_variation_checks_exact(const TrigSymTensor& g,
                                            const TrigSymTensor& h,
                                            const ChartPtr& chart, double dt);

}  // namespace curvfunc
