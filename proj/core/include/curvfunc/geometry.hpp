#pragma once

#include "curvfunc/field.hpp"
#include "curvfunc/metric.hpp"

namespace curvfunc {

/// d f / d x_axis by central finite differences (order = chart.fd_order).
ScalarField partial_derivative(const ScalarField& f, int axis);

/// Quadrature of f against the volume density of g. On masked charts the
/// masked mean is rescaled by the full-grid volume, so that smooth
/// integrands keep their exact totals while the poorly resolved boundary
/// layers do not contribute directly.
double integrate(const ScalarField& f, const MetricField& g);

/// Pointwise g-inner product a_ij b_pq g^ip g^jq.
ScalarField pointwise_inner(const SymTensorField& a, const SymTensorField& b,
                            const MetricField& g);

/// Pointwise g-inner product of vector fields (contravariant): a^i b^j g_ij.
ScalarField pointwise_inner(const VectorField& a, const VectorField& b,
                            const MetricField& g);

/// trace_g h = (g, h)_g.
ScalarField metric_trace(const SymTensorField& h, const MetricField& g);

/// z_g(h) = h - ((g,h)_g / n) g.
SymTensorField trace_free_part(const SymTensorField& h, const MetricField& g);

/// L2 projection onto the constants: the dmu_g-average of f.
double project_constants(const ScalarField& f, const MetricField& g);

/// Rescale g by Vol^(-2/n) so the result has unit volume.
MetricField normalize_volume(const MetricField& g);

/// L2(dmu_g) norm of a scalar field.
double l2_norm(const ScalarField& f, const MetricField& g);

/// L2(dmu_g) norm of a symmetric tensor field.
double l2_norm(const SymTensorField& h, const MetricField& g);

/// L2(dmu_g) norm of a contravariant vector field.
double l2_norm(const VectorField& v, const MetricField& g);

/// L2(dmu_g) inner product of scalar fields.
double l2_inner(const ScalarField& a, const ScalarField& b, const MetricField& g);

/// Max |f| over unmasked nodes.
double max_abs(const ScalarField& f);

/// Min / max of f over unmasked nodes.
void min_max(const ScalarField& f, double& mn, double& mx);

// -- small helpers used across modules --

ScalarField constant_field(const ChartPtr& chart, double value);
ScalarField add(const ScalarField& a, const ScalarField& b, double bscale = 1.0);
SymTensorField add(const SymTensorField& a, const SymTensorField& b, double bscale = 1.0);
ScalarField scale(const ScalarField& a, double s);
SymTensorField scale(const SymTensorField& a, double s);
ScalarField multiply(const ScalarField& a, const ScalarField& b);
/// h + s * (f * k) pointwise, i.e. axpy with a scalar-field coefficient.
SymTensorField add_scaled_tensor(const SymTensorField& h, const ScalarField& f,
                                 const SymTensorField& k, double s = 1.0);
/// phi * g, the pure-trace (conformal) direction.
SymTensorField conformal_direction(const ScalarField& phi, const MetricField& g);

}  // namespace curvfunc
