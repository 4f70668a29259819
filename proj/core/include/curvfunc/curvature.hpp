#pragma once

#include "curvfunc/field.hpp"
#include "curvfunc/metric.hpp"

namespace curvfunc {

/// Levi-Civita connection coefficients, n * n(n+1)/2 components per node,
/// packed as comp(k, sym_index(i,j)).
class ChristoffelField : public detail::FieldBase<ChristoffelField> {
public:
  ChristoffelField() = default;
  explicit ChristoffelField(ChartPtr chart)
      : FieldBase(chart, chart->dim * sym_count(chart->dim)),
        dim_(chart->dim), m_(sym_count(chart->dim)) {}

  double* comp(int k, int ij) { return data_.data() + (static_cast<std::size_t>(k) * m_ + ij) * nodes(); }
  const double* comp(int k, int ij) const {
    return data_.data() + (static_cast<std::size_t>(k) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(ij)) * nodes();
  }
  double at(int k, int i, int j, std::size_t node) const { return comp(k, sym_index(dim_, i, j))[node]; }

private:
  int dim_ = 0;
  int m_ = 0;
};

ChristoffelField christoffel(const MetricField& g);

/// Ricci tensor by pointwise evaluation of dGamma + Gamma*Gamma from local
/// metric stencils.
SymTensorField ricci(const MetricField& g);

/// s_g = (g, r_g)_g, evaluated by the same kernel as ricci() without
/// materializing the Ricci field.
ScalarField scalar_curvature(const MetricField& g);

/// Ricci and scalar curvature from a single kernel pass.
void ricci_and_scalar(const MetricField& g, SymTensorField& ricci_out,
                      ScalarField& scalar_out);

/// Verification canary: while enabled, laplacian() and divergence() return
/// the wrong sign, so sign-sensitive identity suites must fail.
void set_sign_canary(bool enabled);
bool sign_canary();

/// Geometer's Laplacian, Delta = -div grad (nonnegative spectrum), in
/// conservative form -(1/rho) D_i (rho g^ij D_j f). Exactly self-adjoint
/// with respect to the dmu_g quadrature on periodic grids.
ScalarField laplacian(const ScalarField& f, const MetricField& g);

/// Covariant Hessian (nabla d f)_ij = D_i D_j f - Gamma^k_ij D_k f.
SymTensorField hessian(const ScalarField& f, const MetricField& g);
SymTensorField hessian(const ScalarField& f, const MetricField& g,
                       const ChristoffelField& gamma);

/// delta_g h for a symmetric 2-tensor, returned contravariant. Sign fixed
/// by the contracted Bianchi identity delta_g r_g = -1/2 d s_g.
VectorField divergence(const SymTensorField& h, const MetricField& g);
VectorField divergence(const SymTensorField& h, const MetricField& g,
                       const ChristoffelField& gamma);

/// delta_g delta_g h as a scalar field (the double divergence in Eq.-style
/// variation formulas).
ScalarField double_divergence(const SymTensorField& h, const MetricField& g);

/// div_g X = (1/rho) D_i (rho X^i).
ScalarField divergence_vector(const VectorField& x, const MetricField& g);

/// Symmetrized covariant derivative of the lowered field, normalized as the
/// formal adjoint of divergence(): (delta* X)_ij = 1/2 (nabla_i X_j + nabla_j X_i).
SymTensorField delta_star(const VectorField& x, const MetricField& g);

/// || L_X g - (2/n)(div X) g ||_L2 : zero iff X is conformal for g.
double conformal_residual(const VectorField& x, const MetricField& g);

}  // namespace curvfunc
