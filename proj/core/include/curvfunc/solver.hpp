#pragma once

#include <cstddef>
#include <functional>

#include "curvfunc/field.hpp"
#include "curvfunc/metric.hpp"

namespace curvfunc {

/// In-place linear operator on scalar fields: out = A(in).
using ScalarOp = std::function<void(const ScalarField&, ScalarField&)>;

struct SolveOptions {
  double rel_tol = 1e-10;
  std::size_t max_iterations = 0;  // 0 means 10 * sqrt(node count)
  bool project_mean_zero = false;  // restrict to the dmu-mean-zero subspace
  /// Optional approximate inverse of the operator. Must be self-adjoint and
  /// positive in the L2(dmu_g) inner product; when set, conjugate gradients
  /// runs preconditioned (the MINRES fall-back stays unpreconditioned).
  ScalarOp precond;
};

struct SolveStats {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool used_minres = false;
};

/// Solve A x = b for a self-adjoint operator in L2(dmu_g). Conjugate
/// gradients with a fall-back to MINRES when negative curvature shows the
/// operator is indefinite. Throws solver_failure when the iteration budget
/// is exhausted.
ScalarField krylov_solve(const ScalarOp& apply, const ScalarField& b,
                         const MetricField& g, const SolveOptions& opt = {},
                         SolveStats* stats = nullptr);

}  // namespace curvfunc
