#pragma once

#include <array>
#include <vector>

#include "curvfunc/field.hpp"

namespace curvfunc {

/// SPD symmetric 2-tensor field with cached inverse, volume density
/// sqrt(det g) and total volume. Construction validates SPD-ness at every
/// node against the eigenvalue floor; violation is a hard error.
class MetricField {
public:
  MetricField() = default;
  explicit MetricField(SymTensorField g, double spd_floor = 1e-10);

  const GridChart& grid() const { return g_.grid(); }
  const ChartPtr& chart() const { return g_.chart(); }
  std::size_t nodes() const { return g_.nodes(); }
  int dim() const { return g_.grid().dim; }

  const SymTensorField& tensor() const { return g_; }
  const SymTensorField& inverse() const { return inv_; }
  const ScalarField& volume_density() const { return sqrt_det_; }
  double volume() const { return volume_; }
  double spd_floor() const { return spd_floor_; }

  /// Components that are identically zero across the grid (curvature
  /// kernels skip these).
  const std::vector<bool>& zero_component() const { return zero_comp_; }

  /// Metric components at one node as a dense dim x dim matrix (row-major).
  void dense_at(std::size_t node, double* out) const;
  void dense_inverse_at(std::size_t node, double* out) const;

private:
  SymTensorField g_;
  SymTensorField inv_;
  ScalarField sqrt_det_;
  double volume_ = 0.0;
  double spd_floor_ = 1e-10;
  std::vector<bool> zero_comp_;
};

/// Cholesky of a dense symmetric matrix (row-major, n<=kMaxDim).
/// Returns false if the matrix minus floor*I is not positive definite.
bool sym_cholesky(int n, const double* a, double floor, double* lower);

/// Inverse and determinant from a Cholesky factor.
void sym_inverse_from_cholesky(int n, const double* lower, double* inverse, double* det);

}  // namespace curvfunc
