#include "curvfunc/metric.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace curvfunc {

bool sym_cholesky(int n, const double* a, double floor, double* lower) {
  // The floor acts as a pivot threshold only; factoring g itself (rather
  // than g - floor I) keeps det and inverse unbiased.
  double m[kMaxDim * kMaxDim];
  std::memcpy(m, a, sizeof(double) * static_cast<std::size_t>(n * n));
  for (int j = 0; j < n; ++j) {
    double d = m[j * n + j];
    for (int k = 0; k < j; ++k) d -= lower[j * n + k] * lower[j * n + k];
    if (d <= floor) return false;
    const double lj = std::sqrt(d);
    lower[j * n + j] = lj;
    for (int i = j + 1; i < n; ++i) {
      double s = m[i * n + j];
      for (int k = 0; k < j; ++k) s -= lower[i * n + k] * lower[j * n + k];
      lower[i * n + j] = s / lj;
    }
    for (int i = 0; i < j; ++i) lower[i * n + j] = 0.0;
  }
  return true;
}

void sym_inverse_from_cholesky(int n, const double* lower, double* inverse, double* det) {
  // det = prod(L_jj)^2; inverse = L^-T L^-1
  double d = 1.0;
  for (int j = 0; j < n; ++j) d *= lower[j * n + j];
  if (det) *det = d * d;
  // invert lower triangular
  double li[kMaxDim * kMaxDim] = {0};
  for (int j = 0; j < n; ++j) {
    li[j * n + j] = 1.0 / lower[j * n + j];
    for (int i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (int k = j; k < i; ++k) s -= lower[i * n + k] * li[k * n + j];
      li[i * n + j] = s / lower[i * n + i];
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = std::max(i, j); k < n; ++k) s += li[k * n + i] * li[k * n + j];
      inverse[i * n + j] = s;
    }
}

MetricField::MetricField(SymTensorField g, double spd_floor)
    : g_(std::move(g)), spd_floor_(spd_floor) {
  const GridChart& chart = g_.grid();
  const int n = chart.dim;
  const int m = sym_count(n);
  inv_ = SymTensorField(g_.chart());
  sqrt_det_ = ScalarField(g_.chart());

  zero_comp_.assign(static_cast<std::size_t>(m), true);
  for (int c = 0; c < m; ++c) {
    const double* p = g_.comp(c);
    for (std::size_t i = 0; i < g_.nodes(); ++i)
      if (p[i] != 0.0) { zero_comp_[static_cast<std::size_t>(c)] = false; break; }
  }

  double a[kMaxDim * kMaxDim];
  double lower[kMaxDim * kMaxDim];
  double ai[kMaxDim * kMaxDim];
  const std::size_t nn = g_.nodes();
  for (std::size_t node = 0; node < nn; ++node) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        a[i * n + j] = g_.comp(sym_index(n, i, j))[node];
    if (!sym_cholesky(n, a, spd_floor_, lower))
      throw spd_violation("metric not SPD above floor " + std::to_string(spd_floor_) +
                          " at node " + std::to_string(node));
    double det = 0.0;
    sym_inverse_from_cholesky(n, lower, ai, &det);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        inv_.comp(sym_index(n, i, j))[node] = ai[i * n + j];
    sqrt_det_[node] = std::sqrt(det);
  }

  // total volume: quadrature of the density
  const double w = chart.cell_weight();
  double vol = 0.0;
  for (std::size_t node = 0; node < nn; ++node) vol += sqrt_det_[node];
  volume_ = vol * w;
}

void MetricField::dense_at(std::size_t node, double* out) const {
  const int n = dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[i * n + j] = g_.comp(sym_index(n, i, j))[node];
}

void MetricField::dense_inverse_at(std::size_t node, double* out) const {
  const int n = dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[i * n + j] = inv_.comp(sym_index(n, i, j))[node];
}

}  // namespace curvfunc
