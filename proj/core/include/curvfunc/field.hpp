#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "curvfunc/errors.hpp"
#include "curvfunc/grid.hpp"

namespace curvfunc {

/// Index of the (i,j) component (i<=j) in packed symmetric storage.
inline int sym_index(int dim, int i, int j) {
  if (i > j) { const int t = i; i = j; j = t; }
  return i * dim - (i * (i - 1)) / 2 + (j - i);
}

inline int sym_count(int dim) { return dim * (dim + 1) / 2; }

namespace detail {
template <class Derived>
class FieldBase {
public:
  const ChartPtr& chart() const { return chart_; }
  const GridChart& grid() const { return *chart_; }
  std::size_t nodes() const { return chart_->node_count; }

  bool all_finite() const {
    for (double v : data_) if (!std::isfinite(v)) return false;
    return true;
  }

protected:
  FieldBase() = default;
  FieldBase(ChartPtr chart, int comps)
      : chart_(std::move(chart)),
        data_(static_cast<std::size_t>(comps) * chart_->node_count, 0.0) {}

  ChartPtr chart_;
  std::vector<double> data_;
};
}  // namespace detail

class ScalarField : public detail::FieldBase<ScalarField> {
public:
  ScalarField() = default;
  explicit ScalarField(ChartPtr chart) : FieldBase(std::move(chart), 1) {}

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }
};

class VectorField : public detail::FieldBase<VectorField> {
public:
  VectorField() = default;
  explicit VectorField(ChartPtr chart)
      : FieldBase(chart, chart->dim), ncomp_(chart->dim) {}

  int comps() const { return ncomp_; }
  double* comp(int c) { return data_.data() + static_cast<std::size_t>(c) * nodes(); }
  const double* comp(int c) const { return data_.data() + static_cast<std::size_t>(c) * nodes(); }
  double& at(int c, std::size_t i) { return comp(c)[i]; }
  double at(int c, std::size_t i) const { return comp(c)[i]; }

private:
  int ncomp_ = 0;
};

/// Covariant symmetric 2-tensor field; only the upper triangle is stored.
class SymTensorField : public detail::FieldBase<SymTensorField> {
public:
  SymTensorField() = default;
  explicit SymTensorField(ChartPtr chart)
      : FieldBase(chart, sym_count(chart->dim)), ncomp_(sym_count(chart->dim)) {}

  int comps() const { return ncomp_; }
  double* comp(int c) { return data_.data() + static_cast<std::size_t>(c) * nodes(); }
  const double* comp(int c) const { return data_.data() + static_cast<std::size_t>(c) * nodes(); }
  double& at(int i, int j, std::size_t node) {
    return comp(sym_index(grid().dim, i, j))[node];
  }
  double at(int i, int j, std::size_t node) const {
    return comp(sym_index(grid().dim, i, j))[node];
  }

private:
  int ncomp_ = 0;
};

inline void require_same_chart(const GridChart& a, const GridChart& b, const char* what) {
  if (!a.same_as(b)) throw config_error(std::string(what) + ": fields live on different grids");
}

}  // namespace curvfunc
