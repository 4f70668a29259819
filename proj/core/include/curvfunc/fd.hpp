#pragma once

#include <vector>

#include "curvfunc/grid.hpp"

namespace curvfunc {

/// Fornberg finite-difference weights for the m-th derivative at x0
/// given node locations (arbitrary, distinct).
std::vector<double> fd_weights(int m, double x0, const std::vector<double>& nodes);

/// Per-axis stencil tables. Periodic axes hold a single central row;
/// bounded axes hold one row per node index, shifted to one-sided windows
/// near the edges at the same order.
///
/// The second-derivative row is the composition D∘D of first-derivative
/// rows, not the compact direct stencil. Composition keeps second
/// derivatives consistent with repeated first-derivative sweeps, which
/// makes the linearized curvature identities cancel exactly on flat
/// backgrounds (commuting stencils are all that the linear-order algebra
/// uses).
struct AxisStencils {
  struct Row {
    std::vector<int> off1;      // index offsets relative to the node
    std::vector<double> w1;     // first-derivative weights (already / h)
    std::vector<int> off2;
    std::vector<double> w2;     // composed second-derivative weights (/ h^2)
  };
  bool periodic = false;
  int res = 0;
  std::vector<Row> rows;        // size 1 if periodic, else res

  const Row& row(int i) const { return periodic ? rows[0] : rows[static_cast<std::size_t>(i)]; }

  static AxisStencils build(int res, double h, int order, bool periodic);
};

/// Stencil tables for every axis of a chart, built lazily and cached per chart.
const std::vector<AxisStencils>& chart_stencils(const GridChart& chart);

/// One derivative sweep: out = d(in)/dx_axis, m in {1,2}.
void derivative_sweep(const GridChart& chart, const double* in, double* out,
                      int axis, int m = 1);

}  // namespace curvfunc
