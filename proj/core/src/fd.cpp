#include "curvfunc/fd.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <unordered_map>

#include "curvfunc/errors.hpp"

namespace curvfunc {

std::vector<double> fd_weights(int m, double x0, const std::vector<double>& nodes) {
  // Fornberg (1988), generation of finite difference formulas on
  // arbitrarily spaced grids.
  const int nd = static_cast<int>(nodes.size());
  if (nd < m + 1) throw config_error("fd_weights: not enough nodes for derivative order");
  std::vector<std::vector<double>> c(static_cast<std::size_t>(nd),
                                     std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < nd; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    double c5 = c4;
    c4 = nodes[static_cast<std::size_t>(i)] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
              c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                    c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
        c[static_cast<std::size_t>(i)][0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
            (c4 * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] -
             k * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k - 1)]) / c3;
      c[static_cast<std::size_t>(j)][0] = c4 * c[static_cast<std::size_t>(j)][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(nd));
  for (int i = 0; i < nd; ++i) w[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)];
  return w;
}

namespace {

struct SparseRow {
  std::vector<int> off;
  std::vector<double> w;
};

SparseRow first_derivative_row(int i, int res, double h, int order, bool periodic) {
  const int half = order / 2;
  const int npts = order + 1;
  std::vector<int> off(static_cast<std::size_t>(npts));
  if (periodic || (i - half >= 0 && i + half < res)) {
    for (int q = 0; q < npts; ++q) off[static_cast<std::size_t>(q)] = q - half;
  } else {
    int start = std::clamp(i - half, 0, res - npts);
    for (int q = 0; q < npts; ++q) off[static_cast<std::size_t>(q)] = start + q - i;
  }
  std::vector<double> nodes(off.size());
  for (std::size_t q = 0; q < off.size(); ++q) nodes[q] = h * static_cast<double>(off[q]);
  SparseRow row;
  row.off = off;
  row.w = fd_weights(1, 0.0, nodes);
  return row;
}

SparseRow compose(const SparseRow& outer,
                  const std::vector<SparseRow>& all_rows, int i, int res, bool periodic) {
  std::map<int, double> acc;
  for (std::size_t q = 0; q < outer.off.size(); ++q) {
    int j = i + outer.off[q];
    int jr = j;
    if (periodic) jr = ((j % res) + res) % res;
    const SparseRow& inner = periodic ? all_rows[0] : all_rows[static_cast<std::size_t>(jr)];
    for (std::size_t p = 0; p < inner.off.size(); ++p) {
      // offset relative to node i
      int total = outer.off[q] + inner.off[p] + (periodic ? 0 : 0);
      if (!periodic) total = (jr + inner.off[p]) - i;
      acc[total] += outer.w[q] * inner.w[p];
    }
  }
  SparseRow out;
  for (auto& [o, v] : acc) {
    out.off.push_back(o);
    out.w.push_back(v);
  }
  return out;
}

}  // namespace

AxisStencils AxisStencils::build(int res, double h, int order, bool periodic) {
  AxisStencils s;
  s.periodic = periodic;
  s.res = res;
  const int nrows = periodic ? 1 : res;
  std::vector<SparseRow> d1(static_cast<std::size_t>(nrows));
  for (int i = 0; i < nrows; ++i)
    d1[static_cast<std::size_t>(i)] = first_derivative_row(periodic ? res / 2 : i, res, h, order, periodic);
  s.rows.resize(static_cast<std::size_t>(nrows));
  for (int i = 0; i < nrows; ++i) {
    SparseRow d2 = compose(d1[static_cast<std::size_t>(i)], d1, periodic ? res / 2 : i, res, periodic);
    Row& r = s.rows[static_cast<std::size_t>(i)];
    r.off1 = d1[static_cast<std::size_t>(i)].off;
    r.w1 = d1[static_cast<std::size_t>(i)].w;
    r.off2 = d2.off;
    r.w2 = d2.w;
    if (periodic) {
      // recenter composed offsets (they were built at row res/2)
      // first_derivative_row for periodic is offset-relative already, and
      // compose() used relative offsets, so nothing to do.
    }
  }
  return s;
}

namespace {
std::mutex g_cache_mutex;
// Keyed by the parameters the stencils actually depend on; never by the
// chart's address, which can be reused after a chart is destroyed.
std::unordered_map<std::string, std::vector<AxisStencils>> g_cache;

std::string stencil_key(const GridChart& chart) {
  std::ostringstream os;
  os.precision(17);
  os << chart.dim << '|' << chart.fd_order;
  for (int a = 0; a < chart.dim; ++a)
    os << '|' << chart.res[a] << ',' << chart.spacing[a] << ','
       << (chart.periodic[a] ? 1 : 0);
  return os.str();
}
}  // namespace

const std::vector<AxisStencils>& chart_stencils(const GridChart& chart) {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  const std::string key = stencil_key(chart);
  auto it = g_cache.find(key);
  if (it != g_cache.end()) return it->second;
  std::vector<AxisStencils> v;
  v.reserve(static_cast<std::size_t>(chart.dim));
  for (int a = 0; a < chart.dim; ++a)
    v.push_back(AxisStencils::build(chart.res[a], chart.spacing[a], chart.fd_order, chart.periodic[a]));
  auto [ins, ok] = g_cache.emplace(key, std::move(v));
  (void)ok;
  return ins->second;
}

void derivative_sweep(const GridChart& chart, const double* in, double* out, int axis, int m) {
  if (axis < 0 || axis >= chart.dim) throw config_error("derivative_sweep: axis out of range");
  const AxisStencils& st = chart_stencils(chart)[static_cast<std::size_t>(axis)];
  const int res = chart.res[axis];
  const std::size_t stride = chart.stride[axis];
  const std::size_t n = chart.node_count;
  const std::size_t line = stride * static_cast<std::size_t>(res);  // block size along this axis

  for (std::size_t base = 0; base < n; base += line) {
    for (int i = 0; i < res; ++i) {
      const AxisStencils::Row& r = st.row(i);
      const std::vector<int>& off = (m == 1) ? r.off1 : r.off2;
      const std::vector<double>& w = (m == 1) ? r.w1 : r.w2;
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t idx = base + static_cast<std::size_t>(i) * stride + inner;
        double acc = 0.0;
        for (std::size_t q = 0; q < off.size(); ++q) {
          int j = i + off[q];
          if (chart.periodic[axis]) j = ((j % res) + res) % res;
          acc += w[q] * in[base + static_cast<std::size_t>(j) * stride + inner];
        }
        out[idx] = acc;
      }
    }
  }
}

}  // namespace curvfunc
