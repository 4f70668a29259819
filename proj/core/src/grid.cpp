#include "curvfunc/grid.hpp"

#include <string>

#include "curvfunc/errors.hpp"

namespace curvfunc {

namespace {

std::shared_ptr<GridChart> make_base(int n, const std::vector<int>& res,
                                     const std::vector<double>& lengths) {
  if (static_cast<int>(res.size()) != n || static_cast<int>(lengths.size()) != n)
    throw config_error("grid: resolution/extent arity does not match dimension");
  auto g = std::make_shared<GridChart>();
  g->dim = n;
  std::size_t count = 1;
  for (int a = 0; a < n; ++a) {
    if (lengths[a] <= 0.0) throw config_error("grid: nonpositive extent on axis " + std::to_string(a));
    g->res[a] = res[a];
    g->extent[a] = lengths[a];
    g->spacing[a] = lengths[a] / static_cast<double>(res[a]);
    g->quad_scale[a] = 1.0;
    g->stride[a] = count;
    count *= static_cast<std::size_t>(res[a]);
  }
  g->node_count = count;
  return g;
}

}  // namespace

ChartPtr build_torus_grid(int n, const std::vector<int>& resolution,
                          const std::vector<double>& periods) {
  if (n < 2 || n > 4) throw config_error("torus grid: dimension must be 2, 3 or 4");
  for (int r : resolution) {
    if (r < 16) throw config_error("torus grid: resolution below 16");
    if (r % 2 != 0) throw config_error("torus grid: resolution must be even");
  }
  auto g = make_base(n, resolution, periods);
  for (int a = 0; a < n; ++a) {
    g->periodic[a] = true;
    g->origin[a] = 0.0;
  }
  return g;
}

ChartPtr build_torus_grid(int n, int resolution, const std::vector<double>& periods) {
  return build_torus_grid(n, std::vector<int>(static_cast<std::size_t>(n), resolution), periods);
}

ChartPtr build_chart(int n, const std::vector<int>& resolution,
                     const std::vector<double>& lengths,
                     const std::vector<bool>& periodic_axis,
                     int fd_order, int mask_margin) {
  if (n < 2 || n > kMaxDim) throw config_error("chart: dimension out of range");
  if (fd_order != 2 && fd_order != 4 && fd_order != 6)
    throw config_error("chart: finite-difference order must be 2, 4 or 6");
  for (int r : resolution)
    if (r < 8) throw config_error("chart: resolution below 8");
  auto g = make_base(n, resolution, lengths);
  g->fd_order = fd_order;
  for (int a = 0; a < n; ++a) {
    g->periodic[a] = periodic_axis[a];
    // Bounded axes are cell-centered so that chart poles fall on cell edges.
    g->origin[a] = periodic_axis[a] ? 0.0 : 0.5 * g->spacing[a];
  }
  bool any_bounded = false;
  for (int a = 0; a < n; ++a) any_bounded |= !periodic_axis[a];
  if (any_bounded && mask_margin > 0) {
    g->mask.assign(g->node_count, 1);
    std::array<int, kMaxDim> ix{};
    for (std::size_t i = 0; i < g->node_count; ++i) {
      g->unravel(i, ix);
      for (int a = 0; a < n; ++a) {
        if (g->periodic[a]) continue;
        if (ix[a] < mask_margin || ix[a] >= g->res[a] - mask_margin) {
          g->mask[i] = 0;
          break;
        }
      }
    }
  }
  return g;
}

}  // namespace curvfunc
