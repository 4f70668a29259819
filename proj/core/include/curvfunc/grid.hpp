#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace curvfunc {

inline constexpr int kMaxDim = 5;

/// Uniform structured grid over a torus (all axes periodic) or a single
/// coordinate chart (some axes bounded, cell-centered, with an excision
/// mask near the chart boundary).
///
/// Quadrature is trapezoidal on periodic axes and midpoint on bounded
/// axes; bounded axes may carry a per-axis weight factor so that model
/// constructors can make the quadrature of their volume density exact
/// (see models.cpp).
struct GridChart {
  int dim = 0;
  std::array<int, kMaxDim> res{};
  std::array<double, kMaxDim> extent{};     // period (periodic) or box length
  std::array<double, kMaxDim> origin{};     // coordinate of the first node line
  std::array<double, kMaxDim> spacing{};
  std::array<bool, kMaxDim> periodic{};
  std::array<double, kMaxDim> quad_scale{}; // multiplies spacing in quadrature
  std::array<std::size_t, kMaxDim> stride{};
  std::size_t node_count = 0;
  int fd_order = 4;                         // 2, 4 or 6

  /// Node mask for error norms and chart-renormalized integrals.
  /// Empty means every node is included.
  std::vector<std::uint8_t> mask;

  double coord(int axis, int index) const {
    return origin[axis] + spacing[axis] * static_cast<double>(index);
  }

  std::size_t index(const std::array<int, kMaxDim>& ix) const {
    std::size_t k = 0;
    for (int a = 0; a < dim; ++a) k += stride[a] * static_cast<std::size_t>(ix[a]);
    return k;
  }

  void unravel(std::size_t idx, std::array<int, kMaxDim>& ix) const {
    for (int a = 0; a < dim; ++a) {
      ix[a] = static_cast<int>(idx % static_cast<std::size_t>(res[a]));
      idx /= static_cast<std::size_t>(res[a]);
    }
  }

  /// Product of per-axis quadrature weights (node-independent part).
  double cell_weight() const {
    double w = 1.0;
    for (int a = 0; a < dim; ++a) w *= spacing[a] * quad_scale[a];
    return w;
  }

  bool included(std::size_t idx) const { return mask.empty() || mask[idx] != 0; }

  bool same_as(const GridChart& other) const { return this == &other; }
};

using ChartPtr = std::shared_ptr<const GridChart>;

/// Periodic grid for torus topology. n in {2,3,4}, resolution even and >= 16,
/// all periods positive. Throws config_error otherwise.
ChartPtr build_torus_grid(int n, int resolution, const std::vector<double>& periods);

/// As build_torus_grid but with per-axis resolutions.
ChartPtr build_torus_grid(int n, const std::vector<int>& resolution,
                          const std::vector<double>& periods);

/// Bounded/periodic mixed chart for closed-form models. Cell-centered on
/// bounded axes. mask_margin excludes that many node layers next to each
/// bounded-axis edge from comparison norms. Dimensions up to kMaxDim are
/// accepted (product charts need 5).
ChartPtr build_chart(int n, const std::vector<int>& resolution,
                     const std::vector<double>& lengths,
                     const std::vector<bool>& periodic_axis,
                     int fd_order = 4, int mask_margin = 0);

}  // namespace curvfunc
