#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvfunc/metric.hpp"

namespace curvfunc {

/// Closed-form metric family instance together with its analytic oracle data.
struct ModelMetric {
  std::string family;
  MetricField metric;
  double oracle_scalar = 0.0;   // exact (constant) scalar curvature
  double oracle_volume = 0.0;
  bool einstein = false;
  bool scalar_flat = false;
};

ModelMetric flat_torus(int n, const std::vector<double>& periods, int resolution,
                       int fd_order = 4);

/// Latitude-longitude chart of the round n-sphere, n in {2,3}. Bounded
/// polar axes are cell-centered with exact-mass quadrature weights, and a
/// pole-excision mask two stencil widths wide.
ModelMetric round_sphere_chart(int n, double radius, int resolution, int fd_order = 4);

/// S^p(r1) x S^q(r2) product chart, p,q in {2,3}, p+q <= 5.
ModelMetric product_spheres(int p, double r1, int q, double r2, int resolution,
                            int fd_order = 4);

/// e^{2f} g.
MetricField conformal_deform(const MetricField& g, const ScalarField& f);

/// g plus a seeded band-limited symmetric perturbation (periodic grids only).
MetricField random_perturbation(const MetricField& g, double amplitude,
                                int max_frequency, std::uint64_t seed);

// Seeded band-limited fields on periodic grids, normalized to the given
// max amplitude. Bit-deterministic for a fixed seed.
ScalarField random_scalar(const ChartPtr& chart, double amplitude, int max_frequency,
                          std::uint64_t seed);
VectorField random_vector(const ChartPtr& chart, double amplitude, int max_frequency,
                          std::uint64_t seed);
SymTensorField random_sym_tensor(const ChartPtr& chart, double amplitude,
                                 int max_frequency, std::uint64_t seed);

}  // namespace curvfunc
