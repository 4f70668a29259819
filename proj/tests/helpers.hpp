#pragma once

#include <cmath>

#include "curvfunc/geometry.hpp"
#include "curvfunc/models.hpp"

namespace test_helpers {

inline curvfunc::MetricField flat_t2(int res = 24) {
  return curvfunc::flat_torus(2, {1.0, 1.0}, res).metric;
}

inline curvfunc::MetricField flat_t3(int res = 16) {
  return curvfunc::flat_torus(3, {1.0, 1.0, 1.0}, res).metric;
}

inline curvfunc::MetricField perturbed_t3(int res = 16, double amp = 0.05,
                                          std::uint64_t seed = 42) {
  return curvfunc::random_perturbation(curvfunc::flat_torus(3, {1.0, 1.0, 1.0}, res).metric,
                                       amp, 2, seed);
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace test_helpers
