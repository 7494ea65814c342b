#pragma once

#include "fsar/spatial.hpp"

#include <functional>
#include <vector>

namespace fsar {

struct RhoSearchOptions {
  double rho_max = 0.99;
  int grid_points = 41;
  double tol = 1e-8;   // final bracket width
  int max_iter = 200;  // golden-section steps
};

struct RhoSearchResult {
  double rho = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool boundary_hit = false;
};

/// Evenly spaced grid on [-rho_max, rho_max].
std::vector<double> rho_grid(const RhoSearchOptions& opts);

/// Maximizes f(rho, log|S(rho)|) by a coarse grid followed by golden-section
/// refinement inside the bracket around the best grid point.
RhoSearchResult maximize_over_rho(const std::function<double(double, double)>& f, const LogDet& logdet,
                                  const RhoSearchOptions& opts = {});

}  // namespace fsar
