#include "fsar/optimize.hpp"

#include <cmath>
#include <limits>

namespace fsar {

std::vector<double> rho_grid(const RhoSearchOptions& opts) {
  if (!(opts.rho_max > 0.0 && opts.rho_max < 1.0)) throw std::invalid_argument("rho_max must lie in (0, 1)");
  if (opts.grid_points < 3) throw std::invalid_argument("rho grid needs at least 3 points");
  std::vector<double> g(static_cast<std::size_t>(opts.grid_points));
  const double step = 2.0 * opts.rho_max / (opts.grid_points - 1);
  for (int k = 0; k < opts.grid_points; ++k) g[k] = -opts.rho_max + step * k;
  g.back() = opts.rho_max;
  return g;
}

RhoSearchResult maximize_over_rho(const std::function<double(double, double)>& f, const LogDet& logdet,
                                  const RhoSearchOptions& opts) {
  const std::vector<double> grid = rho_grid(opts);
  const std::vector<double>& ld = logdet.on_grid(grid);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = f(grid[k], ld[k]);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  RhoSearchResult res;
  if (!std::isfinite(best_val)) {
    res.rho = nan;
    res.value = nan;
    return res;
  }

  auto eval = [&](double r) {
    const double v = f(r, logdet(r));
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };

  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[best + 1 == grid.size() ? best : best + 1];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  int it = 0;
  while (b - a > opts.tol && it < opts.max_iter) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = eval(x2);
    }
    ++it;
  }
  res.iterations = it;
  res.converged = b - a <= opts.tol;

  double r = f1 >= f2 ? x1 : x2;
  double v = std::max(f1, f2);
  // the bracket ends themselves are candidates (monotone objective)
  for (double e : {a, b}) {
    const double fe = eval(e);
    if (fe > v) {
      v = fe;
      r = e;
    }
  }
  if (best_val > v) {
    v = best_val;
    r = grid[best];
  }
  res.rho = r;
  res.value = v;
  res.boundary_hit = std::abs(r) >= opts.rho_max - 1e-6;
  return res;
}

}  // namespace fsar
