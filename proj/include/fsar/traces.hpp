#pragma once

#include "fsar/spatial.hpp"

#include <cstdint>

namespace fsar {

struct TraceOptions {
  Index dense_limit = 400;  // exact dense G up to this size
  int probes = 16;          // Rademacher probes for tr(G'G) above it
  std::uint64_t seed = 0x5eedf00d;
};

/// Trace and diagonal summaries of G = W S(rho)^{-1}.
struct GStatistics {
  double rho = 0.0;
  double tr_g = 0.0;
  double tr_g2 = 0.0;
  double tr_gtg = 0.0;
  Vector diag;
  bool exact = false;  // false when tr(G'G) is a stochastic estimate
};

GStatistics g_statistics(const SarTransform& s, const TraceOptions& opts = {});

/// Dense G for small oracle checks.
Matrix dense_g(const SpatialWeights& w, double rho);

/// diag(G) from the cached power diagonals, with the trace of the truncated
/// tail spread evenly over nodes. Requires the spectral route.
Vector diag_g_series(const SpatialWeights& w, double rho);

}  // namespace fsar
