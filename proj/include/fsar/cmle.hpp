#pragma once

#include "fsar/information.hpp"
#include "fsar/optimize.hpp"
#include "fsar/spatial.hpp"

#include <vector>

namespace fsar {

struct CmleOptions {
  RhoSearchOptions search;
  TraceOptions traces;
  double sigma_floor = 1e-300;
};

/// theta_j = (rho, beta, sigma) for one response column.
struct ComponentEstimate {
  double rho_hat = 0.0;
  Vector beta_hat;
  double sigma_hat = 0.0;
  double loglik = 0.0;
  std::vector<int> support;  // columns of the full X used as X_(j)
  int iterations = 0;
  bool converged = false;
  bool boundary_hit = false;
  bool jittered = false;
};

struct Profile {
  Vector beta;
  double sigma = 0.0;
};

double cmle_loglik(double rho, const Vector& beta, double sigma, const Vector& y, const Matrix& x,
                   const SpatialWeights& w);

/// Exact maximizers of the likelihood in (beta, sigma) for fixed rho.
Profile profile_beta_sigma(double rho, const Vector& y, const Matrix& x, const SpatialWeights& w);

/// Concentrated log-likelihood -(n/2) log sigma(rho) + log|S(rho)| as a
/// quadratic in rho, built from the residuals of y and Wy on the design.
class ConcentratedProfile {
 public:
  ConcentratedProfile(const Vector& y, const Vector& wy, const Design& design, double sigma_floor = 1e-300);
  double rss(double rho) const;
  double value(double rho, double logdet) const;

 private:
  double n_;
  double floor_;
  double e00_, e01_, e11_;
};

ComponentEstimate fit_component(const Vector& y, const Matrix& x, const SpatialWeights& w,
                                const CmleOptions& opts = {}, const LogDet* logdet = nullptr);

/// Columns of Y fitted independently on their supports; `workers` threads.
std::vector<ComponentEstimate> fit_components(const Matrix& y, const Matrix& x,
                                              const std::vector<std::vector<int>>& supports,
                                              const SpatialWeights& w, const CmleOptions& opts = {},
                                              int workers = 1);

/// Column j: S(rho_j) Y_j - X_(j) beta_j.
Matrix residuals(const std::vector<ComponentEstimate>& est, const Matrix& y, const Matrix& x,
                 const SpatialWeights& w);

/// Sandwich covariance of (rho, beta, sigma) and the per-n blocks it uses.
struct CmleCovariance {
  Matrix information;  // A
  Matrix delta;
  Matrix covariance;   // A^{-1}(A + delta)A^{-1}/n
  double se_rho = 0.0;
};

CmleCovariance cmle_covariance(const ComponentEstimate& est, const Vector& y, const Matrix& x,
                               const SpatialWeights& w, const TraceOptions& traces = {});

}  // namespace fsar
