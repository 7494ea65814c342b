#pragma once

#include "fsar/cmle.hpp"

#include <vector>

namespace fsar {

struct FmleOptions {
  RhoSearchOptions search;
  TraceOptions traces;
  double tau_floor = 1e-8;
  double disagreement_tol = 0.10;  // analytic vs numeric SE(rho)
};

struct SandwichBlocks {
  Matrix sigma2;
  Matrix delta;
  Matrix sigma_q;
};

/// Observed-information check of the analytic sandwich.
struct NumericSandwich {
  Matrix hessian;     // -d^2 loglik / n at the estimate
  Matrix opg;         // mean outer product of node scores
  Matrix covariance;  // H^{-1}(opg + sigma_q)H^{-1}/n
  double se_rho = 0.0;
};

/// Theta_j = (rho, beta, btilde, tau); parameter order in all matrices.
struct AugmentedEstimate {
  double rho_hat = 0.0;
  Vector beta_hat;
  Vector btilde_hat;
  double tau_hat = 0.0;
  double loglik = 0.0;
  std::vector<int> support;
  int iterations = 0;
  bool converged = false;
  bool boundary_hit = false;
  bool jittered = false;

  SandwichBlocks blocks;
  Matrix covariance;  // g x g, divided by n
  double se_rho = 0.0;
  double se_rho_numeric = 0.0;
  bool se_disagreement = false;
  bool has_covariance = false;

  Index dim() const { return 2 + beta_hat.size() + btilde_hat.size(); }
  double ci_low(double z = 1.959963984540054) const { return rho_hat - z * se_rho; }
  double ci_high(double z = 1.959963984540054) const { return rho_hat + z * se_rho; }
};

double loglik_fmle(double rho, const Vector& beta, const Vector& btilde, double tau, const Vector& y,
                   const Matrix& x, const Matrix& zhat, const SpatialWeights& w);

/// Point estimate: concentrated over rho with (beta, btilde, tau) profiled
/// by regressing S(rho) y on [X_(j), Zhat]. All-zero Zhat columns get a zero
/// coefficient and are left out of the regression.
AugmentedEstimate fit_fmle(const Vector& y, const Matrix& x, const Matrix& zhat, const SpatialWeights& w,
                           const FmleOptions& opts = {}, const LogDet* logdet = nullptr);

/// Shared pieces of the factor-estimation error term: the CMLE influence
/// functions of every component, the stacked regressors [WY_k, X_(k)] and
/// the projected FMLE residuals Omega M / p.
class FactorErrorModel {
 public:
  FactorErrorModel(const Matrix& y, const Matrix& x, const SpatialWeights& w,
                   const std::vector<ComponentEstimate>& cmle, const Matrix& m, const Matrix& fmle_residuals,
                   const TraceOptions& traces = {}, int workers = 1);

  /// Sigma_Q for component j with design [X_(j), Zhat] (kept columns only).
  Matrix sigma_q(const Vector& wy, const Matrix& xj, const Matrix& zhat, const std::vector<int>& kept,
                 const Vector& btilde, double tau, const Vector& resid) const;

 private:
  Matrix f_;  // n x K
  Matrix u_;  // n x K
  std::vector<Index> offset_;
  std::vector<Index> width_;
  Matrix m_;
  Matrix omega_m_;  // n x d_max
};

/// Fills blocks, covariance and SEs; `model` may be null (Sigma_Q = 0).
void sandwich_covariance(AugmentedEstimate& est, const Vector& y, const Matrix& x, const Matrix& zhat,
                         const SpatialWeights& w, const FactorErrorModel* model, const FmleOptions& opts = {});

NumericSandwich numeric_sandwich(const AugmentedEstimate& est, const Vector& y, const Matrix& x,
                                 const Matrix& zhat, const SpatialWeights& w, const Matrix& sigma_q,
                                 const TraceOptions& traces = {});

/// Column j: S(rho_j) Y_j - X_(j) beta_j - Zhat btilde_j.
Matrix fmle_residuals(const std::vector<AugmentedEstimate>& est, const Matrix& y, const Matrix& x,
                      const Matrix& zhat, const SpatialWeights& w);

/// All components: point estimates, then the sandwich with Sigma_Q built
/// from the CMLE fits `cmle` and projection M.
std::vector<AugmentedEstimate> fit_fmle_all(const Matrix& y, const Matrix& x,
                                            const std::vector<std::vector<int>>& supports, const Matrix& zhat,
                                            const SpatialWeights& w, const std::vector<ComponentEstimate>& cmle,
                                            const Matrix& m, const FmleOptions& opts = {}, int workers = 1,
                                            bool with_covariance = true);

}  // namespace fsar
