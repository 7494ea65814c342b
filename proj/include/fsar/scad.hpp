#pragma once

#include "fsar/cmle.hpp"

#include <limits>
#include <vector>

namespace fsar {

struct ScadConfig {
  double a = 3.7;
  std::vector<double> lambda_grid;  // empty: data-driven log grid
  int n_lambda = 50;
  double lambda_min_ratio = 1e-3;
  double alpha = 2.0;  // sub-Weibull order in the BIC exponent
  int max_iter = 200;  // outer LLA iterations per lambda
  double tol = 1e-6;   // max parameter change
  int cd_max_sweeps = 1000;
  double cd_tol = 1e-10;
  RhoSearchOptions search;

  void validate() const;
};

double scad_derivative(double t, double lambda, double a);
double scad_penalty(double t, double lambda, double a);

/// |S| log(n) (log pq)^{2/alpha} / n.
double bic_penalty(Index support_size, Index n, Index p, Index q, double alpha);

struct ScadRecord {
  double lambda = 0.0;
  double rho_hat = 0.0;
  Vector beta_hat;  // full q-vector with exact zeros
  double sigma_hat = 0.0;
  double loglik = 0.0;     // unpenalized, at the penalized estimate
  double objective = 0.0;  // loglik - n sum p_lambda(|beta_k|)
  std::vector<int> support;
  double bic = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool failed = false;
};

double bic(const ScadRecord& rec, Index n, Index p, Index q, double alpha);

struct ScadStart {
  double rho = 0.0;
  Vector beta;
  double sigma = 1.0;
};

/// Sufficient statistics of one response shared by every lambda.
class ScadProblem {
 public:
  ScadProblem(const Vector& y, const Matrix& x, const SpatialWeights& w, const LogDet& logdet);

  Index n() const { return n_; }
  Index q() const { return q_; }
  /// Unpenalized log-likelihood at (rho, beta, sigma).
  double loglik(double rho, const Vector& beta, double sigma) const;
  double objective(double rho, const Vector& beta, double sigma, double lambda, double a) const;
  double rss(double rho, const Vector& beta) const;
  /// Exact (rho, sigma) maximizer for fixed beta.
  RhoSearchResult concentrate(const Vector& beta, const RhoSearchOptions& opts) const;
  /// Weighted-l1 coordinate descent on beta for fixed (rho, sigma).
  int coordinate_descent(Vector& beta, double rho, double sigma, const Vector& weights, int max_sweeps,
                         double tol) const;

  /// Unpenalized full-X CMLE and the all-zero fit.
  ScadStart unpenalized(const RhoSearchOptions& opts) const;
  ScadStart null_fit(const RhoSearchOptions& opts) const;
  /// Smallest lambda at which beta = 0 satisfies the KKT conditions.
  double lambda_max(const RhoSearchOptions& opts) const;

 private:
  Index n_, q_;
  const LogDet* logdet_;
  Matrix gram_;  // X'X
  Vector xy_, xwy_;
  double yy_, ywy_, wywy_;
};

/// LLA from `lla_init` (weights) with the solver warm-started at `warm`.
ScadRecord fit_scad(const ScadProblem& prob, double lambda, const ScadConfig& cfg, const ScadStart& lla_init,
                    const ScadStart& warm);
ScadRecord fit_scad(const Vector& y, const Matrix& x, const SpatialWeights& w, double lambda,
                    const ScadConfig& cfg = {});

struct ScadPath {
  std::vector<ScadRecord> records;
  Index selected = -1;
  double selected_lambda = 0.0;
  std::vector<int> selected_support;
  int monotonicity_violations = 0;  // steps where the support shrank as lambda fell
  int failures = 0;
};

std::vector<double> lambda_path(double lambda_max, const ScadConfig& cfg);

/// Whole path with warm starts from large to small lambda; BIC argmin with
/// ties broken toward the larger lambda. `p` enters only the BIC.
ScadPath select_support(const Vector& y, const Matrix& x, const SpatialWeights& w, Index p,
                        const ScadConfig& cfg = {}, const LogDet* logdet = nullptr);

std::vector<ScadPath> select_supports(const Matrix& y, const Matrix& x, const SpatialWeights& w,
                                      const ScadConfig& cfg = {}, int workers = 1);

}  // namespace fsar
