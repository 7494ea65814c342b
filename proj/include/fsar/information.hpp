#pragma once

#include "fsar/spatial.hpp"
#include "fsar/traces.hpp"

namespace fsar {

/// Least-squares helper for a fixed design R: Cholesky of R'R with the
/// near-singular ridge jitter, and the residual maker.
class Design {
 public:
  Design() = default;
  explicit Design(const Matrix& r);

  Index rows() const { return r_.rows(); }
  Index cols() const { return r_.cols(); }
  const Matrix& matrix() const { return r_; }
  const Matrix& gram() const { return gram_; }
  bool jittered() const { return jittered_; }

  Vector coef(const Eigen::Ref<const Vector>& y) const;
  Vector residual(const Eigen::Ref<const Vector>& y) const;

 private:
  Matrix r_;
  Matrix gram_;
  Eigen::LLT<Matrix> llt_;
  bool jittered_ = false;
};

/// Blocks of a SAR quasi-likelihood in parameter order (rho, gamma, tau),
/// each divided by n: sigma2 is the Gaussian information and delta the
/// third/fourth-moment correction, so that Var(score)/n = sigma2 + delta.
struct SarBlocks {
  Matrix sigma2;
  Matrix delta;
  double mu3 = 0.0;
  double kappa = 0.0;  // mu4 - 3 tau^2
};

/// `resid` = S(rho) y - R gamma.
SarBlocks sar_blocks(const SarTransform& s, const GStatistics& gs, const Matrix& r, const Vector& gamma, double tau,
                     const Vector& resid);

/// n x (k+2) matrix of node-wise score contributions; columns sum to the
/// full score of the quasi-likelihood. Rho column uses a symmetric split of
/// the off-diagonal quadratic form scaled to the correct variance.
Matrix node_scores(const SarTransform& s, const GStatistics& gs, const Matrix& r, const Vector& gamma, double tau,
                   const Vector& resid);

/// SAR quasi log-likelihood -(n/2) log tau + log|S| - |S y - R gamma|^2 / (2 tau).
double sar_loglik(double rho, const Vector& gamma, double tau, const Vector& y, const Matrix& r,
                  const SpatialWeights& w);

/// Sandwich A^{-1} (A + D) A^{-1} / n, symmetrized.
Matrix sandwich(const Matrix& a, const Matrix& middle, Index n);

}  // namespace fsar
