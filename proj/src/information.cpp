#include "fsar/information.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace fsar {

Design::Design(const Matrix& r) : r_(r) {
  const Index k = r.cols();
  gram_ = r.transpose() * r;
  if (k == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram_, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || !std::isfinite(lmax) || lmin <= 1e-14 * lmax) {
    std::ostringstream os;
    os << "singular design (" << k << " columns, eigenvalue range [" << lmin << ", " << lmax << "])";
    throw DataError(os.str());
  }
  Matrix g = gram_;
  if (lmin < 1e-10 * lmax) {
    g.diagonal().array() += 1e-10 * lmax;
    jittered_ = true;
  }
  llt_.compute(g);
  if (llt_.info() != Eigen::Success) throw DataError("design Gram matrix is not positive definite");
}

Vector Design::coef(const Eigen::Ref<const Vector>& y) const {
  if (r_.cols() == 0) return Vector(0);
  return llt_.solve(r_.transpose() * y);
}

Vector Design::residual(const Eigen::Ref<const Vector>& y) const {
  if (r_.cols() == 0) return y;
  return y - r_ * coef(y);
}

SarBlocks sar_blocks(const SarTransform& s, const GStatistics& gs, const Matrix& r, const Vector& gamma, double tau,
                     const Vector& resid) {
  const Index n = r.rows();
  const Index k = r.cols();
  const double nn = static_cast<double>(n);
  const Vector grg = k > 0 ? s.g(r * gamma) : Vector::Zero(n);
  SarBlocks out;

  Matrix& a = out.sigma2;
  a = Matrix::Zero(k + 2, k + 2);
  a(0, 0) = (gs.tr_gtg + gs.tr_g2) / nn + grg.squaredNorm() / (nn * tau);
  if (k > 0) {
    const Vector rg = r.transpose() * grg / (nn * tau);
    a.block(1, 0, k, 1) = rg;
    a.block(0, 1, 1, k) = rg.transpose();
    a.block(1, 1, k, k) = r.transpose() * r / (nn * tau);
  }
  a(0, k + 1) = a(k + 1, 0) = gs.tr_g / (nn * tau);
  a(k + 1, k + 1) = 1.0 / (2.0 * tau * tau);

  const double mu3 = resid.array().cube().mean();
  const double mu4 = resid.array().square().square().mean();
  const double kappa = mu4 - 3.0 * tau * tau;
  out.mu3 = mu3;
  out.kappa = kappa;

  Matrix& d = out.delta;
  d = Matrix::Zero(k + 2, k + 2);
  const Vector& gd = gs.diag;
  const double t2 = tau * tau;
  const double t3 = t2 * tau;
  d(0, 0) = (kappa * gd.squaredNorm() + 2.0 * mu3 * gd.dot(grg)) / (nn * t2);
  if (k > 0) {
    const Vector rg = mu3 * (r.transpose() * gd) / (nn * t2);
    d.block(1, 0, k, 1) = rg;
    d.block(0, 1, 1, k) = rg.transpose();
    const Vector rt = mu3 * r.colwise().sum().transpose() / (2.0 * nn * t3);
    d.block(1, k + 1, k, 1) = rt;
    d.block(k + 1, 1, 1, k) = rt.transpose();
  }
  d(0, k + 1) = d(k + 1, 0) = (kappa * gs.tr_g + mu3 * grg.sum()) / (2.0 * nn * t3);
  d(k + 1, k + 1) = kappa / (4.0 * t2 * t2);
  return out;
}

Matrix node_scores(const SarTransform& s, const GStatistics& gs, const Matrix& r, const Vector& gamma, double tau,
                   const Vector& resid) {
  const Index n = r.rows();
  const Index k = r.cols();
  const Vector grg = k > 0 ? s.g(r * gamma) : Vector::Zero(n);
  const Vector ge = s.g(resid);
  const Vector gte = s.g_transpose(resid);
  const Vector off = ge + gte - 2.0 * gs.diag.cwiseProduct(resid);
  const Vector e2 = resid.array().square().matrix() - Vector::Constant(n, tau);

  Matrix out(n, k + 2);
  out.col(0) = (resid.cwiseProduct(grg) + gs.diag.cwiseProduct(e2) + resid.cwiseProduct(off) / std::sqrt(2.0)) / tau;
  for (Index c = 0; c < k; ++c) out.col(1 + c) = r.col(c).cwiseProduct(resid) / tau;
  out.col(k + 1) = e2 / (2.0 * tau * tau);
  return out;
}

double sar_loglik(double rho, const Vector& gamma, double tau, const Vector& y, const Matrix& r,
                  const SpatialWeights& w) {
  if (!(tau > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(y.size());
  Vector e = apply_s(w, rho, y);
  if (r.cols() > 0) e -= r * gamma;
  return -0.5 * n * std::log(tau) + log_det_s(w, rho) - e.squaredNorm() / (2.0 * tau);
}

Matrix sandwich(const Matrix& a, const Matrix& middle, Index n) {
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw EstimationError("information matrix is singular");
  const Matrix ai = lu.inverse();
  Matrix c = ai * middle * ai.transpose() / static_cast<double>(n);
  return 0.5 * (c + c.transpose());
}

}  // namespace fsar
