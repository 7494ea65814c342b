#include "fsar/dgp.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>

using namespace fsar;

namespace {

DgpConfig small(Index n = 300, Index p = 8) {
  DgpConfig c;
  c.n = n;
  c.p = p;
  c.q = 10;
  c.d = 2;
  c.seed = 4;
  c.truth_seed = 9;
  return c;
}

double sample_var(const Vector& v) {
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("default model sizes") {
  CHECK(default_sparsity(5) == 2);
  CHECK(default_sparsity(10) == 5);
  CHECK(default_sparsity(20) == 10);
  DgpConfig c;
  c.q = 20;
  CHECK(c.model_size() == 10);
  c.sparsity = 0;
  CHECK(c.model_size() == 0);
}

TEST_CASE("config validation") {
  DgpConfig c = small();
  c.p = c.d;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small();
  c.rho_range = {0.2, 1.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small();
  c.tau_range = {0.0, 0.2};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small();
  c.sparsity = 11;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("truth ranges and supports") {
  DgpConfig c = small(300, 40);
  const GroundTruth t = draw_truth(c);
  for (Index j = 0; j < c.p; ++j) {
    CHECK(t.rho(j) >= 0.2);
    CHECK(t.rho(j) <= 0.9);
    CHECK(t.tau(j) >= 0.1);
    CHECK(t.tau(j) <= 0.2);
    std::vector<int> nz;
    for (Index h = 0; h < c.q; ++h)
      if (t.beta(j, h) != 0.0) {
        nz.push_back(static_cast<int>(h));
        CHECK(t.beta(j, h) >= 0.5);
        CHECK(t.beta(j, h) <= 1.0);
      }
    CHECK(nz == t.supports[j]);
    CHECK(nz.size() == 5u);
  }
  // component j depends only on (truth_seed, j)
  DgpConfig wider = c;
  wider.p = 60;
  const GroundTruth t2 = draw_truth(wider);
  CHECK(t2.rho.head(40) == t.rho);
  CHECK(t2.B.topRows(40) == t.B);
}

TEST_CASE("reduced-form identity") {
  const DgpConfig c = small();
  const SimulatedData s = simulate(c);
  const Matrix omega = draw_noise(c, s.truth.tau);
  for (Index j = 0; j < c.p; ++j) {
    const Vector rhs = s.X * s.truth.beta.row(j).transpose() + s.Z * s.truth.B.row(j).transpose() + omega.col(j);
    CHECK((apply_s(s.W, s.truth.rho(j), s.Y.col(j)) - rhs).norm() <= 1e-8 * rhs.norm());
  }
}

TEST_CASE("noiseless reduced form") {
  DgpConfig c = small();
  GroundTruth t = draw_truth(c);
  t.tau.setZero();
  t.B.setZero();
  const SimulatedData s = simulate(c, t);
  for (Index j = 0; j < c.p; ++j) {
    const Vector r = apply_s(s.W, t.rho(j), s.Y.col(j)) - s.X * t.beta.row(j).transpose();
    CHECK(r.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("no spatial or factor structure reduces to regressions") {
  DgpConfig c = small(2000, 4);
  GroundTruth t = draw_truth(c);
  t.rho.setZero();
  t.B.setZero();
  const SimulatedData s = simulate(c, t);
  const Eigen::ColPivHouseholderQR<Matrix> qr(s.X);
  const Matrix xtx_inv = (s.X.transpose() * s.X).inverse();
  for (Index j = 0; j < c.p; ++j) {
    const Vector b = qr.solve(s.Y.col(j));
    const double s2 = (s.Y.col(j) - s.X * b).squaredNorm() / static_cast<double>(c.n - c.q);
    for (Index h = 0; h < c.q; ++h) CHECK(std::abs(b(h) - t.beta(j, h)) <= 3.0 * std::sqrt(s2 * xtx_inv(h, h)));
  }
}

TEST_CASE("error variance is |b|^2 + tau") {
  DgpConfig c = small(5000, 6);
  const SimulatedData s = simulate(c);
  const Matrix omega = draw_noise(c, s.truth.tau);
  for (Index j = 0; j < c.p; ++j) {
    const Vector eps = s.Z * s.truth.B.row(j).transpose() + omega.col(j);
    const double target = s.truth.B.row(j).squaredNorm() + s.truth.tau(j);
    const double band = 3.0 * target * std::sqrt(2.0 / static_cast<double>(c.n));
    CHECK(std::abs(sample_var(eps) - target) <= band);
  }
}

TEST_CASE("sub-Weibull noise keeps the variance") {
  DgpConfig c = small(20000, 3);
  c.noise = NoiseKind::sub_weibull;
  c.weibull_shape = 1.0;
  Vector tau(3);
  tau << 0.1, 0.15, 0.2;
  const Matrix omega = draw_noise(c, tau);
  for (Index j = 0; j < 3; ++j) {
    CHECK(std::abs(omega.col(j).mean()) < 4.0 * std::sqrt(tau(j) / c.n));
    CHECK(std::abs(sample_var(omega.col(j)) - tau(j)) < 0.05 * tau(j));
  }
}

TEST_CASE("simulation is deterministic per seed") {
  const DgpConfig c = small();
  const SimulatedData a = simulate(c), b = simulate(c);
  CHECK(a.Y == b.Y);
  CHECK(a.X == b.X);
  CHECK(a.Z == b.Z);
  DgpConfig d = c;
  d.seed = 5;
  CHECK(simulate(d).Y != a.Y);
}
