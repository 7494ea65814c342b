#include "fsar/dgp.hpp"
#include "fsar/harness.hpp"
#include "fsar/io.hpp"
#include "fsar/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <string>

#include <unistd.h>

using namespace fsar;
namespace fs = std::filesystem;

namespace {

SimulatedData sample(Index n, Index p, Index d, std::uint64_t seed, Index q = 5) {
  DgpConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.q = q;
  cfg.d = d;
  cfg.seed = seed;
  return simulate(cfg);
}

}  // namespace

TEST_CASE("stage sets") {
  CHECK(StageSet::parse("scad,cmle,factor,fmle").to_string() == "scad,cmle,factor,fmle");
  CHECK(StageSet::parse("CMLE").to_string() == "cmle");
  CHECK(StageSet::parse("cmle, factor").to_string() == "cmle,factor");
  CHECK_THROWS_AS(StageSet::parse("scad,factor"), std::invalid_argument);
  CHECK_THROWS_AS(StageSet::parse("factor,fmle"), std::invalid_argument);
  CHECK_THROWS_AS(StageSet::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(StageSet::parse("cmle,gmm"), std::invalid_argument);
}

TEST_CASE("cmle-only runs emit no factor output") {
  const SimulatedData s = sample(200, 6, 1, 1);
  PipelineConfig cfg;
  cfg.stages = StageSet::parse("cmle");
  const PipelineResult r = fit_pipeline(s.Y, s.X, s.W, cfg, &s.truth.supports);
  CHECK(r.cmle.size() == 6u);
  CHECK_FALSE(r.has_factors);
  CHECK(r.fmle.empty());
  CHECK(r.estimation_nodes.size() == 200u);
  CHECK(r.supports == s.truth.supports);
}

TEST_CASE("random partition keeps the holdout out of estimation") {
  const SimulatedData s = sample(300, 12, 2, 2);
  PipelineConfig cfg;
  cfg.stages = StageSet::parse("cmle,factor,fmle");
  cfg.d_max = 3;
  const PipelineResult r = fit_pipeline(s.Y, s.X, s.W, cfg, &s.truth.supports);
  CHECK(r.estimation_nodes == r.projection.main);
  CHECK(r.estimation_nodes.size() == 270u);
  CHECK(r.factors.Zhat.rows() == 270);
  CHECK(r.factors.Zhat.cols() == 3);
  CHECK(r.fmle.size() == 12u);
  for (const auto& f : r.fmle) CHECK(f.has_covariance);
}

TEST_CASE("automatic factor count") {
  const SimulatedData s = sample(600, 40, 2, 3);
  PipelineConfig cfg;
  cfg.stages = StageSet::parse("cmle,factor,fmle");
  cfg.d_max = 0;
  cfg.fmle_covariance = false;
  const PipelineResult r = fit_pipeline(s.Y, s.X, s.W, cfg, &s.truth.supports);
  CHECK(r.projection.d_max == 2);
  CHECK(r.selected_factors == 2);
}

TEST_CASE("results do not depend on the worker count") {
  const SimulatedData s = sample(250, 8, 2, 4);
  PipelineConfig cfg;
  cfg.d_max = 3;
  cfg.scad.n_lambda = 15;
  PipelineConfig par = cfg;
  par.workers = 3;
  const PipelineResult a = fit_pipeline(s.Y, s.X, s.W, cfg);
  const PipelineResult b = fit_pipeline(s.Y, s.X, s.W, par);
  CHECK(a.supports == b.supports);
  for (std::size_t j = 0; j < a.fmle.size(); ++j) {
    CHECK(a.fmle[j].rho_hat == b.fmle[j].rho_hat);
    CHECK(a.fmle[j].se_rho == b.fmle[j].se_rho);
  }
}

TEST_CASE("simulate, persist, ingest and fit reproduce the in-memory fit") {
  const SimulatedData s = sample(200, 6, 1, 5);
  Dataset d;
  d.Y = s.Y;
  d.X = s.X;
  for (Index j = 0; j < s.Y.cols(); ++j) d.y_names.push_back("y" + std::to_string(j));
  for (Index k = 0; k < s.X.cols(); ++k) d.x_names.push_back("x" + std::to_string(k));
  d.adjacency = s.adjacency;
  d.W = s.W;
  const fs::path dir = fs::temp_directory_path() / ("fsar_pipe_" + std::to_string(::getpid()));
  const Dataset back = ingest(persist(d, dir.string()));
  fs::remove_all(dir);
  CHECK(back.Y == s.Y);
  CHECK(back.X == s.X);

  PipelineConfig cfg;
  cfg.d_max = 2;
  cfg.scad.n_lambda = 15;
  const PipelineResult a = fit_pipeline(s.Y, s.X, s.W, cfg);
  const PipelineResult b = fit_pipeline(back.Y, back.X, back.W, cfg);
  CHECK(a.supports == b.supports);
  REQUIRE(a.fmle.size() == b.fmle.size());
  for (std::size_t j = 0; j < a.fmle.size(); ++j) {
    CHECK(a.cmle[j].rho_hat == b.cmle[j].rho_hat);
    CHECK(a.fmle[j].rho_hat == b.fmle[j].rho_hat);
    CHECK(a.fmle[j].se_rho == b.fmle[j].se_rho);
  }
}

TEST_CASE("stage failures name the stage") {
  const SimulatedData s = sample(40, 6, 1, 6);
  PipelineConfig cfg;
  cfg.stages = StageSet::parse("cmle,factor,fmle");
  cfg.d_max = 3;
  std::string msg;
  try {
    fit_pipeline(s.Y, s.X, s.W, cfg, &s.truth.supports);
  } catch (const DataError& e) {
    msg = e.what();
  }
  CHECK(msg.rfind("stage factor:", 0) == 0);

  Matrix bad = s.Y;
  bad(3, 2) = NAN;
  CHECK_THROWS_AS(fit_pipeline(bad, s.X, s.W, cfg, &s.truth.supports), DataError);
  std::vector<std::vector<int>> wrong(6, std::vector<int>{7});
  CHECK_THROWS_AS(fit_pipeline(s.Y, s.X, s.W, cfg, &wrong), std::invalid_argument);
}

TEST_CASE("diagnose a one-factor dataset") {
  const SimulatedData s = sample(500, 20, 1, 7);
  const Diagnostics d = diagnose(s.Y, s.X, s.W, &s.truth.supports);
  CHECK(d.eigenvalues.size() == 20);  // p < 30: all of them
  CHECK(d.ratios.size() == 19);
  CHECK(d.selected_factors == 1);
  Index arg = 0;
  d.ratios.maxCoeff(&arg);
  CHECK(arg == 0);
  CHECK_FALSE(d.loadings.weak);
  CHECK(d.rho.size() == 20u);
  CHECK(d.norm_inf == doctest::Approx(1.0));
  CHECK(d.norm_1 >= 1.0);
}

TEST_CASE("real-data protocol replica: FMLE standard errors are smaller") {
  const SimulatedData s = sample(287, 50, 1, 8);
  PipelineConfig cfg;
  cfg.d_max = 0;
  cfg.cmle_covariance = true;
  cfg.scad.n_lambda = 20;
  const PipelineResult r = fit_pipeline(s.Y, s.X, s.W, cfg);
  REQUIRE(r.fmle.size() == 50u);
  REQUIRE(r.cmle_se.size() == 50u);
  std::vector<double> se_c(r.cmle_se.begin(), r.cmle_se.end()), se_f;
  for (const auto& f : r.fmle) se_f.push_back(f.se_rho);
  const double mc = quantile(se_c, 0.5), mf = quantile(se_f, 0.5);
  MESSAGE("median SE cmle " << mc << ", fmle " << mf << ", factors " << r.projection.d_max);
  CHECK(mf < mc);
}
