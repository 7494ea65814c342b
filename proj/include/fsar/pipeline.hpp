#pragma once

#include "fsar/cmle.hpp"
#include "fsar/factor.hpp"
#include "fsar/fmle.hpp"
#include "fsar/scad.hpp"

#include <map>
#include <string>
#include <vector>

namespace fsar {

/// Stages in pipeline order scad -> cmle -> factor -> fmle. A run is a
/// contiguous block of that order; without scad the supports are supplied
/// by the caller (or default to every covariate).
struct StageSet {
  bool scad = true;
  bool cmle = true;
  bool factor = true;
  bool fmle = true;

  void validate() const;
  bool empty() const { return !(scad || cmle || factor || fmle); }
  std::string to_string() const;
  static StageSet parse(const std::string& list);  // "scad,cmle,factor,fmle"
};

struct PipelineConfig {
  StageSet stages;
  ScadConfig scad;
  CmleOptions cmle;
  FmleOptions fmle;
  ProjectionKind projection = ProjectionKind::random_partition;
  Matrix user_m;          // projection == user_supplied
  Index d_max = 0;        // 0: eigenvalue-ratio choice
  int factor_cap = 30;    // largest factor count tried by the ratio rule
  double holdout_fraction = 0.10;
  std::uint64_t seed = 1;  // partition and Hadamard rows
  int workers = 1;
  bool fmle_covariance = true;
  bool cmle_covariance = false;

  void validate() const;
};

struct PipelineResult {
  StageSet stages;
  std::vector<std::vector<int>> supports;
  std::vector<ScadPath> paths;
  std::vector<int> estimation_nodes;  // rows of Y used after any split

  std::vector<ComponentEstimate> cmle;
  std::vector<double> cmle_se;  // empty unless requested

  bool has_factors = false;
  DiversifiedProjection projection;
  FactorEstimate factors;
  int selected_factors = 0;
  LoadingDiagnostic loadings;

  std::vector<AugmentedEstimate> fmle;

  std::map<std::string, double> seconds;
  std::vector<std::string> warnings;
};

/// SCAD-BIC supports, CMLE, diversified-projection factors, then FMLE with
/// sandwich standard errors. Errors name the failing stage and component.
PipelineResult fit_pipeline(const Matrix& y, const Matrix& x, const SpatialWeights& w, const PipelineConfig& cfg,
                            const std::vector<std::vector<int>>* supports = nullptr);

/// Residual eigen-structure and weight-matrix checks.
struct Diagnostics {
  Vector eigenvalues;  // top min(p, 30), descending
  Vector ratios;
  int selected_factors = 0;
  LoadingDiagnostic loadings;
  double norm_1 = 0.0, norm_inf = 0.0;
  std::vector<double> rho;         // CMLE estimates when residuals were fitted here
  std::vector<char> boundary_hit;
};

Diagnostics diagnose_residuals(const Matrix& e, const SpatialWeights& w);
/// Fits CMLE on the supports (all covariates when null), then diagnoses.
Diagnostics diagnose(const Matrix& y, const Matrix& x, const SpatialWeights& w,
                     const std::vector<std::vector<int>>* supports = nullptr, const CmleOptions& cmle = {},
                     int workers = 1);

}  // namespace fsar
