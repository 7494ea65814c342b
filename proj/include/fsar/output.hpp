#pragma once

#include "fsar/harness.hpp"
#include "fsar/pipeline.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fsar {

/// One row per response: estimates, SEs, 95% CI, tau and support.
void write_components_csv(const std::string& path, const PipelineResult& res,
                          const std::vector<std::string>& names = {});
/// Per-(component, lambda) path rows.
void write_scad_paths_csv(const std::string& path, const PipelineResult& res);
/// j, eigenvalue, ratio (top 30).
void write_eigenvalues_csv(const std::string& path, const Vector& eigenvalues);

nlohmann::json supports_json(const std::vector<std::vector<int>>& supports);
nlohmann::json factor_json(const PipelineResult& res);
nlohmann::json diagnostics_json(const Diagnostics& d);

nlohmann::json dgp_json(const DgpConfig& cfg);
/// Aggregates only; runtimes are left to the manifest so equal runs give
/// identical files.
nlohmann::json report_json(const MetricsReport& rep);
void write_replicates_csv(const std::string& path, const MetricsReport& rep);
void write_boxplot_csv(const std::string& path, const std::vector<BoxplotRow>& rows);
/// network, n, p, q, d, replications, CM.
void write_cm_csv(const std::string& path, const std::vector<MetricsReport>& reports);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace fsar
