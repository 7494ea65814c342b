#pragma once

#include "fsar/spatial.hpp"

#include <string>
#include <vector>

namespace fsar {

/// Numeric CSV with a header row.
struct Table {
  std::vector<std::string> names;
  Matrix values;
};

/// Empty cells and NA/NaN/null count as missing; any missing value is a
/// DataError listing each affected column with its missing fraction.
Table read_csv(const std::string& path);
Table parse_csv(const std::string& text, const std::string& source = "<memory>");
/// Doubles written with %.17g so a read gives back the same bits.
void write_csv(const std::string& path, const std::vector<std::string>& names, const Matrix& values);

/// Two integer columns (from, to), 0-based node ids.
AdjacencyMatrix read_edge_list(const std::string& path, Index n);
void write_edge_list(const std::string& path, const AdjacencyMatrix& adj);

/// i ~ j when either is among the other's k nearest (Euclidean) neighbours.
AdjacencyMatrix knn_adjacency(const Matrix& coords, int k);

struct Preprocess {
  bool log_transform = false;
  bool standardize = false;  // mean 0, population variance 1
};

/// Per column: log, then z-score. Appends one line per action to `log`.
void preprocess(Matrix& m, const std::vector<std::string>& names, const Preprocess& opts,
                std::vector<std::string>& log);

struct IngestPaths {
  std::string y;
  std::string x;       // optional
  std::string edges;   // edge list, or
  std::string coords;  // node coordinates for the k-NN rule
  int knn_k = 5;
};

struct Dataset {
  Matrix Y;
  Matrix X;  // n x 0 when absent
  std::vector<std::string> y_names, x_names;
  AdjacencyMatrix adjacency;
  SpatialWeights W;
  std::vector<std::string> log;
};

/// Preprocessing applies to Y; X is standardized only when asked.
Dataset ingest(const IngestPaths& paths, const Preprocess& y_pre = {}, bool standardize_x = false);

/// Y.csv, X.csv (when q > 0) and edges.csv under `dir`.
IngestPaths persist(const Dataset& data, const std::string& dir);

}  // namespace fsar
