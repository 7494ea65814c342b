#include "fsar/io.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/tokenizer.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fsar {

namespace {

using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  Tokenizer tok(line, boost::escaped_list_separator<char>('\\', ',', '"'));
  for (auto& t : tok) out.push_back(boost::algorithm::trim_copy(t));
  return out;
}

bool is_missing(const std::string& s) {
  if (s.empty()) return true;
  const std::string l = boost::algorithm::to_lower_copy(s);
  return l == "na" || l == "nan" || l == "null";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\\") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Table parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  Table t;
  bool header = true;
  std::vector<std::vector<double>> rows;
  std::vector<Index> missing;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (boost::algorithm::trim_copy(line).empty()) continue;
    std::vector<std::string> cells;
    try {
      cells = split_row(line);
    } catch (const boost::escaped_list_error& e) {
      throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (header) {
      t.names = std::move(cells);
      if (t.names.empty()) throw DataError(source + ": empty header");
      missing.assign(t.names.size(), 0);
      header = false;
      continue;
    }
    if (cells.size() != t.names.size()) {
      std::ostringstream os;
      os << source << ":" << line_no << ": expected " << t.names.size() << " fields, found " << cells.size();
      throw DataError(os.str());
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (is_missing(cells[c])) {
        ++missing[c];
        row[c] = std::nan("");
        continue;
      }
      errno = 0;
      char* end = nullptr;
      row[c] = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str() || *end != '\0' || errno == ERANGE) {
        std::ostringstream os;
        os << source << ":" << line_no << ": column '" << t.names[c] << "' is not numeric: '" << cells[c] << "'";
        throw DataError(os.str());
      }
    }
    rows.push_back(std::move(row));
  }
  if (header) throw DataError(source + ": missing header row");
  const Index n = static_cast<Index>(rows.size());
  if (std::any_of(missing.begin(), missing.end(), [](Index m) { return m > 0; })) {
    std::ostringstream os;
    os << source << ": missing values (impute upstream):";
    for (std::size_t c = 0; c < missing.size(); ++c)
      if (missing[c] > 0) {
        char frac[32];
        std::snprintf(frac, sizeof frac, "%.1f%%", 100.0 * static_cast<double>(missing[c]) / static_cast<double>(n));
        os << " " << t.names[c] << " (" << frac << ")";
      }
    throw DataError(os.str());
  }
  t.values.resize(n, static_cast<Index>(t.names.size()));
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < t.values.cols(); ++c) t.values(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
  return t;
}

Table read_csv(const std::string& path) { return parse_csv(read_file(path), path); }

void write_csv(const std::string& path, const std::vector<std::string>& names, const Matrix& values) {
  if (static_cast<Index>(names.size()) != values.cols()) throw std::invalid_argument("one name per column is required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << quote(names[c]);
  out << "\n";
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(i, c));
    out << "\n";
  }
  if (!out) throw DataError("write failed for " + path);
}

AdjacencyMatrix read_edge_list(const std::string& path, Index n) {
  const Table t = read_csv(path);
  if (t.values.cols() != 2) throw DataError(path + ": edge list needs exactly two columns (from, to)");
  std::vector<std::pair<int, int>> edges;
  for (Index i = 0; i < t.values.rows(); ++i) {
    const double a = t.values(i, 0), b = t.values(i, 1);
    if (a != std::floor(a) || b != std::floor(b)) throw DataError(path + ": node ids must be integers");
    if (a == b) throw DataError(path + ": self-loop on node " + std::to_string(static_cast<long long>(a)));
    edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
  }
  return AdjacencyMatrix::from_edges(n, edges);
}

void write_edge_list(const std::string& path, const AdjacencyMatrix& adj) {
  const auto edges = adj.edges();
  Matrix m(static_cast<Index>(edges.size()), 2);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    m(static_cast<Index>(k), 0) = edges[k].first;
    m(static_cast<Index>(k), 1) = edges[k].second;
  }
  write_csv(path, {"from", "to"}, m);
}

AdjacencyMatrix knn_adjacency(const Matrix& coords, int k) {
  const Index n = coords.rows();
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (k >= n) throw DataError("k-NN rule needs more nodes than neighbours");
  if (!coords.allFinite()) throw DataError("coordinates must be finite");
  std::vector<std::pair<int, int>> edges;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) dist[static_cast<std::size_t>(j)] = (coords.row(i) - coords.row(j)).squaredNorm();
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::erase(order, static_cast<int>(i));
    // ties go to the lower index
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    });
    for (int m = 0; m < k; ++m) {
      edges.emplace_back(static_cast<int>(i), order[m]);
      edges.emplace_back(order[m], static_cast<int>(i));
    }
  }
  return AdjacencyMatrix::from_edges(n, edges);
}

void preprocess(Matrix& m, const std::vector<std::string>& names, const Preprocess& opts,
                std::vector<std::string>& log) {
  if (static_cast<Index>(names.size()) != m.cols()) throw std::invalid_argument("one name per column is required");
  const double n = static_cast<double>(m.rows());
  for (Index c = 0; c < m.cols(); ++c) {
    const std::string& name = names[static_cast<std::size_t>(c)];
    if (opts.log_transform) {
      if (!(m.col(c).minCoeff() > 0.0)) throw DataError("column '" + name + "' has nonpositive values; cannot log");
      m.col(c) = m.col(c).array().log().matrix();
      log.push_back("log: " + name);
    }
    if (opts.standardize) {
      if (m.rows() < 2) throw DataError("standardizing needs at least two rows");
      const double mean = m.col(c).mean();
      m.col(c).array() -= mean;
      const double var = m.col(c).squaredNorm() / n;
      const double scale = std::max(1.0, std::abs(mean));
      if (!(var > 1e-24 * scale * scale)) throw DataError("column '" + name + "' has zero variance");
      m.col(c) /= std::sqrt(var);
      log.push_back("standardize (population variance): " + name + " mean=" + format_double(mean) +
                    " sd=" + format_double(std::sqrt(var)));
    }
  }
}

Dataset ingest(const IngestPaths& paths, const Preprocess& y_pre, bool standardize_x) {
  Dataset d;
  Table y = read_csv(paths.y);
  d.Y = std::move(y.values);
  d.y_names = std::move(y.names);
  const Index n = d.Y.rows();
  if (n < 3) throw DataError(paths.y + ": too few rows");
  preprocess(d.Y, d.y_names, y_pre, d.log);

  if (!paths.x.empty()) {
    Table x = read_csv(paths.x);
    if (x.values.rows() != n) throw DataError("X and Y have different row counts");
    d.X = std::move(x.values);
    d.x_names = std::move(x.names);
    Preprocess xp;
    xp.standardize = standardize_x;
    preprocess(d.X, d.x_names, xp, d.log);
  } else {
    d.X.resize(n, 0);
  }

  if (!paths.edges.empty() && !paths.coords.empty()) throw std::invalid_argument("give an edge list or coordinates, not both");
  if (!paths.edges.empty()) {
    d.adjacency = read_edge_list(paths.edges, n);
    d.log.push_back("weights: edge list " + paths.edges);
  } else if (!paths.coords.empty()) {
    const Table c = read_csv(paths.coords);
    if (c.values.rows() != n) throw DataError("coordinates and Y have different row counts");
    d.adjacency = knn_adjacency(c.values, paths.knn_k);
    d.log.push_back("weights: symmetric " + std::to_string(paths.knn_k) + "-NN on " + paths.coords);
  } else {
    throw std::invalid_argument("an edge list or a coordinate file is required");
  }
  d.W = row_normalize(d.adjacency);
  return d;
}

IngestPaths persist(const Dataset& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  IngestPaths p;
  p.y = (base / "Y.csv").string();
  write_csv(p.y, data.y_names, data.Y);
  if (data.X.cols() > 0) {
    p.x = (base / "X.csv").string();
    write_csv(p.x, data.x_names, data.X);
  }
  p.edges = (base / "edges.csv").string();
  write_edge_list(p.edges, data.adjacency);
  return p;
}

}  // namespace fsar
