#include "fsar/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include <unistd.h>

using namespace fsar;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("fsar_io_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) const {
    const fs::path p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse_csv reads a numeric table") {
  const Table t = parse_csv("a,b\n1,2.5\n-3,1e-3\n\n");
  CHECK(t.names == std::vector<std::string>{"a", "b"});
  REQUIRE(t.values.rows() == 2);
  CHECK(t.values(0, 1) == 2.5);
  CHECK(t.values(1, 0) == -3.0);
  CHECK(t.values(1, 1) == 1e-3);
  const Table q = parse_csv("\"x,1\",y\r\n4,5\r\n");
  CHECK(q.names[0] == "x,1");
  CHECK(q.values(0, 1) == 5.0);
}

TEST_CASE("missing values are reported per column") {
  const std::string msg = error_text([] { parse_csv("a,b,c\n1,,3\n4,NA,6\n7,8,nan\n10,11,12\n"); });
  CHECK(msg.find("b (50.0%)") != std::string::npos);
  CHECK(msg.find("c (25.0%)") != std::string::npos);
  CHECK(msg.find(" a (") == std::string::npos);
}

TEST_CASE("malformed tables are rejected") {
  CHECK_THROWS_AS(parse_csv(""), DataError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n"), DataError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,x\n"), DataError);
  CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("write_csv round trips bit for bit") {
  TempDir dir("csv");
  Matrix m(3, 2);
  m << 0.1, 1.0 / 3.0, -2.5e-300, 1e300, std::nextafter(1.0, 2.0), -0.0;
  const std::string p = (dir.path / "m.csv").string();
  write_csv(p, {"u", "v"}, m);
  const Table t = read_csv(p);
  CHECK(t.names == std::vector<std::string>{"u", "v"});
  CHECK(t.values == m);
}

TEST_CASE("edge list example") {
  TempDir dir("edges");
  const std::string p = dir.file("e.csv", "from,to\n0,1\n1,0\n1,2\n");
  const SpatialWeights w = row_normalize(read_edge_list(p, 3));
  Matrix want(3, 3);
  want << 0, 1, 0, .5, 0, .5, 0, 0, 0;
  CHECK(w.to_dense() == want);
  CHECK_THROWS_AS(read_edge_list(dir.file("l.csv", "from,to\n1,1\n"), 3), DataError);
  CHECK_THROWS_AS(read_edge_list(dir.file("r.csv", "from,to\n0,3\n"), 3), DataError);
  CHECK_THROWS_AS(read_edge_list(dir.file("f.csv", "from,to\n0,1.5\n"), 3), DataError);
  CHECK_THROWS_AS(read_edge_list(dir.file("c.csv", "a,b,c\n0,1,2\n"), 3), DataError);

  const AdjacencyMatrix a = read_edge_list(p, 3);
  const std::string out = (dir.path / "out.csv").string();
  write_edge_list(out, a);
  CHECK(read_edge_list(out, 3).edges() == a.edges());
}

TEST_CASE("log and z-score example") {
  Matrix m(3, 1);
  m << 1.0, std::exp(1.0), std::exp(2.0);
  std::vector<std::string> log;
  preprocess(m, {"y"}, {true, true}, log);
  CHECK(std::abs(m(0) + std::sqrt(1.5)) < 1e-12);
  CHECK(std::abs(m(1)) < 1e-12);
  CHECK(std::abs(m(2) - std::sqrt(1.5)) < 1e-12);
  CHECK(std::abs(m(2) - 1.2247) < 1e-4);
  CHECK(log.size() == 2u);
  CHECK(log[1].find("population variance") != std::string::npos);
}

TEST_CASE("standardized columns have mean 0 and variance 1") {
  Matrix m(50, 3);
  for (Index i = 0; i < 50; ++i) m.row(i) << i * 0.3 + 2, std::sin(i * 1.0) * 7, (i % 7) - 100.0;
  std::vector<std::string> log;
  preprocess(m, {"a", "b", "c"}, {false, true}, log);
  for (Index c = 0; c < 3; ++c) {
    CHECK(std::abs(m.col(c).mean()) < 1e-10);
    CHECK(std::abs(m.col(c).squaredNorm() / 50 - 1.0) < 1e-10);
  }
}

TEST_CASE("preprocessing rejections") {
  std::vector<std::string> log;
  Matrix constant = Matrix::Constant(4, 1, 2.0);
  CHECK_THROWS_AS(preprocess(constant, {"k"}, {false, true}, log), DataError);
  Matrix neg(3, 1);
  neg << 1, 0, 2;
  CHECK_THROWS_AS(preprocess(neg, {"z"}, {true, false}, log), DataError);
}

TEST_CASE("k-NN adjacency") {
  Matrix c(5, 1);
  c << 0, 1, 2, 3, 10;
  const AdjacencyMatrix a = knn_adjacency(c, 1);
  const Matrix d = a.to_dense();
  CHECK(d == d.transpose());
  CHECK(d(0, 1) == 1);
  CHECK(d(1, 0) == 1);  // tie between 0 and 2 goes to node 0
  CHECK(d(1, 2) == 1);  // 2 chose 1 by the same rule
  CHECK(d(3, 2) == 1);
  CHECK(d(4, 3) == 1);
  CHECK(d.diagonal().isZero());
  CHECK_THROWS_AS(knn_adjacency(c, 5), DataError);
  CHECK_THROWS_AS(knn_adjacency(c, 0), std::invalid_argument);
}

TEST_CASE("ingest is idempotent through persist") {
  TempDir dir("ingest");
  std::string y = "g,h\n", x = "u\n", e = "from,to\n";
  for (int i = 0; i < 12; ++i) {
    y += std::to_string(1.0 + i * 0.7) + "," + std::to_string(std::exp(0.1 * (i * i % 5))) + "\n";
    x += std::to_string(std::cos(i)) + "\n";
    e += std::to_string(i) + "," + std::to_string((i + 1) % 12) + "\n";
  }
  IngestPaths paths;
  paths.y = dir.file("Y.csv", y);
  paths.x = dir.file("X.csv", x);
  paths.edges = dir.file("E.csv", e);
  const Dataset a = ingest(paths, {true, true}, true);
  const IngestPaths saved = persist(a, (dir.path / "saved").string());
  const Dataset b = ingest(saved);
  CHECK(b.Y == a.Y);
  CHECK(b.X == a.X);
  CHECK(b.y_names == a.y_names);
  CHECK(b.x_names == a.x_names);
  CHECK(b.adjacency.edges() == a.adjacency.edges());
  CHECK(b.W.fingerprint() == a.W.fingerprint());
  const Dataset c = ingest(persist(b, (dir.path / "again").string()));
  CHECK(c.Y == b.Y);
}

TEST_CASE("ingest from coordinates") {
  TempDir dir("coords");
  std::string y = "v\n", xy = "lon,lat\n";
  for (int i = 0; i < 10; ++i) {
    y += std::to_string(i * 1.5) + "\n";
    xy += std::to_string(i % 4) + "," + std::to_string(i / 4) + "\n";
  }
  IngestPaths paths;
  paths.y = dir.file("Y.csv", y);
  paths.coords = dir.file("C.csv", xy);
  paths.knn_k = 3;
  const Dataset d = ingest(paths);
  CHECK(d.X.cols() == 0);
  for (int deg : d.W.degrees()) CHECK(deg >= 3);
  paths.edges = paths.coords;
  CHECK_THROWS_AS(ingest(paths), std::invalid_argument);
}
