#include "fsar/netgen.hpp"

#include <doctest.h>

#include <cmath>

using namespace fsar;

namespace {

void check_binary_no_loops(const AdjacencyMatrix& a) {
  CHECK_FALSE(a.has_self_loops());
  const SparseMatrix& m = a.pattern();
  for (Index i = 0; i < m.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) CHECK(it.value() == 1.0);
}

}  // namespace

TEST_CASE("DIM dyad probabilities") {
  const DyadProbabilities pr = dim_probabilities(500);
  CHECK(pr.mutual == doctest::Approx(0.004).epsilon(1e-12));
  CHECK(pr.one_way == doctest::Approx(0.5 * std::pow(500.0, -0.8)).epsilon(1e-12));
  CHECK(pr.one_way == doctest::Approx(0.003466).epsilon(1e-3));
  CHECK(pr.none == doctest::Approx(1.0 - 2.0 / 500 - std::pow(500.0, -0.8)).epsilon(1e-12));
  CHECK(dim_probabilities(100000).none > dim_probabilities(1000).none);
  CHECK_THROWS_AS(generate_dim(2, 1), std::invalid_argument);
}

TEST_CASE("DIM dyad frequencies within three standard errors") {
  const Index n = 100;
  const int reps = 200;
  double mutual = 0, forward = 0, backward = 0, none = 0;
  double mutual_per_rep = 0;
  for (int r = 0; r < reps; ++r) {
    const AdjacencyMatrix a = generate_dim(n, 1000 + r);
    check_binary_no_loops(a);
    const Matrix d = a.to_dense();
    double m = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        const bool ij = d(i, j) > 0, ji = d(j, i) > 0;
        if (ij && ji) ++m;
        else if (ij) ++forward;
        else if (ji) ++backward;
        else ++none;
      }
    mutual += m;
    mutual_per_rep += m;
  }
  const double dyads = reps * n * (n - 1) / 2.0;
  const DyadProbabilities pr = dim_probabilities(n);
  auto within = [&](double count, double prob) {
    const double se = std::sqrt(prob * (1 - prob) / dyads);
    return std::abs(count / dyads - prob) <= 3 * se;
  };
  CHECK(within(mutual, pr.mutual));
  CHECK(within(forward, pr.one_way));
  CHECK(within(backward, pr.one_way));
  CHECK(within(none, pr.none));
  // C(n,2) 2/n = n - 1 mutual dyads on average
  const double mean = mutual_per_rep / reps;
  const double se = std::sqrt((n - 1.0) * (1 - pr.mutual) / reps);
  CHECK(std::abs(mean - (n - 1.0)) <= 3 * se);
}

TEST_CASE("SBM probabilities and degrees") {
  CHECK(sbm_probability(900, true) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(sbm_probability(900, false) == doctest::Approx(1.0 / 300).epsilon(1e-12));
  CHECK_THROWS_AS(generate_sbm(8, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_sbm(20, 0, 1), std::invalid_argument);

  const Index n = 900;
  const int K = 5;
  double total = 0, within = 0, within_pairs = 0, cross_pairs = 0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    std::vector<int> labels;
    const AdjacencyMatrix a = generate_sbm(n, K, 50 + r, &labels);
    check_binary_no_loops(a);
    REQUIRE(labels.size() == static_cast<std::size_t>(n));
    std::vector<double> size(K, 0);
    for (int l : labels) {
      REQUIRE(l >= 0);
      REQUIRE(l < K);
      ++size[l];
    }
    for (double s : size) {
      within_pairs += s * (s - 1);
      cross_pairs += s * (n - s);
    }
    for (const auto& [i, j] : a.edges()) {
      ++total;
      if (labels[i] == labels[j]) ++within;
    }
  }
  const double pw = sbm_probability(n, true), pc = sbm_probability(n, false);
  const double cross = total - within;
  CHECK(std::abs(within - pw * within_pairs) <= 4 * std::sqrt(pw * within_pairs));
  CHECK(std::abs(cross - pc * cross_pairs) <= 4 * std::sqrt(pc * cross_pairs));
  const double expect_deg = (n / double(K) - 1) * pw + (n - n / double(K)) * pc;
  const double mean_deg = total / (reps * double(n));
  CHECK(std::abs(mean_deg - expect_deg) < 0.05 * expect_deg);
}

TEST_CASE("SBM with one block is homogeneous") {
  std::vector<int> labels;
  const AdjacencyMatrix a = generate_sbm(300, 1, 3, &labels);
  for (int l : labels) CHECK(l == 0);
  const double pairs = 300.0 * 299.0;
  const double pr = 9.0 / 300;
  CHECK(std::abs(a.edge_count() - pr * pairs) <= 4 * std::sqrt(pr * pairs));
}

TEST_CASE("LSM link function") {
  CHECK(lsm_probability(1000, 0.0) == 0.5);
  CHECK(lsm_probability(1000, 0.01) == doctest::Approx(1.0 / (1.0 + std::exp(2.5))).epsilon(1e-12));
  CHECK(lsm_probability(1000, 0.01) == doctest::Approx(0.0759).epsilon(1e-3));
  double last = 1.0;
  for (double d = 0.0; d <= 1.0; d += 0.001) {
    const double pr = lsm_probability(500, d);
    CHECK(pr <= last);
    last = pr;
  }
  CHECK_THROWS_AS(generate_lsm(1, 1), std::invalid_argument);
}

TEST_CASE("LSM edge count matches the positions") {
  const Index n = 400;
  std::vector<double> pos;
  const AdjacencyMatrix a = generate_lsm(n, 9, &pos);
  check_binary_no_loops(a);
  REQUIRE(pos.size() == static_cast<std::size_t>(n));
  double mean = 0, var = 0;
  for (Index i = 0; i < n; ++i) {
    CHECK(pos[i] >= 0.0);
    CHECK(pos[i] <= 1.0);
    for (Index j = 0; j < n; ++j)
      if (i != j) {
        const double pr = lsm_probability(n, std::abs(pos[i] - pos[j]));
        mean += pr;
        var += pr * (1 - pr);
      }
  }
  CHECK(std::abs(a.edge_count() - mean) <= 4 * std::sqrt(var));
}

TEST_CASE("generators are reproducible per seed") {
  for (auto model : {NetworkModel::dim, NetworkModel::sbm, NetworkModel::lsm}) {
    const NetworkSpec spec{model, 150, 5, 77};
    const AdjacencyMatrix a = generate_network(spec);
    const AdjacencyMatrix b = generate_network(spec);
    CHECK(a.edges() == b.edges());
    NetworkSpec other = spec;
    other.seed = 78;
    CHECK(generate_network(other).edges() != a.edges());
  }
}

TEST_CASE("network model names") {
  CHECK(parse_network_model("DIM") == NetworkModel::dim);
  CHECK(parse_network_model("sbm") == NetworkModel::sbm);
  CHECK(parse_network_model("Lsm") == NetworkModel::lsm);
  CHECK(to_string(NetworkModel::sbm) == "SBM");
  CHECK_THROWS_AS(parse_network_model("er"), std::invalid_argument);
}
