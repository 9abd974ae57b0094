#include <cmath>
#include <random>

#include "doctest.h"
#include "games/dataset.hpp"
#include "games/errors.hpp"
#include "games/graph.hpp"

using games::Edge;
using games::Graph;

namespace {

Graph random_graph(std::mt19937_64& rng, std::size_t n, double p) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) edges.push_back({i, j});
  return Graph(n, edges);
}

// largest |eigenvalue| of a symmetric matrix by power iteration
double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Eigen::VectorXd w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = norm;
    v = w / norm;
  }
  return lambda;
}

}  // namespace

TEST_CASE("adjacency of small graphs") {
  CHECK(games::build_adjacency(Graph(1, {})) == Eigen::MatrixXd::Zero(1, 1));

  Eigen::MatrixXd path(2, 2);
  path << 0, 1, 1, 0;
  CHECK(games::build_adjacency(Graph(2, {{0, 1}})) == path);

  Eigen::MatrixXd tri = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
  CHECK(games::build_adjacency(Graph(3, {{0, 1}, {1, 2}, {0, 2}})) == tri);
}

TEST_CASE("graph construction rejects invalid edges") {
  CHECK_THROWS_AS(Graph(2, {{1, 1}}), games::InputError);
  CHECK_THROWS_AS(Graph(2, {{0, 2}}), games::InputError);
  // duplicates and reversed pairs collapse
  Graph g(3, {{1, 0}, {0, 1}, {2, 1}});
  CHECK(g.edge_count() == 2);
  CHECK(g.edges()[0] == Edge{0, 1});
}

TEST_CASE("gaussian affinity") {
  const double sigma = 2.5;
  Graph g(3, {{0, 1}, {1, 2}}, {0.0, sigma});
  const auto a = games::build_affinity(g, sigma);
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 2) == doctest::Approx(0.367879441171442).epsilon(1e-14));
  CHECK(a(2, 1) == a(1, 2));
  CHECK(a(0, 2) == 0.0);
  CHECK_THROWS_WITH_AS(games::build_affinity(Graph(2, {{0, 1}}), 1.0),
                       "distances required for affinity", games::InputError);
}

TEST_CASE("renormalized laplacian hand-evaluated cases") {
  CHECK(games::renormalized_laplacian(Eigen::MatrixXd::Zero(1, 1)).matrix()(0, 0) == 1.0);

  const auto l2 = games::renormalized_laplacian(games::build_adjacency(Graph(2, {{0, 1}})));
  CHECK((l2.matrix().array() - 0.5).abs().maxCoeff() < 1e-15);

  const auto l3 =
      games::renormalized_laplacian(games::build_adjacency(Graph(3, {{0, 1}, {1, 2}, {0, 2}})));
  CHECK((l3.matrix().array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("renormalized laplacian properties on random graphs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const Graph g = random_graph(rng, n, 0.4);
    const Eigen::MatrixXd a = games::build_adjacency(g);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.diagonal().cwiseAbs().maxCoeff() == 0.0);

    const Eigen::MatrixXd l = games::renormalized_laplacian(a).matrix();
    CHECK((l - l.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

    // reconstruct from the factors entrywise
    Eigen::MatrixXd rebuilt(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double di = 1.0 + a.row(i).sum();
        const double dj = 1.0 + a.row(j).sum();
        rebuilt(i, j) = ((i == j ? 1.0 : 0.0) + a(i, j)) / std::sqrt(di * dj);
      }
    }
    CHECK((rebuilt - l).cwiseAbs().maxCoeff() <= 1e-12);
    // D~^{-1/2} L~ D~^{1/2} = D~^{-1} A~ is row-stochastic
    const Eigen::VectorXd deg = (a.rowwise().sum().array() + 1.0).matrix();
    const Eigen::MatrixXd walk =
        deg.cwiseSqrt().cwiseInverse().asDiagonal() * l * deg.cwiseSqrt().asDiagonal();
    CHECK((walk.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(l.minCoeff() >= 0.0);
    CHECK(spectral_radius(l) <= 1.0 + 1e-9);
  }
}

TEST_CASE("joint graph assembly") {
  games::MultiResolutionDataset ds;
  ds.power_graph = Graph(2, {{0, 1}});
  ds.gas_graph = Graph(1, {});
  ds.coupling_edges = {{0, 0}};
  const Graph joint = games::assemble_joint_graph(ds);
  CHECK(joint.node_count() == 3);
  CHECK(joint.edges() == std::vector<Edge>{{0, 1}, {0, 2}});

  ds.coupling_edges.clear();
  const Graph disjoint = games::assemble_joint_graph(ds);
  CHECK(games::connected_components(disjoint) ==
        games::connected_components(ds.power_graph) + games::connected_components(ds.gas_graph));

  ds.coupling_edges = {{0, 3}};
  CHECK_THROWS_AS(games::assemble_joint_graph(ds), games::InputError);
}
