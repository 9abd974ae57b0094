#include "games/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "games/errors.hpp"

namespace games {

namespace {

Edge normalized(const Edge& e, std::size_t node_count) {
  if (e.u == e.v) {
    throw InputError("self-loop on node " + std::to_string(e.u));
  }
  if (e.u >= node_count || e.v >= node_count) {
    throw InputError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                     ") out of range for " + std::to_string(node_count) + " nodes");
  }
  return e.u < e.v ? e : Edge{e.v, e.u};
}

}  // namespace

Graph::Graph(std::size_t node_count, const std::vector<Edge>& edges) : node_count_(node_count) {
  if (node_count == 0) throw InputError("graph needs at least one node");
  edges_.reserve(edges.size());
  for (const auto& e : edges) edges_.push_back(normalized(e, node_count));
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

Graph::Graph(std::size_t node_count, const std::vector<Edge>& edges,
             const std::vector<double>& distances)
    : node_count_(node_count) {
  if (node_count == 0) throw InputError("graph needs at least one node");
  if (distances.size() != edges.size()) {
    throw InputError("one distance per edge required");
  }
  std::vector<std::pair<Edge, double>> tagged;
  tagged.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (!(distances[k] >= 0.0) || !std::isfinite(distances[k])) {
      throw InputError("edge distances must be finite and nonnegative");
    }
    tagged.emplace_back(normalized(edges[k], node_count), distances[k]);
  }
  std::sort(tagged.begin(), tagged.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  // first occurrence wins for duplicated edges
  tagged.erase(std::unique(tagged.begin(), tagged.end(),
                           [](const auto& a, const auto& b) { return a.first == b.first; }),
               tagged.end());
  std::vector<double> dist;
  for (const auto& [e, d] : tagged) {
    edges_.push_back(e);
    dist.push_back(d);
  }
  distances_ = std::move(dist);
}

double Graph::distance(std::size_t k) const {
  if (!distances_) throw InputError("distances required for affinity");
  return distances_->at(k);
}

std::vector<std::vector<std::size_t>> Graph::neighbors() const {
  std::vector<std::vector<std::size_t>> adj(node_count_);
  for (const auto& e : edges_) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

Eigen::MatrixXd build_adjacency(const Graph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : graph.edges()) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

Eigen::MatrixXd build_affinity(const Graph& graph, double sigma) {
  if (!(sigma > 0.0)) throw InputError("affinity bandwidth sigma must be positive");
  if (!graph.has_distances()) throw InputError("distances required for affinity");
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const auto& edges = graph.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double d = graph.distance(k);
    const double w = std::exp(-(d * d) / (sigma * sigma));
    a(edges[k].u, edges[k].v) = w;
    a(edges[k].v, edges[k].u) = w;
  }
  return a;
}

RenormalizedLaplacian::RenormalizedLaplacian(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw InputError("laplacian must be square");
}

RenormalizedLaplacian renormalized_laplacian(const Eigen::MatrixXd& adjacency) {
  if (adjacency.rows() != adjacency.cols()) throw InputError("adjacency must be square");
  if ((adjacency.array() < 0.0).any()) throw InputError("adjacency must be nonnegative");
  if (adjacency.size() > 0 && (adjacency - adjacency.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InputError("adjacency must be symmetric");
  }
  const Eigen::Index n = adjacency.rows();
  Eigen::MatrixXd a_tilde = adjacency + Eigen::MatrixXd::Identity(n, n);
  // D~ = I + D, D_ii = sum_j A_ij
  const Eigen::VectorXd inv_sqrt_deg =
      (adjacency.rowwise().sum().array() + 1.0).rsqrt().matrix();
  Eigen::MatrixXd l = inv_sqrt_deg.asDiagonal() * a_tilde * inv_sqrt_deg.asDiagonal();
  // exact symmetry
  l = 0.5 * (l + l.transpose()).eval();
  return RenormalizedLaplacian(std::move(l));
}

std::size_t connected_components(const Graph& graph) {
  std::vector<std::size_t> parent(graph.node_count());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t components = graph.node_count();
  for (const auto& e : graph.edges()) {
    const auto a = find(e.u);
    const auto b = find(e.v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components;
}

}  // namespace games
