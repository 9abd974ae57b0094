#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace games {

/// Undirected edge between two node indices, stored with u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph. Edges are deduplicated and normalized so that
/// u < v; self-loops and out-of-range indices are rejected at construction.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t node_count, const std::vector<Edge>& edges);
  Graph(std::size_t node_count, const std::vector<Edge>& edges,
        const std::vector<double>& distances);

  std::size_t node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_distances() const { return distances_.has_value(); }
  /// Distance of edges()[k]; throws if the graph carries no distances.
  double distance(std::size_t k) const;
  const std::optional<std::vector<double>>& distances() const { return distances_; }

  /// Adjacency lists, sorted.
  std::vector<std::vector<std::size_t>> neighbors() const;

 private:
  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::optional<std::vector<double>> distances_;
};

/// A_ij = 1 iff (i, j) is an edge.
Eigen::MatrixXd build_adjacency(const Graph& graph);

/// Gaussian-kernel affinity exp(-dist^2 / sigma^2) on edges, 0 elsewhere.
Eigen::MatrixXd build_affinity(const Graph& graph, double sigma);

/// Propagation operator of a first-order graph convolution,
/// (I + D)^{-1/2} (I + A) (I + D)^{-1/2}.
class RenormalizedLaplacian {
 public:
  RenormalizedLaplacian() = default;
  explicit RenormalizedLaplacian(Eigen::MatrixXd matrix);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  Eigen::Index size() const { return matrix_.rows(); }

 private:
  Eigen::MatrixXd matrix_;
};

RenormalizedLaplacian renormalized_laplacian(const Eigen::MatrixXd& adjacency);

std::size_t connected_components(const Graph& graph);

}  // namespace games
