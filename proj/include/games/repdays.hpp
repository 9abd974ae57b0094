#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "games/autoencoder.hpp"
#include "games/dataset.hpp"

namespace games {

/// Medoids and memberships are positions into the clustered day list.
struct RepresentativeDaySet {
  std::vector<std::size_t> medoids;     ///< ascending
  std::vector<std::size_t> assignment;  ///< day -> its medoid (a day position)
  std::vector<std::size_t> weights;     ///< cluster sizes, aligned with medoids
  double objective = 0.0;
  std::string source = "embeddings";
  std::uint64_t seed = 0;

  std::size_t day_count() const { return assignment.size(); }
  std::size_t weight_of(std::size_t medoid) const;
};

/// Squared Frobenius distance.
double distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Symmetric pairwise distance matrix.
Eigen::MatrixXd distance_matrix(const std::vector<Eigen::MatrixXd>& points);

/// Assigns every day to its nearest medoid (ties to the lowest medoid) and
/// fills weights and the objective.
RepresentativeDaySet assign_to_medoids(const Eigen::MatrixXd& distances,
                                       std::vector<std::size_t> medoids);

/// PAM: greedy BUILD followed by best-improvement SWAP passes. Deterministic;
/// the seed is recorded for provenance only.
RepresentativeDaySet kmedoids(const std::vector<Eigen::MatrixXd>& points, std::size_t k,
                              std::uint64_t seed);
RepresentativeDaySet kmedoids(const EmbeddingSet& embeddings, std::size_t k, std::uint64_t seed);

/// Baseline on the normalized raw tensors (E, W, S, G flattened per day).
RepresentativeDaySet kmedoids_raw(const MultiResolutionDataset& dataset, std::size_t k,
                                  std::uint64_t seed);
std::vector<Eigen::MatrixXd> flatten_days(const MultiResolutionDataset& dataset);

/// Repeats the best single medoid/non-medoid swap until none improves.
RepresentativeDaySet swap_improvement_pass(const RepresentativeDaySet& current,
                                           const Eigen::MatrixXd& distances);

void save_day_set(const RepresentativeDaySet& set, const std::filesystem::path& path);
RepresentativeDaySet load_day_set(const std::filesystem::path& path);

}  // namespace games
