#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "games/graph.hpp"

namespace games {

/// One day of graph signals. Power-side channels share the power node set.
struct DaySignal {
  int day_index = 0;
  Eigen::MatrixXd electricity;  ///< n_E x t_E, MW, hourly
  Eigen::MatrixXd wind_cf;      ///< n_E x t_W, capacity factor in [0,1]
  Eigen::MatrixXd solar_cf;     ///< n_E x t_S, capacity factor in [0,1]
  Eigen::MatrixXd gas;          ///< n_G x t_G, MMBtu/day
};

struct SignalDims {
  Eigen::Index n_power = 0;
  Eigen::Index n_gas = 0;
  Eigen::Index t_electricity = 0;
  Eigen::Index t_wind = 0;
  Eigen::Index t_solar = 0;
  Eigen::Index t_gas = 0;

  Eigen::Index joint_nodes() const { return n_power + n_gas; }
  Eigen::Index channels() const { return t_electricity + t_wind + t_solar + t_gas; }
  Eigen::Index power_channels() const { return t_electricity + t_wind + t_solar; }

  friend bool operator==(const SignalDims&, const SignalDims&) = default;
};

SignalDims dims_of(const DaySignal& day);

/// Affine map of one channel group onto [-1, 1].
struct ChannelScaling {
  double lo = 0.0;
  double hi = 1.0;
  bool constant = false;

  double forward(double x) const;
  double inverse(double y) const;
};

struct Normalization {
  bool applied = false;
  ChannelScaling electricity;
  ChannelScaling wind;
  ChannelScaling solar;
  ChannelScaling gas;
};

struct CouplingEdge {
  std::size_t power_node = 0;
  std::size_t gas_node = 0;

  friend bool operator==(const CouplingEdge&, const CouplingEdge&) = default;
  friend auto operator<=>(const CouplingEdge&, const CouplingEdge&) = default;
};

struct MultiResolutionDataset {
  Graph power_graph;
  Graph gas_graph;
  std::vector<CouplingEdge> coupling_edges;
  std::vector<DaySignal> days;
  Normalization normalization;

  SignalDims dims() const;
  std::size_t day_count() const { return days.size(); }
};

/// Throws InputError when shapes disagree across days or with the graphs,
/// or (for raw data) when capacity factors leave [0,1] or demands go negative.
void validate(const MultiResolutionDataset& dataset);

/// Disjoint union of power and gas graphs plus coupling edges; gas node i
/// becomes joint node n_E + i.
Graph assemble_joint_graph(const MultiResolutionDataset& dataset);

/// Per channel group global min-max scaling to [-1, 1]. Returns the input
/// unchanged when it is already normalized.
MultiResolutionDataset normalize(const MultiResolutionDataset& dataset);
MultiResolutionDataset denormalize(const MultiResolutionDataset& dataset);

/// Subset of days, in the given order.
MultiResolutionDataset select_days(const MultiResolutionDataset& dataset,
                                   const std::vector<std::size_t>& indices);

// File formats: topology JSON {"nodes": n, "edges": [[i,j] | [i,j,dist], ...]},
// coupling JSON {"edges": [[power, gas], ...]}, one CSV per channel group with
// header day,node,t0,t1,...
Graph load_graph(const std::filesystem::path& path);
void save_graph(const Graph& graph, const std::filesystem::path& path);
std::vector<CouplingEdge> load_coupling(const std::filesystem::path& path);
void save_coupling(const std::vector<CouplingEdge>& edges, const std::filesystem::path& path);

/// Directory layout: power.json gas.json coupling.json electricity.csv
/// wind.csv solar.csv gas.csv
MultiResolutionDataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const MultiResolutionDataset& dataset, const std::filesystem::path& dir);

}  // namespace games
