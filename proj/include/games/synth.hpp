#pragma once

#include <cstddef>
#include <cstdint>

#include "games/dataset.hpp"
#include "games/gtep.hpp"

namespace games {

struct SynthParams {
  std::size_t power_nodes = 6;
  std::size_t gas_nodes = 3;
  std::size_t gas_storage = 2;
  std::size_t days = 365;
  int hours = 24;
  int start_day = 0;  ///< calendar position of the first day, 0 = Jan 1
  double seasonal_amplitude = 0.2;
  double diurnal_amplitude = 0.25;
  double gas_temperature_sensitivity = 0.4;
  double noise = 0.05;  ///< relative to each node's scale
  /// Day-level weather anomalies (temperature, wind regime, wind gradient,
  /// cloud cover) as a multiple of `noise`; each follows an AR(1) process
  /// over days with coefficient `weather_persistence`.
  double weather_ratio = 3.0;
  double weather_persistence = 0.7;
  double spatial_correlation = 0.6;  ///< weight of the neighbor mean in each smoothing pass
  int smoothing_passes = 2;
  double power_edge_ratio = 338.0 / 188.0;  ///< target edges per power node
  double gas_edge_ratio = 1.5;
  std::size_t candidate_lines = 2;
  std::size_t coupling_per_power = 3;
  std::size_t storage_per_gas = 2;
  int hours_per_period = 4;
  double rps_share = 0.2;

  void validate() const;
};

struct SyntheticCase {
  MultiResolutionDataset dataset;
  GtepInstance instance;
};

/// Demands are seasonal x diurnal x node scale plus noise smoothed over the
/// graph; capacity factors are clipped to [0,1]; gas demand falls with the
/// temperature proxy. Weather anomalies shift whole days: a temperature
/// anomaly raises power demand in summer and winter peaks and lowers gas
/// demand when warm, a wind regime scales wind everywhere, a front tilts it
/// west to east, and cloud cover scales solar. Investment costs are pro-rated to the day count.
SyntheticCase generate_synthetic(const SynthParams& params, std::uint64_t seed);

/// Temperature proxy in [-1, 1], peaking mid-July.
double temperature_proxy(int calendar_day);

}  // namespace games
