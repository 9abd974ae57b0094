#include "games/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <utility>

#include "games/errors.hpp"

namespace games {

namespace {

using Point = std::pair<double, double>;

double dist(const Point& a, const Point& b) { return std::hypot(a.first - b.first, a.second - b.second); }

std::vector<Point> place(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    p.first = u(rng);
    p.second = u(rng);
  }
  return pts;
}

/// Euclidean MST (Prim) plus the shortest remaining pairs up to `target` edges.
Graph spatial_graph(const std::vector<Point>& pts, std::size_t target, std::vector<Edge>* leftovers) {
  const std::size_t n = pts.size();
  std::vector<Edge> edges;
  std::vector<double> lengths;
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, 0);
  if (n > 0) best[0] = 0.0;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t v = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!in_tree[i] && (v == n || best[i] < best[v])) v = i;
    in_tree[v] = 1;
    if (it > 0) edges.push_back({std::min(v, parent[v]), std::max(v, parent[v])});
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_tree[i] && dist(pts[v], pts[i]) < best[i]) {
        best[i] = dist(pts[v], pts[i]);
        parent[i] = v;
      }
    }
  }
  std::vector<std::pair<double, Edge>> rest;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::find(edges.begin(), edges.end(), Edge{i, j}) == edges.end()) rest.push_back({dist(pts[i], pts[j]), Edge{i, j}});
  std::sort(rest.begin(), rest.end());
  std::size_t k = 0;
  while (edges.size() < target && k < rest.size()) edges.push_back(rest[k++].second);
  if (leftovers)
    for (; k < rest.size(); ++k) leftovers->push_back(rest[k].second);
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) lengths.push_back(dist(pts[e.u], pts[e.v]));
  return Graph(n, edges, lengths);
}

/// Indices of the k points of `to` nearest to `from` (ties to the lower index).
std::vector<std::size_t> nearest(const Point& from, const std::vector<Point>& to, std::size_t k) {
  std::vector<std::size_t> idx(to.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dist(from, to[a]) < dist(from, to[b]); });
  idx.resize(std::min(k, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Iid normal noise smoothed over the graph: x <- (1-s) x + s * mean(neighbors).
Eigen::MatrixXd smoothed_noise(const Graph& g, Eigen::Index cols, double s, int passes, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd x(n, cols);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index t = 0; t < cols; ++t) x(i, t) = normal(rng);
  const auto nb = g.neighbors();
  for (int pass = 0; pass < passes; ++pass) {
    Eigen::MatrixXd next = x;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& adj = nb[static_cast<std::size_t>(i)];
      if (adj.empty()) continue;
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(cols);
      for (auto j : adj) mean += x.row(static_cast<Eigen::Index>(j));
      next.row(i) = (1.0 - s) * x.row(i) + s * mean / static_cast<double>(adj.size());
    }
    x = next;
  }
  return x;
}

}  // namespace

void SynthParams::validate() const {
  if (power_nodes < 2 || gas_nodes < 1) throw InputError("need at least 2 power nodes and 1 gas node");
  if (days < 1 || hours < 1) throw InputError("days and hours must be positive");
  if (hours_per_period < 1 || hours % hours_per_period != 0) throw InputError("hours_per_period must divide hours");
  if (noise < 0.0 || seasonal_amplitude < 0.0 || diurnal_amplitude < 0.0) throw InputError("amplitudes must be nonnegative");
  if (seasonal_amplitude >= 1.0 || diurnal_amplitude >= 1.0) throw InputError("amplitudes must stay below 1");
  if (spatial_correlation < 0.0 || spatial_correlation > 1.0) throw InputError("spatial_correlation must lie in [0,1]");
  if (smoothing_passes < 0) throw InputError("smoothing_passes must be nonnegative");
  if (coupling_per_power < 1) throw InputError("coupling_per_power must be positive");
  if (gas_storage > 0 && storage_per_gas < 1) throw InputError("storage_per_gas must be positive");
  if (rps_share < 0.0 || rps_share > 1.0) throw InputError("rps_share must lie in [0,1]");
  if (weather_ratio < 0.0) throw InputError("weather_ratio must be nonnegative");
  if (weather_persistence < 0.0 || weather_persistence >= 1.0) {
    throw InputError("weather_persistence must lie in [0,1)");
  }
}

double temperature_proxy(int calendar_day) {
  return std::cos(2.0 * std::numbers::pi * (calendar_day - 196) / 365.0);
}

SyntheticCase generate_synthetic(const SynthParams& p, std::uint64_t seed) {
  p.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double pi = std::numbers::pi;
  const std::size_t nE = p.power_nodes;
  const std::size_t nG = p.gas_nodes;

  const auto power_pts = place(nE, rng);
  const auto gas_pts = place(nG, rng);
  const auto storage_pts = place(p.gas_storage, rng);
  std::vector<Edge> spare;
  const auto target_e = static_cast<std::size_t>(std::lround(p.power_edge_ratio * static_cast<double>(nE)));
  const auto target_g = static_cast<std::size_t>(std::lround(p.gas_edge_ratio * static_cast<double>(nG)));

  SyntheticCase out;
  auto& ds = out.dataset;
  ds.power_graph = spatial_graph(power_pts, target_e, &spare);
  ds.gas_graph = spatial_graph(gas_pts, target_g, nullptr);
  for (std::size_t z = 0; z < nE; ++z)
    for (auto g : nearest(power_pts[z], gas_pts, p.coupling_per_power)) ds.coupling_edges.push_back({z, g});

  std::vector<double> scale(nE), wind_f(nE), solar_f(nE), gas_base(nG);
  for (auto& s : scale) s = 800.0 + 800.0 * u(rng);
  for (auto& s : wind_f) s = 0.8 + 0.4 * u(rng);
  for (auto& s : solar_f) s = 0.85 + 0.25 * u(rng);
  for (auto& s : gas_base) s = 4e3 + 3e3 * u(rng);

  const int H = p.hours;
  const double s = p.spatial_correlation;
  // weather draws use their own stream so the layout does not depend on them
  std::mt19937_64 weather_rng(seed ^ 0x77656174686572ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double amp = p.weather_ratio * p.noise;
  const double rho = p.weather_persistence;
  const double innovation = std::sqrt(1.0 - rho * rho);
  std::array<double, 4> weather{};  // temperature, wind regime, wind front, cloud
  for (auto& w : weather) w = normal(weather_rng);
  for (std::size_t d = 0; d < p.days; ++d) {
    if (d > 0)
      for (auto& w : weather) w = rho * w + innovation * normal(weather_rng);
    const auto [warm, windy, front, cloud] = weather;
    const int c = static_cast<int>((p.start_day + d) % 365);
    const double temp = temperature_proxy(c);
    DaySignal day;
    day.day_index = static_cast<int>(d);
    day.electricity.resize(static_cast<Eigen::Index>(nE), H);
    day.wind_cf.resize(static_cast<Eigen::Index>(nE), H);
    day.solar_cf.resize(static_cast<Eigen::Index>(nE), H);
    day.gas.resize(static_cast<Eigen::Index>(nG), 1);
    Eigen::MatrixXd ne, nw, ns, ng;
    if (p.noise > 0.0) {
      ne = smoothed_noise(ds.power_graph, H, s, p.smoothing_passes, rng);
      nw = smoothed_noise(ds.power_graph, H, s, p.smoothing_passes, rng);
      ns = smoothed_noise(ds.power_graph, H, s, p.smoothing_passes, rng);
      ng = smoothed_noise(ds.gas_graph, 1, s, p.smoothing_passes, rng);
    } else {
      ne = nw = ns = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nE), H);
      ng = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nG), 1);
    }
    const double seasonal = 1.0 + p.seasonal_amplitude * temp;
    const double wind_season = 0.38 + 0.12 * std::cos(2.0 * pi * (c - 15) / 365.0);
    const double solar_season = 0.65 + 0.15 * temp;
    for (std::size_t z = 0; z < nE; ++z) {
      const auto zi = static_cast<Eigen::Index>(z);
      for (int h = 0; h < H; ++h) {
        const double hour = 24.0 * (h + 0.5) / H;
        const double diurnal = 1.0 + p.diurnal_amplitude * std::sin(2.0 * pi * (hour - 10.0) / 24.0);
        const double load = seasonal * diurnal * (1.0 + 0.5 * amp * warm * temp);
        day.electricity(zi, h) = std::max(0.0, scale[z] * (load + p.noise * ne(zi, h)));
        const double regime = std::max(0.0, 1.0 + 2.0 * amp * windy + 1.5 * amp * front * (2.0 * power_pts[z].first - 1.0));
        const double wind =
            regime * wind_f[z] * wind_season * (1.0 + 0.1 * std::cos(2.0 * pi * (hour - 3.0) / 24.0));
        day.wind_cf(zi, h) = std::clamp(wind + p.noise * nw(zi, h), 0.0, 1.0);
        const double sun = std::max(0.0, std::sin(pi * (hour - 6.0) / 12.0));
        const double solar = std::max(0.0, 1.0 + 1.5 * amp * cloud) * solar_f[z] * solar_season * sun;
        day.solar_cf(zi, h) = sun > 0.0 ? std::clamp(solar + p.noise * sun * ns(zi, h), 0.0, 1.0) : 0.0;
      }
    }
    for (std::size_t g = 0; g < nG; ++g) {
      const auto gi = static_cast<Eigen::Index>(g);
      day.gas(gi, 0) = std::max(0.0, gas_base[g] * (1.0 - p.gas_temperature_sensitivity * (temp + amp * warm) + p.noise * ng(gi, 0)));
    }
    ds.days.push_back(std::move(day));
  }
  validate(ds);

  // -- planning instance -----------------------------------------------------
  auto& in = out.instance;
  const double prorate = static_cast<double>(p.days) / 365.0;
  in.hours_per_period = p.hours_per_period;
  in.rps_share = p.rps_share;
  in.power.zones = nE;
  in.power.shed_penalty = 5000.0;
  in.power.plant_types = {
      {"ng_cc", 200.0, 22e6 * prorate, 2.4e6 * prorate, 3.0, 7.0, 0.15, Resource::None, true},
      {"ng_ct", 100.0, 8e6 * prorate, 1e6 * prorate, 6.0, 10.5, 1.0, Resource::None, true},
      {"wind", 100.0, 16e6 * prorate, 4e6 * prorate, 0.0, 0.0, 1.0, Resource::Wind, false},
      {"solar", 100.0, 9.5e6 * prorate, 1.5e6 * prorate, 0.0, 0.0, 1.0, Resource::Solar, false},
  };
  double peak_total = 0.0;
  for (std::size_t z = 0; z < nE; ++z) {
    const double peak = scale[z] * (1.0 + p.seasonal_amplitude) * (1.0 + p.diurnal_amplitude);
    peak_total += peak;
    const int cc = static_cast<int>(std::ceil(0.8 * peak / 200.0));
    in.power.plants.push_back({z, 0, cc, 2});
    in.power.plants.push_back({z, 1, 0, 4});
    in.power.plants.push_back({z, 2, 0, 15});
    in.power.plants.push_back({z, 3, 0, 15});
    in.power.storage.push_back({z, 50.0, 200.0, 5e6 * prorate, 0, 6, 0.92, 0.92});
  }
  for (const auto& e : ds.power_graph.edges()) {
    in.power.lines.push_back({e.u, e.v, 0.25 * (scale[e.u] + scale[e.v]), true, 0.0});
  }
  for (std::size_t k = 0; k < std::min(p.candidate_lines, spare.size()); ++k) {
    in.power.lines.push_back({spare[k].u, spare[k].v, 500.0, false, 4e6 * prorate});
  }

  // gas supply covers non-power peak plus fuel for most of the power peak
  double gas_base_total = 0.0;
  for (double b : gas_base) gas_base_total += b;
  const double nonpower_peak = gas_base_total * (1.0 + p.gas_temperature_sensitivity);
  const double fuel_peak = 7.0 * 24.0 * 0.8 * peak_total;
  const double supply_total = 1.1 * (nonpower_peak + fuel_peak);
  in.gas.shed_penalty = 60.0;
  for (std::size_t g = 0; g < nG; ++g) {
    const double share = gas_base[g] / gas_base_total;
    in.gas.nodes.push_back({supply_total * share, 3.0, 0.1 * supply_total * share, 2e6 * prorate, 3});
  }
  for (const auto& e : ds.gas_graph.edges()) {
    in.gas.pipelines.push_back({e.u, e.v, 0.3 * supply_total / static_cast<double>(nG),
                                0.1 * supply_total / static_cast<double>(nG), 1e6 * prorate, 2});
  }
  if (p.gas_storage > 0) {
    std::vector<GasStorage> st(p.gas_storage);
    for (std::size_t g = 0; g < nG; ++g)
      for (auto m : nearest(gas_pts[g], storage_pts, p.storage_per_gas)) st[m].nodes.push_back(g);
    for (auto& m : st) {
      m.capacity = 30.0 * gas_base_total / static_cast<double>(p.gas_storage);
      m.injection = 0.05 * supply_total / static_cast<double>(p.gas_storage);
      m.withdrawal = 0.1 * supply_total / static_cast<double>(p.gas_storage);
      if (!m.nodes.empty()) in.gas.storage.push_back(m);
    }
  }
  in.coupling.edges = ds.coupling_edges;
  in.coupling.e_g = 0.0531;
  in.coupling.e_p = 0.0531;
  in.validate(ds);
  return out;
}

}  // namespace games
