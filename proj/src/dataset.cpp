#include "games/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"

#include "games/errors.hpp"
#include "games/format.hpp"

namespace games {

namespace fs = std::filesystem;
using json = nlohmann::json;

SignalDims dims_of(const DaySignal& day) {
  return SignalDims{day.electricity.rows(), day.gas.rows(),      day.electricity.cols(),
                    day.wind_cf.cols(),     day.solar_cf.cols(), day.gas.cols()};
}

double ChannelScaling::forward(double x) const {
  if (constant) return 0.0;
  return 2.0 * (x - lo) / (hi - lo) - 1.0;
}

double ChannelScaling::inverse(double y) const {
  if (constant) return lo;
  return lo + 0.5 * (y + 1.0) * (hi - lo);
}

SignalDims MultiResolutionDataset::dims() const {
  if (days.empty()) {
    return SignalDims{static_cast<Eigen::Index>(power_graph.node_count()),
                      static_cast<Eigen::Index>(gas_graph.node_count()), 0, 0, 0, 0};
  }
  return dims_of(days.front());
}

void validate(const MultiResolutionDataset& ds) {
  const auto n_e = static_cast<Eigen::Index>(ds.power_graph.node_count());
  const auto n_g = static_cast<Eigen::Index>(ds.gas_graph.node_count());
  for (const auto& c : ds.coupling_edges) {
    if (static_cast<Eigen::Index>(c.power_node) >= n_e ||
        static_cast<Eigen::Index>(c.gas_node) >= n_g) {
      throw InputError("coupling edge (" + std::to_string(c.power_node) + "," +
                       std::to_string(c.gas_node) + ") references a missing node");
    }
  }
  if (ds.days.empty()) return;
  const SignalDims ref = dims_of(ds.days.front());
  if (ref.n_power != n_e || ref.n_gas != n_g) {
    throw InputError("day signals do not match graph node counts");
  }
  if (ds.days.front().wind_cf.rows() != n_e || ds.days.front().solar_cf.rows() != n_e) {
    throw InputError("capacity factor data must cover every power node");
  }
  for (const auto& day : ds.days) {
    if (!(dims_of(day) == ref) || day.wind_cf.rows() != n_e || day.solar_cf.rows() != n_e) {
      throw InputError("day " + std::to_string(day.day_index) + " has inconsistent shape");
    }
    const bool finite = day.electricity.allFinite() && day.wind_cf.allFinite() &&
                        day.solar_cf.allFinite() && day.gas.allFinite();
    if (!finite) throw InputError("non-finite value on day " + std::to_string(day.day_index));
    if (ds.normalization.applied) continue;
    if ((day.electricity.array() < 0.0).any() || (day.gas.array() < 0.0).any()) {
      throw InputError("negative demand on day " + std::to_string(day.day_index));
    }
    auto out_of_unit = [](const Eigen::MatrixXd& m) {
      return (m.array() < 0.0).any() || (m.array() > 1.0).any();
    };
    if (out_of_unit(day.wind_cf) || out_of_unit(day.solar_cf)) {
      throw InputError("capacity factor outside [0,1] on day " + std::to_string(day.day_index));
    }
  }
}

Graph assemble_joint_graph(const MultiResolutionDataset& ds) {
  const std::size_t n_e = ds.power_graph.node_count();
  const std::size_t n_g = ds.gas_graph.node_count();
  std::vector<Edge> edges = ds.power_graph.edges();
  for (const auto& e : ds.gas_graph.edges()) edges.push_back({n_e + e.u, n_e + e.v});
  for (const auto& c : ds.coupling_edges) {
    if (c.power_node >= n_e || c.gas_node >= n_g) {
      throw InputError("coupling edge (" + std::to_string(c.power_node) + "," +
                       std::to_string(c.gas_node) + ") references a missing node");
    }
    edges.push_back({c.power_node, n_e + c.gas_node});
  }
  return Graph(n_e + n_g, edges);
}

namespace {

template <typename Get>
ChannelScaling fit_scaling(const std::vector<DaySignal>& days, Get get) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& d : days) {
    const Eigen::MatrixXd& m = get(d);
    if (m.size() == 0) continue;
    lo = std::min(lo, m.minCoeff());
    hi = std::max(hi, m.maxCoeff());
  }
  ChannelScaling s;
  if (!(hi > lo)) {
    s.lo = std::isfinite(lo) ? lo : 0.0;
    s.hi = s.lo;
    s.constant = true;
  } else {
    s.lo = lo;
    s.hi = hi;
  }
  return s;
}

Eigen::MatrixXd apply(const Eigen::MatrixXd& m, const ChannelScaling& s, bool forward) {
  return m.unaryExpr([&](double x) { return forward ? s.forward(x) : s.inverse(x); });
}

}  // namespace

MultiResolutionDataset normalize(const MultiResolutionDataset& dataset) {
  if (dataset.normalization.applied) return dataset;
  if (dataset.days.empty()) throw InputError("cannot normalize an empty dataset");
  MultiResolutionDataset out = dataset;
  Normalization& n = out.normalization;
  n.electricity = fit_scaling(dataset.days, [](const DaySignal& d) -> const Eigen::MatrixXd& { return d.electricity; });
  n.wind = fit_scaling(dataset.days, [](const DaySignal& d) -> const Eigen::MatrixXd& { return d.wind_cf; });
  n.solar = fit_scaling(dataset.days, [](const DaySignal& d) -> const Eigen::MatrixXd& { return d.solar_cf; });
  n.gas = fit_scaling(dataset.days, [](const DaySignal& d) -> const Eigen::MatrixXd& { return d.gas; });
  n.applied = true;
  for (auto& d : out.days) {
    d.electricity = apply(d.electricity, n.electricity, true);
    d.wind_cf = apply(d.wind_cf, n.wind, true);
    d.solar_cf = apply(d.solar_cf, n.solar, true);
    d.gas = apply(d.gas, n.gas, true);
  }
  return out;
}

MultiResolutionDataset denormalize(const MultiResolutionDataset& dataset) {
  if (!dataset.normalization.applied) return dataset;
  MultiResolutionDataset out = dataset;
  const Normalization& n = dataset.normalization;
  for (auto& d : out.days) {
    d.electricity = apply(d.electricity, n.electricity, false);
    d.wind_cf = apply(d.wind_cf, n.wind, false);
    d.solar_cf = apply(d.solar_cf, n.solar, false);
    d.gas = apply(d.gas, n.gas, false);
  }
  out.normalization = Normalization{};
  return out;
}

MultiResolutionDataset select_days(const MultiResolutionDataset& dataset,
                                   const std::vector<std::size_t>& indices) {
  MultiResolutionDataset out;
  out.power_graph = dataset.power_graph;
  out.gas_graph = dataset.gas_graph;
  out.coupling_edges = dataset.coupling_edges;
  out.normalization = dataset.normalization;
  out.days.reserve(indices.size());
  for (auto i : indices) out.days.push_back(dataset.days.at(i));
  return out;
}

// ---------------------------------------------------------------------------
// file I/O

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

double parse_number(const std::string& s, const fs::path& path, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw InputError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

/// day -> node -> values
using ChannelTable = std::map<int, std::map<std::size_t, std::vector<double>>>;

ChannelTable read_channel_csv(const fs::path& path, std::size_t& width) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "day" || header[1] != "node") {
    throw InputError(path.string() + ": header must start with day,node");
  }
  width = header.size() - 2;
  ChannelTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " columns");
    }
    const int day = static_cast<int>(parse_number(cells[0], path, lineno));
    const auto node = static_cast<std::size_t>(parse_number(cells[1], path, lineno));
    std::vector<double> values(width);
    for (std::size_t k = 0; k < width; ++k) values[k] = parse_number(cells[k + 2], path, lineno);
    table[day][node] = std::move(values);
  }
  return table;
}

void write_channel_csv(const fs::path& path, const std::vector<DaySignal>& days,
                       const Eigen::MatrixXd DaySignal::*member) {
  std::ostringstream out;
  const Eigen::Index width = days.empty() ? 0 : (days.front().*member).cols();
  out << "day,node";
  for (Eigen::Index t = 0; t < width; ++t) out << ",t" << t;
  out << '\n';
  for (const auto& d : days) {
    const Eigen::MatrixXd& m = d.*member;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      out << d.day_index << ',' << i;
      for (Eigen::Index t = 0; t < m.cols(); ++t) out << ',' << format_double(m(i, t));
      out << '\n';
    }
  }
  write_text(path, out.str());
}

Eigen::MatrixXd table_matrix(const ChannelTable& table, int day, std::size_t rows, std::size_t width,
                             const fs::path& path) {
  auto it = table.find(day);
  if (it == table.end()) throw InputError(path.string() + ": missing day " + std::to_string(day));
  Eigen::MatrixXd m(rows, width);
  for (std::size_t i = 0; i < rows; ++i) {
    auto row = it->second.find(i);
    if (row == it->second.end()) {
      throw InputError(path.string() + ": missing node " + std::to_string(i) + " on day " +
                       std::to_string(day));
    }
    for (std::size_t t = 0; t < width; ++t) m(i, t) = row->second[t];
  }
  if (it->second.size() != rows) {
    throw InputError(path.string() + ": unexpected node count on day " + std::to_string(day));
  }
  return m;
}

}  // namespace

Graph load_graph(const fs::path& path) {
  const json j = read_json(path);
  try {
    const auto n = j.at("nodes").get<std::size_t>();
    std::vector<Edge> edges;
    std::vector<double> dist;
    std::size_t with_dist = 0;
    for (const auto& e : j.at("edges")) {
      if (e.size() != 2 && e.size() != 3) throw InputError(path.string() + ": edge needs 2 or 3 entries");
      edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
      if (e.size() == 3) {
        dist.push_back(e[2].get<double>());
        ++with_dist;
      }
    }
    if (with_dist != 0 && with_dist != edges.size()) {
      throw InputError(path.string() + ": either all or no edges carry a distance");
    }
    return with_dist ? Graph(n, edges, dist) : Graph(n, edges);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void save_graph(const Graph& graph, const fs::path& path) {
  json j;
  j["nodes"] = graph.node_count();
  j["edges"] = json::array();
  for (std::size_t k = 0; k < graph.edge_count(); ++k) {
    const auto& e = graph.edges()[k];
    if (graph.has_distances()) {
      j["edges"].push_back({e.u, e.v, graph.distance(k)});
    } else {
      j["edges"].push_back({e.u, e.v});
    }
  }
  write_text(path, j.dump(1) + "\n");
}

std::vector<CouplingEdge> load_coupling(const fs::path& path) {
  const json j = read_json(path);
  std::vector<CouplingEdge> out;
  try {
    for (const auto& e : j.at("edges")) {
      if (e.size() != 2) throw InputError(path.string() + ": coupling edge needs 2 entries");
      out.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
    }
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return out;
}

void save_coupling(const std::vector<CouplingEdge>& edges, const fs::path& path) {
  json j;
  j["edges"] = json::array();
  for (const auto& e : edges) j["edges"].push_back({e.power_node, e.gas_node});
  write_text(path, j.dump(1) + "\n");
}

MultiResolutionDataset load_dataset(const fs::path& dir) {
  MultiResolutionDataset ds;
  ds.power_graph = load_graph(dir / "power.json");
  ds.gas_graph = load_graph(dir / "gas.json");
  ds.coupling_edges = load_coupling(dir / "coupling.json");
  std::size_t w_e = 0, w_w = 0, w_s = 0, w_g = 0;
  const auto elec = read_channel_csv(dir / "electricity.csv", w_e);
  const auto wind = read_channel_csv(dir / "wind.csv", w_w);
  const auto solar = read_channel_csv(dir / "solar.csv", w_s);
  const auto gas = read_channel_csv(dir / "gas.csv", w_g);
  const std::size_t n_e = ds.power_graph.node_count();
  const std::size_t n_g = ds.gas_graph.node_count();
  for (const auto& [day, nodes] : elec) {
    DaySignal d;
    d.day_index = day;
    d.electricity = table_matrix(elec, day, n_e, w_e, dir / "electricity.csv");
    d.wind_cf = table_matrix(wind, day, n_e, w_w, dir / "wind.csv");
    d.solar_cf = table_matrix(solar, day, n_e, w_s, dir / "solar.csv");
    d.gas = table_matrix(gas, day, n_g, w_g, dir / "gas.csv");
    ds.days.push_back(std::move(d));
  }
  if (wind.size() != elec.size() || solar.size() != elec.size() || gas.size() != elec.size()) {
    throw InputError(dir.string() + ": channel files cover different day sets");
  }
  validate(ds);
  return ds;
}

void save_dataset(const MultiResolutionDataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  save_graph(ds.power_graph, dir / "power.json");
  save_graph(ds.gas_graph, dir / "gas.json");
  save_coupling(ds.coupling_edges, dir / "coupling.json");
  write_channel_csv(dir / "electricity.csv", ds.days, &DaySignal::electricity);
  write_channel_csv(dir / "wind.csv", ds.days, &DaySignal::wind_cf);
  write_channel_csv(dir / "solar.csv", ds.days, &DaySignal::solar_cf);
  write_channel_csv(dir / "gas.csv", ds.days, &DaySignal::gas);
}

}  // namespace games
