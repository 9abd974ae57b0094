// Constraint re-evaluation from decoded values. Written against the instance
// and dataset only; nothing here reads the assembled SparseLp.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>

#include "games/gtep.hpp"

namespace games {

double FeasibilityReport::max_violation() const {
  double m = 0.0;
  for (const auto& [_, v] : families) m = std::max(m, v.value);
  return m;
}

std::string FeasibilityReport::worst_family() const {
  std::string name;
  double m = -1.0;
  for (const auto& [f, v] : families) {
    if (v.value > m) {
      m = v.value;
      name = f;
    }
  }
  return name;
}

namespace {

class Recorder {
 public:
  explicit Recorder(FeasibilityReport& r) : report_(r) {}

  void touch(const std::string& family) { report_.families.emplace(family, Violation{}); }

  // equality or <= 0 residual, scaled by the magnitudes involved
  void record(const std::string& family, double residual, std::initializer_list<double> magnitudes,
              const std::string& where) {
    double scale = 1.0;
    for (double m : magnitudes) scale = std::max(scale, std::abs(m));
    const double v = std::abs(residual) / scale;
    auto& slot = report_.families[family];
    if (v > slot.value) {
      slot.value = v;
      slot.where = where;
    }
  }

  void at_most(const std::string& family, double lhs, double rhs, std::initializer_list<double> terms,
               const std::string& where) {
    touch(family);
    if (lhs > rhs) record(family, lhs - rhs, terms, where);
  }

 private:
  FeasibilityReport& report_;
};

std::string at(std::initializer_list<std::pair<const char*, std::size_t>> parts) {
  std::string s;
  for (const auto& [name, v] : parts) {
    if (!s.empty()) s += ' ';
    s += name;
    s += ' ';
    s += std::to_string(v);
  }
  return s;
}

}  // namespace

FeasibilityReport check_feasibility(const GtepInstance& in, const GtepSolution& sol,
                                    const MultiResolutionDataset& dataset) {
  FeasibilityReport report;
  Recorder rec(report);
  const MultiResolutionDataset raw = dataset.normalization.applied ? denormalize(dataset) : dataset;
  const auto& pw = in.power;
  const auto& gs = in.gas;
  const auto& inv = sol.investment;
  const int hpp = in.hours_per_period;
  const auto links = storage_links(in);

  // investment domain
  rec.touch("investment");
  auto in_range = [&](int v, int lo, int hi, const std::string& where) {
    if (v < lo) rec.record("investment", lo - v, {}, where);
    if (v > hi) rec.record("investment", v - hi, {}, where);
  };
  for (std::size_t k = 0; k < pw.plants.size(); ++k) {
    in_range(inv.new_units[k], 0, pw.plants[k].max_new_units, at({{"new plant", k}}));
    in_range(inv.retired_units[k], 0, pw.plants[k].existing_units, at({{"retired plant", k}}));
  }
  for (std::size_t l = 0; l < pw.lines.size(); ++l)
    in_range(inv.line_built[l], pw.lines[l].existing ? 1 : 0, 1, at({{"line", l}}));
  for (std::size_t s = 0; s < pw.storage.size(); ++s)
    in_range(inv.storage_new[s], 0, pw.storage[s].max_new_units, at({{"storage", s}}));
  for (std::size_t g = 0; g < gs.nodes.size(); ++g)
    in_range(inv.supply_expansions[g], 0, gs.nodes[g].max_expansions, at({{"supply node", g}}));
  for (std::size_t q = 0; q < gs.pipelines.size(); ++q)
    in_range(inv.pipeline_expansions[q], 0, gs.pipelines[q].max_expansions, at({{"pipeline", q}}));

  auto units = [&](std::size_t k) {
    return static_cast<double>(pw.plants[k].existing_units - inv.retired_units[k] + inv.new_units[k]);
  };
  auto storage_units = [&](std::size_t s) {
    return static_cast<double>(pw.storage[s].existing_units + inv.storage_new[s]);
  };

  double vre_energy = 0.0;
  double demand_energy = 0.0;
  double shed_energy = 0.0;
  double emission = 0.0;
  std::vector<double> net_withdrawal(gs.storage.size(), 0.0);

  for (const auto& op : sol.days) {
    const DayProfile pr = day_profile(in, raw, op.day);
    const auto P = pr.demand.cols();
    const std::size_t day = op.day;
    auto nonneg = [&](double v, const std::string& where) {
      rec.touch("bounds");
      if (v < 0.0) rec.record("bounds", v, {}, where);
    };

    for (Eigen::Index p = 0; p < P; ++p) {
      const std::size_t pp = static_cast<std::size_t>(p);
      // nodal balance
      std::vector<double> supply(pw.zones, 0.0);
      std::vector<double> magnitude(pw.zones, 0.0);
      auto add = [&](std::size_t z, double v) {
        supply[z] += v;
        magnitude[z] = std::max(magnitude[z], std::abs(v));
      };
      for (std::size_t k = 0; k < pw.plants.size(); ++k) add(pw.plants[k].node, op.generation(k, p));
      for (std::size_t l = 0; l < pw.lines.size(); ++l) {
        add(pw.lines[l].to, op.flow(l, p));
        add(pw.lines[l].from, -op.flow(l, p));
      }
      for (std::size_t s = 0; s < pw.storage.size(); ++s) {
        add(pw.storage[s].node, op.discharge(s, p));
        add(pw.storage[s].node, -op.charge(s, p));
      }
      for (std::size_t z = 0; z < pw.zones; ++z) {
        add(z, op.shed(z, p));
        const double demand = pr.demand(z, p);
        rec.touch("power_balance");
        rec.record("power_balance", supply[z] - demand, {demand, magnitude[z]},
                   at({{"zone", z}, {"day", day}, {"period", pp}}));
        nonneg(op.shed(z, p), at({{"shed zone", z}, {"day", day}, {"period", pp}}));
        rec.at_most("bounds", op.shed(z, p), demand, {demand}, at({{"shed zone", z}, {"day", day}, {"period", pp}}));
        demand_energy += op.weight * hpp * demand;
        shed_energy += op.weight * hpp * op.shed(z, p);
      }
      // generation limits
      for (std::size_t k = 0; k < pw.plants.size(); ++k) {
        const auto& pl = pw.plants[k];
        const auto& t = pw.plant_types[pl.type];
        double cf = 1.0;
        if (t.resource == Resource::Wind) cf = pr.wind(pl.node, p);
        if (t.resource == Resource::Solar) cf = pr.solar(pl.node, p);
        const double cap = t.unit_capacity_mw * cf * units(k);
        const double g = op.generation(k, p);
        nonneg(g, at({{"generation plant", k}, {"day", day}, {"period", pp}}));
        rec.at_most("generation_limit", g, cap, {cap, g}, at({{"plant", k}, {"day", day}, {"period", pp}}));
        if (t.is_vre()) vre_energy += op.weight * hpp * g;
        if (p > 0 && !t.is_vre() && t.ramp_rate * hpp < 1.0) {
          const double limit = t.ramp_rate * hpp * t.unit_capacity_mw * units(k);
          const double step = g - op.generation(k, p - 1);
          rec.at_most("ramping", std::abs(step), limit, {limit, g}, at({{"plant", k}, {"day", day}, {"period", pp}}));
        }
      }
      // lines
      for (std::size_t l = 0; l < pw.lines.size(); ++l) {
        const double cap = pw.lines[l].capacity_mw * inv.line_built[l];
        rec.at_most("line_limits", std::abs(op.flow(l, p)), cap, {cap}, at({{"line", l}, {"day", day}, {"period", pp}}));
      }
      // storage
      for (std::size_t s = 0; s < pw.storage.size(); ++s) {
        const auto& st = pw.storage[s];
        const Eigen::Index prev = (p + P - 1) % P;
        const double ch = op.charge(s, p);
        const double dis = op.discharge(s, p);
        const double delta = hpp * (st.charge_eff * ch - dis / st.discharge_eff);
        const double res = op.soc(s, p) - op.soc(s, prev) - delta;
        rec.touch("storage_dynamics");
        rec.record("storage_dynamics", res, {op.soc(s, p), op.soc(s, prev), delta},
                   at({{"storage", s}, {"day", day}, {"period", pp}}));
        const std::string where = at({{"storage", s}, {"day", day}, {"period", pp}});
        for (double v : {ch, dis, op.soc(s, p)}) nonneg(v, where);
        const double pcap = st.power_mw * storage_units(s);
        const double ecap = st.energy_mwh * storage_units(s);
        rec.at_most("storage_limits", ch, pcap, {pcap}, where);
        rec.at_most("storage_limits", dis, pcap, {pcap}, where);
        rec.at_most("storage_limits", op.soc(s, p), ecap, {ecap}, where);
      }
    }

    // gas balance
    std::vector<double> net(gs.nodes.size(), 0.0);
    std::vector<double> magnitude(gs.nodes.size(), 0.0);
    auto add = [&](std::size_t g, double v) {
      net[g] += v;
      magnitude[g] = std::max(magnitude[g], std::abs(v));
    };
    for (std::size_t g = 0; g < gs.nodes.size(); ++g) {
      add(g, op.gas_supply[g]);
      add(g, op.gas_shed[g]);
    }
    for (std::size_t q = 0; q < gs.pipelines.size(); ++q) {
      add(gs.pipelines[q].to, op.pipe_flow[q]);
      add(gs.pipelines[q].from, -op.pipe_flow[q]);
    }
    for (std::size_t b = 0; b < links.size(); ++b) {
      add(links[b].second, op.withdraw[b]);
      add(links[b].second, -op.inject[b]);
      nonneg(op.withdraw[b], at({{"withdraw link", b}, {"day", day}}));
      nonneg(op.inject[b], at({{"inject link", b}, {"day", day}}));
    }
    for (std::size_t e = 0; e < in.coupling.edges.size(); ++e) {
      add(in.coupling.edges[e].gas_node, -op.fuel[e]);
      nonneg(op.fuel[e], at({{"fuel edge", e}, {"day", day}}));
    }
    for (std::size_t g = 0; g < gs.nodes.size(); ++g) {
      const double demand = pr.gas_demand[g];
      rec.touch("gas_balance");
      rec.record("gas_balance", net[g] - demand, {demand, magnitude[g]}, at({{"gas node", g}, {"day", day}}));
      const auto& gn = gs.nodes[g];
      const double cap = gn.supply_capacity + gn.expansion_capacity * inv.supply_expansions[g];
      nonneg(op.gas_supply[g], at({{"supply node", g}, {"day", day}}));
      nonneg(op.gas_shed[g], at({{"gas shed node", g}, {"day", day}}));
      rec.at_most("bounds", op.gas_shed[g], demand, {demand}, at({{"gas shed node", g}, {"day", day}}));
      rec.at_most("gas_supply", op.gas_supply[g], cap, {cap}, at({{"gas node", g}, {"day", day}}));
      emission += op.weight * in.coupling.e_g * (demand - op.gas_shed[g]);
    }
    for (std::size_t q = 0; q < gs.pipelines.size(); ++q) {
      const auto& pq = gs.pipelines[q];
      const double cap = pq.capacity + pq.expansion_capacity * inv.pipeline_expansions[q];
      rec.at_most("pipeline_limits", std::abs(op.pipe_flow[q]), cap, {cap}, at({{"pipeline", q}, {"day", day}}));
    }
    for (std::size_t m = 0; m < gs.storage.size(); ++m) {
      double w = 0.0, i = 0.0;
      for (std::size_t b = 0; b < links.size(); ++b) {
        if (links[b].first != m) continue;
        w += op.withdraw[b];
        i += op.inject[b];
      }
      rec.at_most("gas_storage", w, gs.storage[m].withdrawal, {gs.storage[m].withdrawal}, at({{"withdraw storage", m}, {"day", day}}));
      rec.at_most("gas_storage", i, gs.storage[m].injection, {gs.storage[m].injection}, at({{"inject storage", m}, {"day", day}}));
      net_withdrawal[m] += op.weight * (w - i);
    }
    // coupling: fuel delivered to a zone equals fuel burned there
    std::vector<double> delivered(pw.zones, 0.0);
    std::vector<double> burned(pw.zones, 0.0);
    for (std::size_t e = 0; e < in.coupling.edges.size(); ++e) {
      delivered[in.coupling.edges[e].power_node] += op.fuel[e];
      emission += op.weight * in.coupling.e_p * op.fuel[e];
    }
    for (std::size_t k = 0; k < pw.plants.size(); ++k) {
      const auto& t = pw.plant_types[pw.plants[k].type];
      if (t.ng_fired) burned[pw.plants[k].node] += t.heat_rate * hpp * op.generation.row(k).sum();
    }
    for (std::size_t z = 0; z < pw.zones; ++z) {
      rec.touch("coupling");
      rec.record("coupling", delivered[z] - burned[z], {delivered[z], burned[z]}, at({{"zone", z}, {"day", day}}));
    }
  }
  for (std::size_t m = 0; m < gs.storage.size(); ++m) {
    rec.at_most("gas_storage", net_withdrawal[m], gs.storage[m].capacity, {gs.storage[m].capacity},
                at({{"budget storage", m}}));
  }
  if (in.rps_share > 0.0) {
    const double need = in.rps_share * (demand_energy - shed_energy);
    rec.at_most("rps", need, vre_energy, {need, vre_energy}, "horizon");
  }
  const double eta = in.coupling.eta;
  if (std::isfinite(eta)) {
    rec.at_most("emission", emission, eta, {eta, emission}, "horizon");
  }
  return report;
}

}  // namespace games
