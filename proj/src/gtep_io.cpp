#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"

#include "games/errors.hpp"
#include "games/format.hpp"
#include "games/gtep.hpp"

namespace games {

using nlohmann::json;

namespace {

Resource parse_resource(const std::string& s) {
  if (s == "none") return Resource::None;
  if (s == "wind") return Resource::Wind;
  if (s == "solar") return Resource::Solar;
  throw InputError("unknown resource '" + s + "'");
}

const char* resource_name(Resource r) {
  switch (r) {
    case Resource::Wind: return "wind";
    case Resource::Solar: return "solar";
    default: return "none";
  }
}

double number_or_inf(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return kInf;
  return j.at(key).get<double>();
}

}  // namespace

GtepInstance load_instance(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open instance " + path.string());
  GtepInstance in;
  try {
    const json j = json::parse(f);
    in.hours_per_period = j.value("hours_per_period", 1);
    const auto& pj = j.at("power");
    in.power.zones = pj.at("zones").get<std::size_t>();
    in.power.shed_penalty = pj.at("shed_penalty").get<double>();
    for (const auto& t : pj.at("plant_types")) {
      PlantType pt;
      pt.name = t.at("name").get<std::string>();
      pt.unit_capacity_mw = t.at("unit_capacity_mw").get<double>();
      pt.invest_cost = t.value("invest_cost", 0.0);
      pt.fom_cost = t.value("fom_cost", 0.0);
      pt.variable_cost = t.value("variable_cost", 0.0);
      pt.heat_rate = t.value("heat_rate", 0.0);
      pt.ramp_rate = t.value("ramp_rate", 1.0);
      pt.resource = parse_resource(t.value("resource", std::string("none")));
      pt.ng_fired = t.value("ng_fired", false);
      in.power.plant_types.push_back(pt);
    }
    for (const auto& p : pj.at("plants")) {
      Plant pl;
      pl.node = p.at("node").get<std::size_t>();
      const auto type = p.at("type").get<std::string>();
      const auto& types = in.power.plant_types;
      auto it = std::find_if(types.begin(), types.end(), [&](const PlantType& t) { return t.name == type; });
      if (it == types.end()) throw InputError("unknown plant type '" + type + "'");
      pl.type = static_cast<std::size_t>(it - types.begin());
      pl.existing_units = p.value("existing_units", 0);
      pl.max_new_units = p.value("max_new_units", 0);
      in.power.plants.push_back(pl);
    }
    for (const auto& l : pj.value("lines", json::array())) {
      Line ln;
      ln.from = l.at("from").get<std::size_t>();
      ln.to = l.at("to").get<std::size_t>();
      ln.capacity_mw = l.at("capacity_mw").get<double>();
      ln.existing = l.value("existing", true);
      ln.invest_cost = l.value("invest_cost", 0.0);
      in.power.lines.push_back(ln);
    }
    for (const auto& s : pj.value("storage", json::array())) {
      PowerStorage st;
      st.node = s.at("node").get<std::size_t>();
      st.power_mw = s.at("power_mw").get<double>();
      st.energy_mwh = s.at("energy_mwh").get<double>();
      st.invest_cost = s.value("invest_cost", 0.0);
      st.existing_units = s.value("existing_units", 0);
      st.max_new_units = s.value("max_new_units", 0);
      st.charge_eff = s.value("charge_eff", 1.0);
      st.discharge_eff = s.value("discharge_eff", 1.0);
      in.power.storage.push_back(st);
    }
    const auto& gj = j.at("gas");
    in.gas.shed_penalty = gj.at("shed_penalty").get<double>();
    for (const auto& g : gj.at("nodes")) {
      GasNode gn;
      gn.supply_capacity = g.at("supply_capacity").get<double>();
      gn.supply_cost = g.value("supply_cost", 0.0);
      gn.expansion_capacity = g.value("expansion_capacity", 0.0);
      gn.expansion_cost = g.value("expansion_cost", 0.0);
      gn.max_expansions = g.value("max_expansions", 0);
      in.gas.nodes.push_back(gn);
    }
    for (const auto& q : gj.value("pipelines", json::array())) {
      Pipeline pq;
      pq.from = q.at("from").get<std::size_t>();
      pq.to = q.at("to").get<std::size_t>();
      pq.capacity = q.at("capacity").get<double>();
      pq.expansion_capacity = q.value("expansion_capacity", 0.0);
      pq.expansion_cost = q.value("expansion_cost", 0.0);
      pq.max_expansions = q.value("max_expansions", 0);
      in.gas.pipelines.push_back(pq);
    }
    for (const auto& s : gj.value("storage", json::array())) {
      GasStorage gst;
      gst.capacity = s.at("capacity").get<double>();
      gst.injection = s.at("injection").get<double>();
      gst.withdrawal = s.at("withdrawal").get<double>();
      gst.nodes = s.at("nodes").get<std::vector<std::size_t>>();
      in.gas.storage.push_back(gst);
    }
    const auto& cj = j.at("coupling");
    for (const auto& e : cj.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw InputError("coupling edges must be [power, gas] pairs");
      in.coupling.edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
    }
    in.coupling.e_g = cj.at("e_g").get<double>();
    in.coupling.e_p = cj.at("e_p").get<double>();
    in.coupling.eta = number_or_inf(cj, "eta");
    if (cj.contains("baseline_emission") && !cj.at("baseline_emission").is_null()) {
      in.coupling.baseline_emission = cj.at("baseline_emission").get<double>();
    }
    in.rps_share = j.at("policy").value("rps_share", 0.0);
  } catch (const json::exception& e) {
    throw InputError("instance " + path.string() + ": " + e.what());
  }
  in.validate();
  return in;
}

void save_instance(const GtepInstance& in, const std::filesystem::path& path) {
  json j;
  j["hours_per_period"] = in.hours_per_period;
  json types = json::array();
  for (const auto& t : in.power.plant_types) {
    types.push_back({{"name", t.name}, {"unit_capacity_mw", t.unit_capacity_mw}, {"invest_cost", t.invest_cost},
                     {"fom_cost", t.fom_cost}, {"variable_cost", t.variable_cost}, {"heat_rate", t.heat_rate},
                     {"ramp_rate", t.ramp_rate}, {"resource", resource_name(t.resource)}, {"ng_fired", t.ng_fired}});
  }
  json plants = json::array();
  for (const auto& p : in.power.plants) {
    plants.push_back({{"node", p.node}, {"type", in.power.plant_types.at(p.type).name},
                      {"existing_units", p.existing_units}, {"max_new_units", p.max_new_units}});
  }
  json lines = json::array();
  for (const auto& l : in.power.lines) {
    lines.push_back({{"from", l.from}, {"to", l.to}, {"capacity_mw", l.capacity_mw}, {"existing", l.existing},
                     {"invest_cost", l.invest_cost}});
  }
  json storage = json::array();
  for (const auto& s : in.power.storage) {
    storage.push_back({{"node", s.node}, {"power_mw", s.power_mw}, {"energy_mwh", s.energy_mwh},
                       {"invest_cost", s.invest_cost}, {"existing_units", s.existing_units},
                       {"max_new_units", s.max_new_units}, {"charge_eff", s.charge_eff},
                       {"discharge_eff", s.discharge_eff}});
  }
  j["power"] = {{"zones", in.power.zones}, {"shed_penalty", in.power.shed_penalty}, {"plant_types", types},
                {"plants", plants}, {"lines", lines}, {"storage", storage}};
  json nodes = json::array();
  for (const auto& g : in.gas.nodes) {
    nodes.push_back({{"supply_capacity", g.supply_capacity}, {"supply_cost", g.supply_cost},
                     {"expansion_capacity", g.expansion_capacity}, {"expansion_cost", g.expansion_cost},
                     {"max_expansions", g.max_expansions}});
  }
  json pipes = json::array();
  for (const auto& q : in.gas.pipelines) {
    pipes.push_back({{"from", q.from}, {"to", q.to}, {"capacity", q.capacity},
                     {"expansion_capacity", q.expansion_capacity}, {"expansion_cost", q.expansion_cost},
                     {"max_expansions", q.max_expansions}});
  }
  json gstore = json::array();
  for (const auto& s : in.gas.storage) {
    gstore.push_back({{"capacity", s.capacity}, {"injection", s.injection}, {"withdrawal", s.withdrawal},
                      {"nodes", s.nodes}});
  }
  j["gas"] = {{"shed_penalty", in.gas.shed_penalty}, {"nodes", nodes}, {"pipelines", pipes}, {"storage", gstore}};
  json edges = json::array();
  for (const auto& e : in.coupling.edges) edges.push_back({e.power_node, e.gas_node});
  j["coupling"] = {{"edges", edges}, {"e_g", in.coupling.e_g}, {"e_p", in.coupling.e_p}};
  j["coupling"]["eta"] = std::isfinite(in.coupling.eta) ? json(in.coupling.eta) : json(nullptr);
  if (in.coupling.baseline_emission >= 0.0) j["coupling"]["baseline_emission"] = in.coupling.baseline_emission;
  j["policy"] = {{"rps_share", in.rps_share}};
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void write_solution_json(const GtepSolution& sol, const std::filesystem::path& path) {
  const auto& c = sol.cost;
  json j;
  j["status"] = to_string(sol.status);
  j["objective"] = sol.objective;
  j["bound"] = sol.bound;
  j["eta"] = std::isfinite(sol.eta) ? json(sol.eta) : json(nullptr);
  j["nodes"] = sol.nodes;
  j["iterations"] = sol.iterations;
  j["cost"] = {{"total", c.total},
               {"power_system", c.power_system},
               {"ng_system", c.ng_system},
               {"invest_fom_power", c.invest_fom_power},
               {"variable_power", c.variable_power},
               {"invest_ng", c.invest_ng},
               {"supply_ng", c.supply_ng},
               {"shed_power", c.shed_power},
               {"shed_gas", c.shed_gas},
               {"emission_power", c.emission_power},
               {"emission_total", c.emission_total}};
  const auto& inv = sol.investment;
  j["investment"] = {{"new_units", inv.new_units},
                     {"retired_units", inv.retired_units},
                     {"line_built", inv.line_built},
                     {"storage_new", inv.storage_new},
                     {"supply_expansions", inv.supply_expansions},
                     {"pipeline_expansions", inv.pipeline_expansions}};
  json days = json::array();
  for (const auto& d : sol.days) days.push_back({{"day", d.day}, {"weight", d.weight}});
  j["days"] = days;
  if (!sol.infeasible_rows.empty()) j["infeasible_rows"] = sol.infeasible_rows;
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void write_day_summary_csv(const GtepInstance& in, const GtepSolution& sol,
                           const MultiResolutionDataset& dataset, const std::filesystem::path& path) {
  const MultiResolutionDataset raw = dataset.normalization.applied ? denormalize(dataset) : dataset;
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  const int hpp = in.hours_per_period;
  f << "day,weight,demand_mwh,generation_mwh,vre_mwh,shed_mwh,gas_demand,gas_shed,fuel,emission\n";
  for (const auto& op : sol.days) {
    const DayProfile pr = day_profile(in, raw, op.day);
    double vre = 0.0;
    for (std::size_t k = 0; k < in.power.plants.size(); ++k)
      if (in.power.plant_types[in.power.plants[k].type].is_vre()) vre += op.generation.row(k).sum();
    const double emission = in.coupling.e_p * op.fuel.sum() + in.coupling.e_g * (pr.gas_demand - op.gas_shed).sum();
    f << op.day << ',' << format_double(op.weight) << ',' << format_double(hpp * pr.demand.sum()) << ','
      << format_double(hpp * op.generation.sum()) << ',' << format_double(hpp * vre) << ','
      << format_double(hpp * op.shed.sum()) << ',' << format_double(pr.gas_demand.sum()) << ','
      << format_double(op.gas_shed.sum()) << ',' << format_double(op.fuel.sum()) << ',' << format_double(emission)
      << '\n';
  }
}

}  // namespace games
