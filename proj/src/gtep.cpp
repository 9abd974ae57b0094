// Joint power / natural-gas capacity expansion model.
//
// Constraint families and their parent blocks of the abstract model:
//   power_balance, generation_limit, ramping, storage_*, line_limits  (2b)
//   rps                                                             (2c)
//   gas_balance, gas_supply, pipeline_limits, gas_storage_*         (2d)
//   coupling                                                        (2e)
//   emission                                                        (2f)

#include "games/gtep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "games/errors.hpp"

namespace games {

namespace {

std::string tag(const char* family, std::initializer_list<std::size_t> idx) {
  std::string s = family;
  for (auto i : idx) s += "_" + std::to_string(i);
  return s;
}

bool has_ramp_row(const GtepInstance& in, const Plant& p) {
  const auto& t = in.power.plant_types[p.type];
  return !t.is_vre() && t.ramp_rate * in.hours_per_period < 1.0;
}

std::vector<char> zones_with_ng(const GtepInstance& in) {
  std::vector<char> z(in.power.zones, 0);
  for (const auto& p : in.power.plants)
    if (in.power.plant_types[p.type].ng_fired) z[p.node] = 1;
  return z;
}

}  // namespace

void GtepInstance::validate() const {
  auto nonneg = [](double v, const std::string& what) {
    if (!(v >= 0.0) || std::isnan(v)) throw InputError(what + " must be nonnegative");
  };
  if (hours_per_period < 1) throw InputError("hours_per_period must be positive");
  if (!(rps_share >= 0.0 && rps_share <= 1.0)) throw InputError("rps_share must lie in [0,1]");
  nonneg(power.shed_penalty, "power shed penalty");
  nonneg(gas.shed_penalty, "gas shed penalty");
  nonneg(coupling.e_g, "e_g");
  nonneg(coupling.e_p, "e_p");
  nonneg(coupling.eta, "eta");
  for (const auto& t : power.plant_types) {
    nonneg(t.unit_capacity_mw, "unit capacity of " + t.name);
    nonneg(t.invest_cost, "invest cost of " + t.name);
    nonneg(t.fom_cost, "FOM cost of " + t.name);
    nonneg(t.variable_cost, "variable cost of " + t.name);
    nonneg(t.heat_rate, "heat rate of " + t.name);
    nonneg(t.ramp_rate, "ramp rate of " + t.name);
    if (t.ng_fired && t.is_vre()) throw InputError("plant type " + t.name + " is both VRE and NG-fired");
  }
  std::vector<char> fed(power.zones, 0);
  for (const auto& e : coupling.edges) {
    if (e.power_node >= power.zones || e.gas_node >= gas.nodes.size()) {
      throw InputError("coupling edge out of range");
    }
    fed[e.power_node] = 1;
  }
  for (std::size_t k = 0; k < power.plants.size(); ++k) {
    const auto& p = power.plants[k];
    if (p.node >= power.zones) throw InputError("plant " + std::to_string(k) + " node out of range");
    if (p.type >= power.plant_types.size()) throw InputError("plant " + std::to_string(k) + " type out of range");
    if (p.existing_units < 0 || p.max_new_units < 0) throw InputError("plant unit counts must be nonnegative");
    if (power.plant_types[p.type].ng_fired && !fed[p.node]) {
      throw InputError("NG-fired plant " + std::to_string(k) + " at zone " + std::to_string(p.node) +
                       " has no coupling edge");
    }
  }
  for (const auto& l : power.lines) {
    if (l.from >= power.zones || l.to >= power.zones || l.from == l.to) throw InputError("bad line endpoints");
    nonneg(l.capacity_mw, "line capacity");
    nonneg(l.invest_cost, "line cost");
  }
  for (const auto& s : power.storage) {
    if (s.node >= power.zones) throw InputError("storage node out of range");
    nonneg(s.power_mw, "storage power");
    nonneg(s.energy_mwh, "storage energy");
    nonneg(s.invest_cost, "storage cost");
    if (s.existing_units < 0 || s.max_new_units < 0) throw InputError("storage unit counts must be nonnegative");
    if (!(s.charge_eff > 0.0 && s.charge_eff <= 1.0 && s.discharge_eff > 0.0 && s.discharge_eff <= 1.0)) {
      throw InputError("storage efficiencies must lie in (0,1]");
    }
  }
  for (const auto& g : gas.nodes) {
    nonneg(g.supply_capacity, "gas supply capacity");
    nonneg(g.supply_cost, "gas supply cost");
    nonneg(g.expansion_capacity, "gas expansion capacity");
    nonneg(g.expansion_cost, "gas expansion cost");
    if (g.max_expansions < 0) throw InputError("gas max_expansions must be nonnegative");
  }
  for (const auto& q : gas.pipelines) {
    if (q.from >= gas.nodes.size() || q.to >= gas.nodes.size() || q.from == q.to) {
      throw InputError("bad pipeline endpoints");
    }
    nonneg(q.capacity, "pipeline capacity");
    nonneg(q.expansion_capacity, "pipeline expansion capacity");
    nonneg(q.expansion_cost, "pipeline expansion cost");
    if (q.max_expansions < 0) throw InputError("pipeline max_expansions must be nonnegative");
  }
  for (const auto& m : gas.storage) {
    nonneg(m.capacity, "gas storage capacity");
    nonneg(m.injection, "gas storage injection");
    nonneg(m.withdrawal, "gas storage withdrawal");
    for (auto g : m.nodes)
      if (g >= gas.nodes.size()) throw InputError("gas storage node out of range");
  }
}

void GtepInstance::validate(const MultiResolutionDataset& dataset) const {
  validate();
  const auto d = dataset.dims();
  if (static_cast<std::size_t>(d.n_power) != power.zones) throw InputError("dataset power node count differs from instance zones");
  if (static_cast<std::size_t>(d.n_gas) != gas.nodes.size()) throw InputError("dataset gas node count differs from instance");
  if (d.t_electricity % hours_per_period != 0) {
    throw InputError("hours_per_period must divide the electricity resolution");
  }
}

std::vector<std::pair<std::size_t, std::size_t>> storage_links(const GtepInstance& instance) {
  std::vector<std::pair<std::size_t, std::size_t>> links;
  for (std::size_t m = 0; m < instance.gas.storage.size(); ++m)
    for (auto g : instance.gas.storage[m].nodes) links.emplace_back(m, g);
  return links;
}

Horizon Horizon::from_day_set(const RepresentativeDaySet& set) {
  Horizon h;
  h.days = set.medoids;
  for (auto w : set.weights) h.weights.push_back(static_cast<double>(w));
  return h;
}

Horizon Horizon::full(const MultiResolutionDataset& dataset) {
  Horizon h;
  for (std::size_t d = 0; d < dataset.day_count(); ++d) {
    h.days.push_back(d);
    h.weights.push_back(1.0);
  }
  return h;
}

DayProfile day_profile(const GtepInstance& instance, const MultiResolutionDataset& raw, std::size_t day) {
  if (day >= raw.day_count()) throw InputError("day " + std::to_string(day) + " out of range");
  const auto& s = raw.days[day];
  const Eigen::Index hours = s.electricity.cols();
  const int hpp = instance.hours_per_period;
  const Eigen::Index periods = hours / hpp;
  const Eigen::Index zones = s.electricity.rows();
  DayProfile p;
  p.demand = Eigen::MatrixXd::Zero(zones, periods);
  p.wind = Eigen::MatrixXd::Zero(zones, periods);
  p.solar = Eigen::MatrixXd::Zero(zones, periods);
  for (Eigen::Index h = 0; h < hours; ++h) {
    const Eigen::Index t = h / hpp;
    p.demand.col(t) += s.electricity.col(h) / hpp;
    p.wind.col(t) += s.wind_cf.col(h * s.wind_cf.cols() / hours) / hpp;
    p.solar.col(t) += s.solar_cf.col(h * s.solar_cf.cols() / hours) / hpp;
  }
  p.gas_demand = s.gas.rowwise().sum();
  return p;
}

ModelCounts expected_counts(const GtepInstance& in, std::size_t days, int periods, bool fixed) {
  const std::size_t D = days;
  const std::size_t P = static_cast<std::size_t>(periods);
  const std::size_t K = in.power.plants.size();
  const std::size_t Z = in.power.zones;
  const std::size_t L = in.power.lines.size();
  const std::size_t S = in.power.storage.size();
  const std::size_t G = in.gas.nodes.size();
  const std::size_t Q = in.gas.pipelines.size();
  const std::size_t M = in.gas.storage.size();
  const std::size_t B = storage_links(in).size();
  std::size_t KN = 0, KX = 0, KR = 0, LC = 0, SN = 0, GX = 0, QX = 0, F = 0, ZN = 0;
  for (const auto& p : in.power.plants) {
    KN += p.max_new_units > 0;
    KX += p.existing_units > 0;
    KR += has_ramp_row(in, p);
  }
  for (const auto& l : in.power.lines) LC += !l.existing;
  for (const auto& s : in.power.storage) SN += s.max_new_units > 0;
  for (const auto& g : in.gas.nodes) GX += g.max_expansions > 0;
  for (const auto& q : in.gas.pipelines) QX += q.max_expansions > 0;
  const auto ng = zones_with_ng(in);
  for (const auto& e : in.coupling.edges) F += ng[e.power_node] != 0;
  for (auto z : ng) ZN += z != 0;

  ModelCounts c;
  c.columns = D * P * (K + Z + L + 3 * S) + D * (2 * G + Q + 2 * B + F);
  c.rows = D * P * (Z + S) + 2 * D * (P - 1) * KR + D * (G + 2 * M + ZN) + M +
           (in.rps_share > 0.0 ? 1 : 0) + (std::isfinite(in.coupling.eta) ? 1 : 0);
  if (!fixed) {
    c.integer_columns = KN + KX + LC + SN + GX + QX;
    c.columns += c.integer_columns;
    c.rows += D * P * (K + 2 * LC + 3 * SN) + D * (GX + 2 * QX);
  }
  return c;
}

GtepModel build_model(const GtepInstance& in, const MultiResolutionDataset& dataset,
                      const Horizon& horizon, const Investment* fixed) {
  in.validate(dataset);
  if (horizon.days.size() != horizon.weights.size()) throw InputError("horizon days and weights differ in length");
  for (auto d : horizon.days)
    if (d >= dataset.day_count()) throw InputError("representative day " + std::to_string(d) + " out of range");
  const MultiResolutionDataset raw = dataset.normalization.applied ? denormalize(dataset) : dataset;
  const auto& pw = in.power;
  const auto& gs = in.gas;
  const std::size_t K = pw.plants.size();
  const std::size_t Z = pw.zones;
  const std::size_t L = pw.lines.size();
  const std::size_t S = pw.storage.size();
  const std::size_t G = gs.nodes.size();
  const std::size_t Q = gs.pipelines.size();
  const std::size_t M = gs.storage.size();
  const auto links = storage_links(in);
  const std::size_t B = links.size();
  const std::size_t D = horizon.days.size();
  const int hpp = in.hours_per_period;
  const int P = static_cast<int>(raw.dims().t_electricity / hpp);
  const auto ng_zone = zones_with_ng(in);

  if (fixed) {
    if (fixed->new_units.size() != K || fixed->retired_units.size() != K || fixed->line_built.size() != L ||
        fixed->storage_new.size() != S || fixed->supply_expansions.size() != G ||
        fixed->pipeline_expansions.size() != Q) {
      throw InputError("fixed investment does not match the instance");
    }
  }

  GtepModel m;
  m.horizon = horizon;
  m.periods = P;
  SparseLp& lp = m.lp;
  lp.name = "GTEP";

  // -- investment columns ----------------------------------------------------
  m.col_new.assign(K, -1);
  m.col_retire.assign(K, -1);
  m.col_line.assign(L, -1);
  m.col_storage.assign(S, -1);
  m.col_supply_exp.assign(G, -1);
  m.col_pipe_exp.assign(Q, -1);
  double constant = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& p = pw.plants[k];
    const auto& t = pw.plant_types[p.type];
    constant += t.fom_cost * p.existing_units;
    if (fixed) {
      constant += t.invest_cost * fixed->new_units[k] - t.fom_cost * fixed->retired_units[k];
      continue;
    }
    if (p.max_new_units > 0) m.col_new[k] = lp.add_column(tag("new", {k}), t.invest_cost, 0, p.max_new_units, true);
    if (p.existing_units > 0) {
      m.col_retire[k] = lp.add_column(tag("retire", {k}), -t.fom_cost, 0, p.existing_units, true);
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    const auto& ln = pw.lines[l];
    if (ln.existing) continue;
    if (fixed) constant += ln.invest_cost * fixed->line_built[l];
    else m.col_line[l] = lp.add_column(tag("build_line", {l}), ln.invest_cost, 0, 1, true);
  }
  for (std::size_t s = 0; s < S; ++s) {
    const auto& st = pw.storage[s];
    if (fixed) constant += st.invest_cost * fixed->storage_new[s];
    else if (st.max_new_units > 0) m.col_storage[s] = lp.add_column(tag("new_storage", {s}), st.invest_cost, 0, st.max_new_units, true);
  }
  for (std::size_t g = 0; g < G; ++g) {
    const auto& gn = gs.nodes[g];
    if (fixed) constant += gn.expansion_cost * fixed->supply_expansions[g];
    else if (gn.max_expansions > 0) m.col_supply_exp[g] = lp.add_column(tag("expand_supply", {g}), gn.expansion_cost, 0, gn.max_expansions, true);
  }
  for (std::size_t q = 0; q < Q; ++q) {
    const auto& pq = gs.pipelines[q];
    if (fixed) constant += pq.expansion_cost * fixed->pipeline_expansions[q];
    else if (pq.max_expansions > 0) m.col_pipe_exp[q] = lp.add_column(tag("expand_pipe", {q}), pq.expansion_cost, 0, pq.max_expansions, true);
  }
  m.objective_constant = constant;
  if (fixed) m.fixed_investment = *fixed;

  // installed capacity in units when fixed
  auto plant_units = [&](std::size_t k) {
    return pw.plants[k].existing_units - fixed->retired_units[k] + fixed->new_units[k];
  };
  auto storage_units = [&](std::size_t s) { return pw.storage[s].existing_units + fixed->storage_new[s]; };

  m.col_gen.resize(D);
  m.col_shed.resize(D);
  m.col_flow.resize(D);
  m.col_charge.resize(D);
  m.col_discharge.resize(D);
  m.col_soc.resize(D);
  m.col_supply.resize(D);
  m.col_gas_shed.resize(D);
  m.col_pipe.resize(D);
  m.col_withdraw.resize(D);
  m.col_inject.resize(D);
  m.col_fuel.resize(D);

  std::vector<DayProfile> prof;
  prof.reserve(D);
  for (std::size_t d = 0; d < D; ++d) prof.push_back(day_profile(in, raw, horizon.days[d]));

  auto cf_of = [&](std::size_t k, const DayProfile& pr, int t) {
    const auto& p = pw.plants[k];
    switch (pw.plant_types[p.type].resource) {
      case Resource::Wind: return pr.wind(p.node, t);
      case Resource::Solar: return pr.solar(p.node, t);
      default: return 1.0;
    }
  };

  // -- operation columns -----------------------------------------------------
  for (std::size_t d = 0; d < D; ++d) {
    const double w = horizon.weights[d];
    const auto& pr = prof[d];
    auto& gen = m.col_gen[d];
    gen.resize(K * P);
    for (std::size_t k = 0; k < K; ++k) {
      const auto& t = pw.plant_types[pw.plants[k].type];
      for (int p = 0; p < P; ++p) {
        double hi = kInf;
        if (fixed) hi = t.unit_capacity_mw * cf_of(k, pr, p) * plant_units(k);
        gen[k * P + p] = lp.add_column(tag("gen", {k, d, std::size_t(p)}), w * hpp * t.variable_cost, 0.0, hi);
      }
    }
    auto& shed = m.col_shed[d];
    shed.resize(Z * P);
    for (std::size_t z = 0; z < Z; ++z)
      for (int p = 0; p < P; ++p)
        shed[z * P + p] = lp.add_column(tag("shed", {z, d, std::size_t(p)}), w * hpp * pw.shed_penalty, 0.0, pr.demand(z, p));
    auto& flow = m.col_flow[d];
    flow.resize(L * P);
    for (std::size_t l = 0; l < L; ++l) {
      const auto& ln = pw.lines[l];
      double cap = ln.capacity_mw;
      if (fixed && !ln.existing && fixed->line_built[l] == 0) cap = 0.0;
      for (int p = 0; p < P; ++p) flow[l * P + p] = lp.add_column(tag("flow", {l, d, std::size_t(p)}), 0.0, -cap, cap);
    }
    m.col_charge[d].resize(S * P);
    m.col_discharge[d].resize(S * P);
    m.col_soc[d].resize(S * P);
    for (std::size_t s = 0; s < S; ++s) {
      const auto& st = pw.storage[s];
      double pcap = kInf, ecap = kInf;
      if (fixed || st.max_new_units == 0) {
        const int units = fixed ? storage_units(s) : st.existing_units;
        pcap = st.power_mw * units;
        ecap = st.energy_mwh * units;
      }
      for (int p = 0; p < P; ++p) {
        m.col_charge[d][s * P + p] = lp.add_column(tag("charge", {s, d, std::size_t(p)}), 0.0, 0.0, pcap);
        m.col_discharge[d][s * P + p] = lp.add_column(tag("discharge", {s, d, std::size_t(p)}), 0.0, 0.0, pcap);
        m.col_soc[d][s * P + p] = lp.add_column(tag("soc", {s, d, std::size_t(p)}), 0.0, 0.0, ecap);
      }
    }
    m.col_supply[d].resize(G);
    m.col_gas_shed[d].resize(G);
    for (std::size_t g = 0; g < G; ++g) {
      const auto& gn = gs.nodes[g];
      double cap = kInf;
      if (fixed) cap = gn.supply_capacity + gn.expansion_capacity * fixed->supply_expansions[g];
      else if (gn.max_expansions == 0) cap = gn.supply_capacity;
      m.col_supply[d][g] = lp.add_column(tag("supply", {g, d}), w * gn.supply_cost, 0.0, cap);
      m.col_gas_shed[d][g] = lp.add_column(tag("gas_shed", {g, d}), w * gs.shed_penalty, 0.0, pr.gas_demand(g));
    }
    m.col_pipe[d].resize(Q);
    for (std::size_t q = 0; q < Q; ++q) {
      const auto& pq = gs.pipelines[q];
      double cap = kInf;
      if (fixed) cap = pq.capacity + pq.expansion_capacity * fixed->pipeline_expansions[q];
      else if (pq.max_expansions == 0) cap = pq.capacity;
      m.col_pipe[d][q] = lp.add_column(tag("pipe", {q, d}), 0.0, -cap, cap);
    }
    m.col_withdraw[d].resize(B);
    m.col_inject[d].resize(B);
    for (std::size_t b = 0; b < B; ++b) {
      m.col_withdraw[d][b] = lp.add_column(tag("withdraw", {b, d}), 0.0, 0.0, kInf);
      m.col_inject[d][b] = lp.add_column(tag("inject", {b, d}), 0.0, 0.0, kInf);
    }
    m.col_fuel[d].assign(in.coupling.edges.size(), -1);
    for (std::size_t e = 0; e < in.coupling.edges.size(); ++e)
      if (ng_zone[in.coupling.edges[e].power_node]) m.col_fuel[d][e] = lp.add_column(tag("fuel", {e, d}), 0.0, 0.0, kInf);
  }

  // -- rows ------------------------------------------------------------------
  for (std::size_t d = 0; d < D; ++d) {
    const auto& pr = prof[d];
    const auto& gen = m.col_gen[d];
    for (int p = 0; p < P; ++p) {
      const std::size_t pp = static_cast<std::size_t>(p);
      // (2b) nodal balance
      std::vector<int> bal(Z);
      for (std::size_t z = 0; z < Z; ++z) {
        bal[z] = lp.add_row(tag("balance", {z, d, pp}), RowSense::Equal, pr.demand(z, p));
        lp.add_entry(bal[z], m.col_shed[d][z * P + p], 1.0);
      }
      for (std::size_t k = 0; k < K; ++k) lp.add_entry(bal[pw.plants[k].node], gen[k * P + p], 1.0);
      for (std::size_t l = 0; l < L; ++l) {
        lp.add_entry(bal[pw.lines[l].to], m.col_flow[d][l * P + p], 1.0);
        lp.add_entry(bal[pw.lines[l].from], m.col_flow[d][l * P + p], -1.0);
      }
      for (std::size_t s = 0; s < S; ++s) {
        lp.add_entry(bal[pw.storage[s].node], m.col_discharge[d][s * P + p], 1.0);
        lp.add_entry(bal[pw.storage[s].node], m.col_charge[d][s * P + p], -1.0);
      }
      // (2b) storage dynamics, cyclic within the day
      for (std::size_t s = 0; s < S; ++s) {
        const auto& st = pw.storage[s];
        const int prev = (p + P - 1) % P;
        const int r = lp.add_row(tag("soc", {s, d, pp}), RowSense::Equal, 0.0);
        lp.add_entry(r, m.col_soc[d][s * P + p], 1.0);
        if (prev != p) lp.add_entry(r, m.col_soc[d][s * P + prev], -1.0);
        lp.add_entry(r, m.col_charge[d][s * P + p], -hpp * st.charge_eff);
        lp.add_entry(r, m.col_discharge[d][s * P + p], hpp / st.discharge_eff);
      }
      if (fixed) continue;
      // (2b) generation within installed capacity
      for (std::size_t k = 0; k < K; ++k) {
        const auto& pl = pw.plants[k];
        const double cap = pw.plant_types[pl.type].unit_capacity_mw * cf_of(k, pr, p);
        const int r = lp.add_row(tag("gen_limit", {k, d, pp}), RowSense::LessEqual, cap * pl.existing_units);
        lp.add_entry(r, gen[k * P + p], 1.0);
        if (m.col_new[k] >= 0 && cap != 0.0) lp.add_entry(r, m.col_new[k], -cap);
        if (m.col_retire[k] >= 0 && cap != 0.0) lp.add_entry(r, m.col_retire[k], cap);
      }
      // (2b) candidate lines
      for (std::size_t l = 0; l < L; ++l) {
        if (pw.lines[l].existing) continue;
        const double cap = pw.lines[l].capacity_mw;
        const int up = lp.add_row(tag("line_up", {l, d, pp}), RowSense::LessEqual, 0.0);
        lp.add_entry(up, m.col_flow[d][l * P + p], 1.0);
        lp.add_entry(up, m.col_line[l], -cap);
        const int dn = lp.add_row(tag("line_down", {l, d, pp}), RowSense::GreaterEqual, 0.0);
        lp.add_entry(dn, m.col_flow[d][l * P + p], 1.0);
        lp.add_entry(dn, m.col_line[l], cap);
      }
      // (2b) expandable storage limits
      for (std::size_t s = 0; s < S; ++s) {
        if (m.col_storage[s] < 0) continue;
        const auto& st = pw.storage[s];
        const std::pair<std::vector<int>*, double> limits[] = {
            {&m.col_charge[d], st.power_mw}, {&m.col_discharge[d], st.power_mw}, {&m.col_soc[d], st.energy_mwh}};
        const char* names[] = {"charge_limit", "discharge_limit", "soc_limit"};
        for (int f = 0; f < 3; ++f) {
          const int r = lp.add_row(tag(names[f], {s, d, pp}), RowSense::LessEqual, limits[f].second * st.existing_units);
          lp.add_entry(r, (*limits[f].first)[s * P + p], 1.0);
          lp.add_entry(r, m.col_storage[s], -limits[f].second);
        }
      }
    }
    // (2b) ramping between consecutive periods
    for (std::size_t k = 0; k < K; ++k) {
      const auto& pl = pw.plants[k];
      if (!has_ramp_row(in, pl)) continue;
      const double step = pw.plant_types[pl.type].ramp_rate * hpp * pw.plant_types[pl.type].unit_capacity_mw;
      for (int p = 1; p < P; ++p) {
        for (int sign : {1, -1}) {
          const double units = fixed ? plant_units(k) : pl.existing_units;
          const int r = lp.add_row(tag(sign > 0 ? "ramp_up" : "ramp_down", {k, d, std::size_t(p)}),
                                   RowSense::LessEqual, step * units);
          lp.add_entry(r, gen[k * P + p], sign);
          lp.add_entry(r, gen[k * P + p - 1], -sign);
          if (!fixed && m.col_new[k] >= 0) lp.add_entry(r, m.col_new[k], -step);
          if (!fixed && m.col_retire[k] >= 0) lp.add_entry(r, m.col_retire[k], step);
        }
      }
    }
    // (2d) daily gas balance
    std::vector<int> gbal(G);
    for (std::size_t g = 0; g < G; ++g) {
      gbal[g] = lp.add_row(tag("gas_balance", {g, d}), RowSense::Equal, pr.gas_demand(g));
      lp.add_entry(gbal[g], m.col_supply[d][g], 1.0);
      lp.add_entry(gbal[g], m.col_gas_shed[d][g], 1.0);
    }
    for (std::size_t q = 0; q < Q; ++q) {
      lp.add_entry(gbal[gs.pipelines[q].to], m.col_pipe[d][q], 1.0);
      lp.add_entry(gbal[gs.pipelines[q].from], m.col_pipe[d][q], -1.0);
    }
    for (std::size_t b = 0; b < B; ++b) {
      lp.add_entry(gbal[links[b].second], m.col_withdraw[d][b], 1.0);
      lp.add_entry(gbal[links[b].second], m.col_inject[d][b], -1.0);
    }
    for (std::size_t e = 0; e < in.coupling.edges.size(); ++e)
      if (m.col_fuel[d][e] >= 0) lp.add_entry(gbal[in.coupling.edges[e].gas_node], m.col_fuel[d][e], -1.0);
    // (2d) daily storage rates
    for (std::size_t s = 0; s < M; ++s) {
      const int wr = lp.add_row(tag("gas_withdraw_limit", {s, d}), RowSense::LessEqual, gs.storage[s].withdrawal);
      const int ir = lp.add_row(tag("gas_inject_limit", {s, d}), RowSense::LessEqual, gs.storage[s].injection);
      for (std::size_t b = 0; b < B; ++b) {
        if (links[b].first != s) continue;
        lp.add_entry(wr, m.col_withdraw[d][b], 1.0);
        lp.add_entry(ir, m.col_inject[d][b], 1.0);
      }
    }
    // (2e) fuel delivered equals fuel burned
    for (std::size_t z = 0; z < Z; ++z) {
      if (!ng_zone[z]) continue;
      const int r = lp.add_row(tag("coupling", {z, d}), RowSense::Equal, 0.0);
      for (std::size_t e = 0; e < in.coupling.edges.size(); ++e)
        if (in.coupling.edges[e].power_node == z) lp.add_entry(r, m.col_fuel[d][e], 1.0);
      for (std::size_t k = 0; k < K; ++k) {
        const auto& pl = pw.plants[k];
        const auto& t = pw.plant_types[pl.type];
        if (pl.node != z || !t.ng_fired || t.heat_rate == 0.0) continue;
        for (int p = 0; p < P; ++p) lp.add_entry(r, gen[k * P + p], -t.heat_rate * hpp);
      }
    }
    if (fixed) continue;
    // (2d) expandable supply and pipelines
    for (std::size_t g = 0; g < G; ++g) {
      if (m.col_supply_exp[g] < 0) continue;
      const int r = lp.add_row(tag("supply_limit", {g, d}), RowSense::LessEqual, gs.nodes[g].supply_capacity);
      lp.add_entry(r, m.col_supply[d][g], 1.0);
      lp.add_entry(r, m.col_supply_exp[g], -gs.nodes[g].expansion_capacity);
    }
    for (std::size_t q = 0; q < Q; ++q) {
      if (m.col_pipe_exp[q] < 0) continue;
      const auto& pq = gs.pipelines[q];
      const int up = lp.add_row(tag("pipe_up", {q, d}), RowSense::LessEqual, pq.capacity);
      lp.add_entry(up, m.col_pipe[d][q], 1.0);
      lp.add_entry(up, m.col_pipe_exp[q], -pq.expansion_capacity);
      const int dn = lp.add_row(tag("pipe_down", {q, d}), RowSense::GreaterEqual, -pq.capacity);
      lp.add_entry(dn, m.col_pipe[d][q], 1.0);
      lp.add_entry(dn, m.col_pipe_exp[q], pq.expansion_capacity);
    }
  }
  // (2d) annual net withdrawal per storage facility
  for (std::size_t s = 0; s < M; ++s) {
    const int r = lp.add_row(tag("gas_storage_budget", {s}), RowSense::LessEqual, gs.storage[s].capacity);
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t b = 0; b < B; ++b) {
        if (links[b].first != s) continue;
        lp.add_entry(r, m.col_withdraw[d][b], horizon.weights[d]);
        lp.add_entry(r, m.col_inject[d][b], -horizon.weights[d]);
      }
    }
  }
  // (2c) renewable share of served demand
  if (in.rps_share > 0.0) {
    double rhs = 0.0;
    for (std::size_t d = 0; d < D; ++d) rhs += horizon.weights[d] * hpp * prof[d].demand.sum();
    const int r = lp.add_row("rps", RowSense::GreaterEqual, in.rps_share * rhs);
    for (std::size_t d = 0; d < D; ++d) {
      const double c = horizon.weights[d] * hpp;
      for (std::size_t k = 0; k < K; ++k) {
        if (!pw.plant_types[pw.plants[k].type].is_vre()) continue;
        for (int p = 0; p < P; ++p) lp.add_entry(r, m.col_gen[d][k * P + p], c);
      }
      for (std::size_t z = 0; z < Z; ++z)
        for (int p = 0; p < P; ++p) lp.add_entry(r, m.col_shed[d][z * P + p], c * in.rps_share);
    }
  }
  // (2f) emission cap over all gas use
  if (std::isfinite(in.coupling.eta)) {
    double served = 0.0;
    for (std::size_t d = 0; d < D; ++d) served += horizon.weights[d] * prof[d].gas_demand.sum();
    const int r = lp.add_row("emission", RowSense::LessEqual, in.coupling.eta - in.coupling.e_g * served);
    for (std::size_t d = 0; d < D; ++d) {
      const double w = horizon.weights[d];
      if (in.coupling.e_p != 0.0)
        for (int c : m.col_fuel[d])
          if (c >= 0) lp.add_entry(r, c, w * in.coupling.e_p);
      if (in.coupling.e_g != 0.0)
        for (int c : m.col_gas_shed[d]) lp.add_entry(r, c, -w * in.coupling.e_g);
    }
  }
  return m;
}

SparseLp build_milp(const GtepInstance& instance, const RepresentativeDaySet& days,
                    const MultiResolutionDataset& dataset) {
  return build_model(instance, dataset, Horizon::from_day_set(days)).lp;
}

GtepSolution decode(const GtepModel& m, const GtepInstance& in, const MultiResolutionDataset& dataset,
                    const SolveResult& res) {
  GtepSolution sol;
  sol.status = res.status;
  sol.eta = in.coupling.eta;
  sol.nodes = res.nodes;
  sol.iterations = res.iterations;
  if (res.x.empty()) return sol;
  const auto& x = res.x;
  const auto& pw = in.power;
  const std::size_t K = pw.plants.size();
  auto ival = [&](int c) { return c < 0 ? 0 : static_cast<int>(std::lround(x[c])); };
  auto& inv = sol.investment;
  for (std::size_t k = 0; k < K; ++k) {
    inv.new_units.push_back(ival(m.col_new[k]));
    inv.retired_units.push_back(ival(m.col_retire[k]));
  }
  for (std::size_t l = 0; l < pw.lines.size(); ++l) inv.line_built.push_back(pw.lines[l].existing ? 1 : ival(m.col_line[l]));
  for (int c : m.col_storage) inv.storage_new.push_back(ival(c));
  for (int c : m.col_supply_exp) inv.supply_expansions.push_back(ival(c));
  for (int c : m.col_pipe_exp) inv.pipeline_expansions.push_back(ival(c));
  if (m.fixed_investment) inv = *m.fixed_investment;

  const int P = m.periods;
  auto block = [&](const std::vector<int>& cols, std::size_t items) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(items), P);
    for (std::size_t i = 0; i < items; ++i)
      for (int p = 0; p < P; ++p) out(static_cast<Eigen::Index>(i), p) = x[cols[i * P + p]];
    return out;
  };
  auto vec = [&](const std::vector<int>& cols) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out[static_cast<Eigen::Index>(i)] = cols[i] < 0 ? 0.0 : x[cols[i]];
    return out;
  };
  for (std::size_t d = 0; d < m.horizon.days.size(); ++d) {
    DayOperations op;
    op.day = m.horizon.days[d];
    op.weight = m.horizon.weights[d];
    op.generation = block(m.col_gen[d], K);
    op.shed = block(m.col_shed[d], pw.zones);
    op.flow = block(m.col_flow[d], pw.lines.size());
    op.charge = block(m.col_charge[d], pw.storage.size());
    op.discharge = block(m.col_discharge[d], pw.storage.size());
    op.soc = block(m.col_soc[d], pw.storage.size());
    op.gas_supply = vec(m.col_supply[d]);
    op.gas_shed = vec(m.col_gas_shed[d]);
    op.pipe_flow = vec(m.col_pipe[d]);
    op.withdraw = vec(m.col_withdraw[d]);
    op.inject = vec(m.col_inject[d]);
    op.fuel = vec(m.col_fuel[d]);
    sol.days.push_back(std::move(op));
  }
  sol.objective = res.objective + m.objective_constant;
  sol.bound = res.bound + m.objective_constant;
  sol.cost = breakdown(in, dataset, sol);
  return sol;
}

CostBreakdown breakdown(const GtepInstance& in, const MultiResolutionDataset& dataset,
                        const GtepSolution& sol) {
  const MultiResolutionDataset raw = dataset.normalization.applied ? denormalize(dataset) : dataset;
  const auto& pw = in.power;
  const auto& gs = in.gas;
  const auto& inv = sol.investment;
  const int hpp = in.hours_per_period;
  CostBreakdown c;
  for (std::size_t k = 0; k < pw.plants.size(); ++k) {
    const auto& p = pw.plants[k];
    const auto& t = pw.plant_types[p.type];
    c.invest_fom_power += t.invest_cost * inv.new_units[k] + t.fom_cost * (p.existing_units - inv.retired_units[k]);
  }
  for (std::size_t l = 0; l < pw.lines.size(); ++l)
    if (!pw.lines[l].existing) c.invest_fom_power += pw.lines[l].invest_cost * inv.line_built[l];
  for (std::size_t s = 0; s < pw.storage.size(); ++s) c.invest_fom_power += pw.storage[s].invest_cost * inv.storage_new[s];
  for (std::size_t g = 0; g < gs.nodes.size(); ++g) c.invest_ng += gs.nodes[g].expansion_cost * inv.supply_expansions[g];
  for (std::size_t q = 0; q < gs.pipelines.size(); ++q) c.invest_ng += gs.pipelines[q].expansion_cost * inv.pipeline_expansions[q];
  for (const auto& op : sol.days) {
    const double w = op.weight;
    for (std::size_t k = 0; k < pw.plants.size(); ++k) {
      c.variable_power += w * hpp * pw.plant_types[pw.plants[k].type].variable_cost *
                          op.generation.row(static_cast<Eigen::Index>(k)).sum();
    }
    c.shed_power += w * hpp * pw.shed_penalty * op.shed.sum();
    for (std::size_t g = 0; g < gs.nodes.size(); ++g) c.supply_ng += w * gs.nodes[g].supply_cost * op.gas_supply[static_cast<Eigen::Index>(g)];
    c.shed_gas += w * gs.shed_penalty * op.gas_shed.sum();
    c.emission_power += w * in.coupling.e_p * op.fuel.sum();
    const auto demand = raw.days[op.day].gas.rowwise().sum();
    c.emission_total += w * in.coupling.e_g * (demand - op.gas_shed).sum();
  }
  c.emission_total += c.emission_power;
  c.power_system = c.invest_fom_power + c.variable_power + c.shed_power;
  c.ng_system = c.invest_ng + c.supply_ng + c.shed_gas;
  c.total = c.power_system + c.ng_system;
  return c;
}

namespace {

void throw_on_failure(const SolveResult& r, const char* stage) {
  if (r.status == SolveStatus::Unbounded) throw NumericalError(std::string(stage) + ": model is unbounded");
  if (r.status == SolveStatus::IterationLimit && r.x.empty()) {
    throw NumericalError(std::string(stage) + ": solver stopped without a solution");
  }
}

std::vector<std::string> certificate_names(const GtepModel& m, const SolveResult& r) {
  std::vector<std::string> names;
  for (int i : r.certificate_rows) names.push_back(m.lp.row_names[i]);
  return names;
}

}  // namespace

GtepSolution solve_planning(const GtepInstance& instance, const Horizon& horizon,
                            const MultiResolutionDataset& dataset, const SolverOptions& opts) {
  const GtepModel model = build_model(instance, dataset, horizon);
  const SolveResult r = solve_milp(model.lp, opts);
  throw_on_failure(r, "planning");
  GtepSolution sol = decode(model, instance, dataset, r);
  if (r.status == SolveStatus::Infeasible) sol.infeasible_rows = certificate_names(model, r);
  return sol;
}

GtepSolution solve_planning(const GtepInstance& instance, const RepresentativeDaySet& days,
                            const MultiResolutionDataset& dataset, const SolverOptions& opts) {
  return solve_planning(instance, Horizon::from_day_set(days), dataset, opts);
}

GtepSolution evaluate_full_horizon(const GtepInstance& instance, const GtepSolution& planning,
                                   const MultiResolutionDataset& dataset, const SolverOptions& opts) {
  if (planning.status != SolveStatus::Optimal && planning.status != SolveStatus::GapLimit) {
    throw InputError("planning solution has no investment decisions");
  }
  const GtepModel model = build_model(instance, dataset, Horizon::full(dataset), &planning.investment);
  const SolveResult r = solve_lp(model.lp, opts);
  if (r.status == SolveStatus::Infeasible) {
    std::string rows;
    for (const auto& n : certificate_names(model, r)) rows += (rows.empty() ? "" : ", ") + n;
    throw InfeasibleError("full-horizon evaluation infeasible; certificate rows: " + rows);
  }
  if (r.status != SolveStatus::Optimal) throw NumericalError("full-horizon evaluation did not reach optimality");
  GtepSolution sol = decode(model, instance, dataset, r);
  sol.investment = planning.investment;
  return sol;
}

double baseline_emission(const GtepInstance& instance, const MultiResolutionDataset& dataset,
                         const SolverOptions& opts) {
  if (instance.coupling.baseline_emission >= 0.0) return instance.coupling.baseline_emission;
  GtepInstance free = instance;
  free.coupling.eta = kInf;
  const GtepModel model = build_model(free, dataset, Horizon::full(dataset));
  const SolveResult r = solve_lp(model.lp, opts);
  if (r.status != SolveStatus::Optimal) throw NumericalError("baseline relaxation did not reach optimality");
  // relaxation values are fractional; decode keeps the operations exact
  const GtepSolution sol = decode(model, free, dataset, r);
  return sol.cost.emission_total;
}

GtepInstance with_reduction_goal(const GtepInstance& instance, double goal, double baseline) {
  if (!(goal >= 0.0 && goal <= 1.0)) throw InputError("reduction goal must lie in [0,1]");
  GtepInstance out = instance;
  out.coupling.eta = (1.0 - goal) * baseline;
  return out;
}

}  // namespace games
