#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "games/dataset.hpp"
#include "games/lp.hpp"
#include "games/repdays.hpp"

namespace games {

enum class Resource { None, Wind, Solar };

struct PlantType {
  std::string name;
  double unit_capacity_mw = 0.0;
  double invest_cost = 0.0;    ///< $/unit-yr for a new unit, annualized capital plus FOM
  double fom_cost = 0.0;       ///< $/unit-yr for an existing unit, saved on retirement
  double variable_cost = 0.0;  ///< $/MWh, fuel excluded (fuel is bought on the gas side)
  double heat_rate = 0.0;      ///< MMBtu/MWh
  double ramp_rate = 1.0;      ///< fraction of installed capacity per hour
  Resource resource = Resource::None;
  bool ng_fired = false;

  bool is_vre() const { return resource != Resource::None; }
};

struct Plant {
  std::size_t node = 0;
  std::size_t type = 0;
  int existing_units = 0;
  int max_new_units = 0;
};

struct Line {
  std::size_t from = 0;
  std::size_t to = 0;
  double capacity_mw = 0.0;
  bool existing = true;
  double invest_cost = 0.0;  ///< $/yr, candidate lines only
};

struct PowerStorage {
  std::size_t node = 0;
  double power_mw = 0.0;    ///< per unit
  double energy_mwh = 0.0;  ///< per unit
  double invest_cost = 0.0;
  int existing_units = 0;
  int max_new_units = 0;
  double charge_eff = 1.0;
  double discharge_eff = 1.0;
};

struct PowerSystem {
  std::size_t zones = 0;
  std::vector<PlantType> plant_types;
  std::vector<Plant> plants;
  std::vector<Line> lines;
  std::vector<PowerStorage> storage;
  double shed_penalty = 0.0;  ///< $/MWh
};

struct GasNode {
  double supply_capacity = 0.0;  ///< MMBtu/day
  double supply_cost = 0.0;      ///< $/MMBtu
  double expansion_capacity = 0.0;
  double expansion_cost = 0.0;  ///< $/yr per expansion step
  int max_expansions = 0;
};

struct Pipeline {
  std::size_t from = 0;
  std::size_t to = 0;
  double capacity = 0.0;  ///< MMBtu/day in either direction
  double expansion_capacity = 0.0;
  double expansion_cost = 0.0;
  int max_expansions = 0;
};

/// Working-gas storage shared by the listed NG nodes. Representative days
/// are decoupled, so inventory is an annual net-withdrawal budget.
struct GasStorage {
  double capacity = 0.0;    ///< MMBtu
  double injection = 0.0;   ///< MMBtu/day
  double withdrawal = 0.0;  ///< MMBtu/day
  std::vector<std::size_t> nodes;
};

struct GasSystem {
  std::vector<GasNode> nodes;
  std::vector<Pipeline> pipelines;
  std::vector<GasStorage> storage;
  double shed_penalty = 0.0;  ///< $/MMBtu
};

struct Coupling {
  std::vector<CouplingEdge> edges;
  double e_g = 0.0;  ///< tonCO2/MMBtu, non-power gas use
  double e_p = 0.0;  ///< tonCO2/MMBtu, gas burned in plants
  double eta = kInf;  ///< emission cap, tonCO2 over the horizon
  double baseline_emission = -1.0;  ///< used for reduction goals when >= 0
};

struct GtepInstance {
  PowerSystem power;
  GasSystem gas;
  Coupling coupling;
  double rps_share = 0.0;
  int hours_per_period = 1;

  /// Throws InputError on negative data, bad indices or an NG-fired plant
  /// whose node has no coupling edge.
  void validate() const;
  /// Also checks node counts and period length against the dataset.
  void validate(const MultiResolutionDataset& dataset) const;
};

GtepInstance load_instance(const std::filesystem::path& path);
void save_instance(const GtepInstance& instance, const std::filesystem::path& path);

/// Days (positions into the dataset) and their weights.
struct Horizon {
  std::vector<std::size_t> days;
  std::vector<double> weights;

  static Horizon from_day_set(const RepresentativeDaySet& set);
  static Horizon full(const MultiResolutionDataset& dataset);
};

/// Integer decisions. Existing lines count as built.
struct Investment {
  std::vector<int> new_units;      ///< per plant
  std::vector<int> retired_units;  ///< per plant
  std::vector<int> line_built;     ///< per line, 0/1
  std::vector<int> storage_new;    ///< per power storage
  std::vector<int> supply_expansions;
  std::vector<int> pipeline_expansions;

  friend bool operator==(const Investment&, const Investment&) = default;
};

/// Operations of one day; power quantities are per period averages in MW.
struct DayOperations {
  std::size_t day = 0;
  double weight = 1.0;
  Eigen::MatrixXd generation;  ///< plants x periods
  Eigen::MatrixXd shed;        ///< zones x periods
  Eigen::MatrixXd flow;        ///< lines x periods, positive from -> to
  Eigen::MatrixXd charge;      ///< storage x periods
  Eigen::MatrixXd discharge;
  Eigen::MatrixXd soc;  ///< MWh at the end of each period
  Eigen::VectorXd gas_supply;  ///< per NG node, MMBtu/day
  Eigen::VectorXd gas_shed;
  Eigen::VectorXd pipe_flow;  ///< per pipeline, positive from -> to
  Eigen::VectorXd withdraw;   ///< per storage link
  Eigen::VectorXd inject;
  Eigen::VectorXd fuel;  ///< per coupling edge, MMBtu/day
};

struct CostBreakdown {
  double total = 0.0;
  double power_system = 0.0;
  double ng_system = 0.0;
  double invest_fom_power = 0.0;
  double variable_power = 0.0;
  double invest_ng = 0.0;
  double supply_ng = 0.0;
  double shed_power = 0.0;
  double shed_gas = 0.0;
  double emission_power = 0.0;  ///< tonCO2
  double emission_total = 0.0;  ///< tonCO2
};

struct GtepSolution {
  SolveStatus status = SolveStatus::IterationLimit;
  double objective = 0.0;  ///< solver objective, $
  double bound = 0.0;
  double eta = kInf;
  long nodes = 0;
  long iterations = 0;
  Investment investment;
  std::vector<DayOperations> days;
  CostBreakdown cost;
  std::vector<std::string> infeasible_rows;
};

/// (storage, node) pairs in storage order, then node order.
std::vector<std::pair<std::size_t, std::size_t>> storage_links(const GtepInstance& instance);

/// Period averages of raw demand and capacity factors for one dataset day.
struct DayProfile {
  Eigen::MatrixXd demand;  ///< zones x periods, MW
  Eigen::MatrixXd wind;    ///< zones x periods
  Eigen::MatrixXd solar;
  Eigen::VectorXd gas_demand;  ///< per NG node, MMBtu/day
};
DayProfile day_profile(const GtepInstance& instance, const MultiResolutionDataset& raw,
                       std::size_t day);

/// Assembled model plus the column/row maps used for decoding.
///
/// Sizes, with D days, P periods per day, Z zones, K plants (K_N with new
/// units allowed, K_X with existing units, K_R with a binding ramp limit),
/// L lines (L_C candidates), S power storage (S_N expandable), G NG nodes
/// (G_X expandable), Q pipelines (Q_X expandable), M gas storage facilities
/// with B links, F coupling edges at the Z_N zones hosting NG-fired plants:
///
///   columns = D*P*(K + Z + L + 3S) + D*(2G + Q + 2B + F)
///           + [free] (K_N + K_X + L_C + S_N + G_X + Q_X)
///   rows    = D*P*(Z + S) + 2*D*(P-1)*K_R + D*(G + 2M + Z_N) + M
///           + [rps > 0] + [eta finite]
///           + [free] (D*P*(K + 2L_C + 3S_N) + D*(G_X + 2Q_X))
///
/// where [free] means the investment is not fixed.
struct GtepModel {
  SparseLp lp;
  Horizon horizon;
  int periods = 0;
  double objective_constant = 0.0;  ///< FOM of existing units
  std::optional<Investment> fixed_investment;
  // investment columns, -1 when absent
  std::vector<int> col_new, col_retire, col_line, col_storage, col_supply_exp, col_pipe_exp;
  // operation columns, indexed [day][item * periods + period] or [day][item]
  std::vector<std::vector<int>> col_gen, col_shed, col_flow, col_charge, col_discharge, col_soc;
  std::vector<std::vector<int>> col_supply, col_gas_shed, col_pipe, col_withdraw, col_inject, col_fuel;
};

struct ModelCounts {
  std::size_t columns = 0;
  std::size_t rows = 0;
  std::size_t integer_columns = 0;
};

/// Closed-form sizes of the model build_model emits.
ModelCounts expected_counts(const GtepInstance& instance, std::size_t days, int periods,
                            bool investment_fixed);

/// With `fixed` set, investment columns become fixed and capacity rows turn
/// into bounds, leaving a pure LP over the operations.
GtepModel build_model(const GtepInstance& instance, const MultiResolutionDataset& dataset,
                      const Horizon& horizon, const Investment* fixed = nullptr);

SparseLp build_milp(const GtepInstance& instance, const RepresentativeDaySet& days,
                    const MultiResolutionDataset& dataset);

GtepSolution decode(const GtepModel& model, const GtepInstance& instance,
                    const MultiResolutionDataset& dataset, const SolveResult& result);

/// Recomputes the cost and emission breakdown from the decoded values.
CostBreakdown breakdown(const GtepInstance& instance, const MultiResolutionDataset& dataset,
                        const GtepSolution& solution);

GtepSolution solve_planning(const GtepInstance& instance, const RepresentativeDaySet& days,
                            const MultiResolutionDataset& dataset, const SolverOptions& opts);
GtepSolution solve_planning(const GtepInstance& instance, const Horizon& horizon,
                            const MultiResolutionDataset& dataset, const SolverOptions& opts);

/// Step 2: all days at weight 1 with the planning investments fixed.
/// Throws InfeasibleError naming the rows in the Farkas certificate.
GtepSolution evaluate_full_horizon(const GtepInstance& instance, const GtepSolution& planning,
                                   const MultiResolutionDataset& dataset,
                                   const SolverOptions& opts = {});

/// Emission of the cost-minimal solution with no emission cap (LP
/// relaxation over all days) unless the instance fixes a baseline.
double baseline_emission(const GtepInstance& instance, const MultiResolutionDataset& dataset,
                         const SolverOptions& opts = {});

/// Copy of the instance with eta = (1 - goal) * baseline.
GtepInstance with_reduction_goal(const GtepInstance& instance, double goal, double baseline);

struct Violation {
  double value = 0.0;  ///< scaled: |residual| / max(1, |rhs|, max |term|)
  std::string where;
};

struct FeasibilityReport {
  std::map<std::string, Violation> families;
  double max_violation() const;
  std::string worst_family() const;
};

/// Re-evaluates every constraint family from the decoded solution.
FeasibilityReport check_feasibility(const GtepInstance& instance, const GtepSolution& solution,
                                    const MultiResolutionDataset& dataset);

void write_solution_json(const GtepSolution& solution, const std::filesystem::path& path);
void write_day_summary_csv(const GtepInstance& instance, const GtepSolution& solution,
                           const MultiResolutionDataset& dataset, const std::filesystem::path& path);

// -- comparison --------------------------------------------------------------

struct ComparisonRow {
  std::size_t k = 0;
  std::string source;
  double goal = 0.0;
  std::vector<std::size_t> medoids;
  CostBreakdown cost;
  double max_violation = 0.0;
  double eta = kInf;
  /// Set when CompareOptions::keep_solutions is on; shared by duplicate sets.
  std::shared_ptr<const GtepSolution> planning;
  std::shared_ptr<const GtepSolution> full;
};

/// Table-3 quantities in column order: Total, Power, NG, Inv-FOM, Shedding,
/// Emission (power).
inline constexpr const char* kTable3Columns[] = {"total", "power", "ng",
                                                 "invest_fom", "shed", "emission"};
std::array<double, 6> table3_quantities(const CostBreakdown& cost);

/// 100 (games - raw) / raw; 0 when both are 0.
double percentage_change(double games_value, double raw_value);

struct ComparisonReport {
  std::vector<ComparisonRow> rows;  ///< sorted by (goal, k, source)
  /// goal -> average percentage change per Table-3 column
  std::map<double, std::array<double, 6>> average_change;
};

struct CompareOptions {
  std::vector<std::size_t> k_list;
  std::vector<double> goals{0.80, 0.95};
  std::uint64_t seed = 0;
  SolverOptions solver;
  int threads = 0;  ///< 0 = hardware concurrency
  bool keep_solutions = false;
};

/// Runs the two-step evaluation for every (K, source, goal). `embeddings`
/// are the GAMES day embeddings aligned with the dataset days.
ComparisonReport compare_methods(const GtepInstance& instance, const MultiResolutionDataset& dataset,
                                 const EmbeddingSet& embeddings, const CompareOptions& opts);

void write_comparison_csv(const ComparisonReport& report, const std::filesystem::path& path);
void write_change_summary_csv(const ComparisonReport& report, const std::filesystem::path& path);

}  // namespace games
