#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace games {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : char { LessEqual = 'L', Equal = 'E', GreaterEqual = 'G' };

struct LpEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;

  friend bool operator==(const LpEntry&, const LpEntry&) = default;
};

/// Minimization problem  min c'x  s.t.  rows (<=, =, >=) rhs,  lo <= x <= hi,
/// with an integrality mask. Entries are kept in insertion order.
struct SparseLp {
  std::string name = "GAMES";
  std::string objective_name = "COST";
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<char> integer;
  std::vector<std::string> col_names;
  std::vector<RowSense> sense;
  std::vector<double> rhs;
  std::vector<std::string> row_names;
  std::vector<LpEntry> entries;

  int num_cols() const { return static_cast<int>(cost.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }

  int add_column(std::string col_name, double c, double lo, double hi, bool is_integer = false);
  int add_row(std::string row_name, RowSense s, double b);
  void add_entry(int row, int col, double value);

  /// Throws InputError on duplicate (row, col) pairs, out-of-range indices,
  /// lo > hi, NaN data, or mismatched name maps.
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, GapLimit, IterationLimit };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double gap = 1e-6;  ///< relative MILP gap target
  long node_limit = 100000;
  double time_limit_s = kInf;
  std::uint64_t seed = 0;
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  double integrality_tol = 1e-6;
  long iteration_limit = 5000000;
  int refactor_interval = 100;
  int log_level = 0;
};

/// Nonbasic/basic state of every structural and row variable.
enum class VarState : signed char { Basic, AtLower, AtUpper, Free };

struct Basis {
  std::vector<VarState> columns;
  std::vector<VarState> rows;
};

struct SolveResult {
  SolveStatus status = SolveStatus::IterationLimit;
  std::vector<double> x;
  double objective = kInf;
  double bound = -kInf;               ///< best bound (MILP); equals objective for LP
  std::vector<double> duals;          ///< per row; reduced cost d = c - A'y
  std::vector<double> reduced_costs;  ///< per column
  std::vector<double> row_activity;
  long iterations = 0;
  long nodes = 0;
  /// Infeasible: Farkas multipliers per row; unbounded: primal ray per column.
  std::vector<double> certificate;
  std::vector<int> certificate_rows;  ///< rows with nonzero Farkas multiplier
  Basis basis;
  int bland_activations = 0;
};

SolveResult solve_lp(const SparseLp& lp, const SolverOptions& opts = {});
SolveResult solve_lp(const SparseLp& lp, const SolverOptions& opts, const Basis& warm_start);

/// Branch and bound with best-bound node selection and most-fractional
/// branching; child LPs are warm started from the parent basis.
SolveResult solve_milp(const SparseLp& lp, const SolverOptions& opts = {});

/// Reusable simplex workspace over a fixed constraint matrix; bounds may
/// change between solves.
class SimplexWorkspace {
 public:
  SimplexWorkspace(const SparseLp& lp, const SolverOptions& opts);
  ~SimplexWorkspace();
  SimplexWorkspace(SimplexWorkspace&&) noexcept;
  SimplexWorkspace& operator=(SimplexWorkspace&&) noexcept;

  SolveResult solve(const std::vector<double>& lower, const std::vector<double>& upper,
                    const Basis* warm_start);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace games
