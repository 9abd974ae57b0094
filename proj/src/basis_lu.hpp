// Sparse LU of a simplex basis matrix.
//
// Left-looking factorization (Gilbert-Peierls) with threshold partial
// pivoting on a COLAMD column order. Columns that turn out dependent are
// reported back together with the rows left without a pivot, so the caller
// can patch them with logical columns.
#pragma once

#include <vector>

namespace games::detail {

class BasisLu {
 public:
  /// Columns of the m x m basis in CSC form (position k owns
  /// [start[k], start[k+1])). Returns false when any column was dependent;
  /// `dependent` then lists the offending positions and `free_rows` the rows
  /// that got no pivot (same length). Those positions are factored as unit
  /// columns on the free rows, so the result stays usable after the caller
  /// substitutes matching logicals.
  bool factor(int m, const std::vector<int>& start, const std::vector<int>& index,
              const std::vector<double>& value, std::vector<int>& dependent,
              std::vector<int>& free_rows, double sign_for_patch);

  /// Solves B x = b in place; input indexed by row, output by basis position.
  void solve(std::vector<double>& v) const;
  /// Solves B^T y = c in place; input indexed by basis position, output by row.
  void solve_transposed(std::vector<double>& v) const;

  std::size_t fill() const { return l_index_.size() + u_index_.size(); }

 private:
  int m_ = 0;
  std::vector<int> col_of_step_;  // basis position factored at step k
  std::vector<int> row_of_step_;  // pivot row of step k
  std::vector<int> step_of_row_;
  std::vector<int> l_start_, l_index_;  // L below the unit diagonal, original rows
  std::vector<double> l_value_;
  std::vector<int> u_start_, u_index_;  // U above the diagonal, step indices
  std::vector<double> u_value_;
  std::vector<double> u_diag_;
  mutable std::vector<double> work_;
};

}  // namespace games::detail
