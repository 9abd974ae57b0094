#include "basis_lu.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/OrderingMethods>
#include <Eigen/Sparse>

namespace games::detail {

namespace {

constexpr double kPivotThreshold = 0.1;
constexpr double kSingularTol = 1e-11;

}  // namespace

bool BasisLu::factor(int m, const std::vector<int>& start, const std::vector<int>& index,
                     const std::vector<double>& value, std::vector<int>& dependent,
                     std::vector<int>& free_rows, double sign_for_patch) {
  m_ = m;
  dependent.clear();
  free_rows.clear();
  col_of_step_.assign(m, -1);
  row_of_step_.assign(m, -1);
  step_of_row_.assign(m, -1);
  l_start_.assign(1, 0);
  l_index_.clear();
  l_value_.clear();
  u_start_.assign(1, 0);
  u_index_.clear();
  u_value_.clear();
  u_diag_.clear();
  work_.assign(m, 0.0);
  if (m == 0) return true;

  // Column order: column singletons first, then the nucleus in COLAMD
  // order, then row singletons in reverse discovery order. The triangular
  // parts produce no fill.
  std::vector<int> row_count(m, 0), col_count(m, 0);
  std::vector<int> rstart(m + 1, 0), rcols;
  for (int k = 0; k < m; ++k) {
    col_count[k] = start[k + 1] - start[k];
    for (int p = start[k]; p < start[k + 1]; ++p) ++rstart[index[p] + 1];
  }
  for (int i = 0; i < m; ++i) {
    row_count[i] = rstart[i + 1] - rstart[i];
    rstart[i + 1] += rstart[i];
  }
  rcols.resize(rstart[m]);
  {
    std::vector<int> fillp(rstart.begin(), rstart.end() - 1);
    for (int k = 0; k < m; ++k)
      for (int p = start[k]; p < start[k + 1]; ++p) rcols[fillp[index[p]]++] = k;
  }
  std::vector<char> row_active(m, 1), col_active(m, 1);
  std::vector<int> front, back;
  std::vector<int> queue;
  for (int k = 0; k < m; ++k)
    if (col_count[k] == 1) queue.push_back(k);
  while (!queue.empty()) {
    const int k = queue.back();
    queue.pop_back();
    if (!col_active[k] || col_count[k] != 1) continue;
    int r = -1;
    for (int p = start[k]; p < start[k + 1]; ++p)
      if (row_active[index[p]]) r = index[p];
    col_active[k] = 0;
    row_active[r] = 0;
    front.push_back(k);
    for (int p = rstart[r]; p < rstart[r + 1]; ++p) {
      const int c = rcols[p];
      if (col_active[c] && --col_count[c] == 1) queue.push_back(c);
    }
  }
  for (int i = 0; i < m; ++i) {
    if (!row_active[i]) continue;
    row_count[i] = 0;
    for (int p = rstart[i]; p < rstart[i + 1]; ++p) row_count[i] += col_active[rcols[p]];
    if (row_count[i] == 1) queue.push_back(i);
  }
  while (!queue.empty()) {
    const int r = queue.back();
    queue.pop_back();
    if (!row_active[r] || row_count[r] != 1) continue;
    int k = -1;
    for (int p = rstart[r]; p < rstart[r + 1]; ++p)
      if (col_active[rcols[p]]) k = rcols[p];
    row_active[r] = 0;
    col_active[k] = 0;
    back.push_back(k);
    for (int p = start[k]; p < start[k + 1]; ++p) {
      const int i = index[p];
      if (row_active[i] && --row_count[i] == 1) queue.push_back(i);
    }
  }
  std::vector<int> nucleus;
  for (int k = 0; k < m; ++k)
    if (col_active[k]) nucleus.push_back(k);
  if (nucleus.size() > 1) {
    std::vector<int> local(m, -1);
    int nrows = 0;
    for (int i = 0; i < m; ++i)
      if (row_active[i]) local[i] = nrows++;
    Eigen::SparseMatrix<double, Eigen::ColMajor, int> pattern(nrows, static_cast<int>(nucleus.size()));
    std::vector<Eigen::Triplet<double, int>> trip;
    for (std::size_t c = 0; c < nucleus.size(); ++c)
      for (int p = start[nucleus[c]]; p < start[nucleus[c] + 1]; ++p)
        if (row_active[index[p]]) trip.emplace_back(local[index[p]], static_cast<int>(c), 1.0);
    pattern.setFromTriplets(trip.begin(), trip.end());
    pattern.makeCompressed();
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm;
    Eigen::COLAMDOrdering<int>()(pattern, perm);
    std::vector<int> ordered(nucleus.size());
    for (std::size_t c = 0; c < nucleus.size(); ++c) ordered[perm.indices()(static_cast<int>(c))] = nucleus[c];
    nucleus = ordered;
  }
  {
    int s = 0;
    for (int k : front) col_of_step_[s++] = k;
    for (int k : nucleus) col_of_step_[s++] = k;
    for (auto it = back.rbegin(); it != back.rend(); ++it) col_of_step_[s++] = *it;
  }
  // nucleus row counts guide the pivot choice
  for (int i = 0; i < m; ++i) {
    row_count[i] = 0;
    if (row_active[i])
      for (int p = rstart[i]; p < rstart[i + 1]; ++p) row_count[i] += col_active[rcols[p]];
  }

  std::vector<double>& x = work_;
  std::vector<int> mark(m, -1);
  std::vector<int> pattern;     // every row touched by the current column
  std::vector<int> topo;        // pivoted rows in reverse post-order
  std::vector<std::pair<int, int>> stack;
  std::vector<int> skipped;
  int step = 0;

  for (int s = 0; s < m; ++s) {
    const int pos = col_of_step_[s];
    pattern.clear();
    topo.clear();
    for (int p = start[pos]; p < start[pos + 1]; ++p) {
      const int i = index[p];
      x[i] += value[p];
      if (mark[i] == s) continue;
      mark[i] = s;
      pattern.push_back(i);
      if (step_of_row_[i] < 0) continue;
      // depth-first search through the columns of L
      stack.emplace_back(i, l_start_[step_of_row_[i]]);
      while (!stack.empty()) {
        auto& [row, next] = stack.back();
        const int k = step_of_row_[row];
        bool descended = false;
        while (next < l_start_[k + 1]) {
          const int child = l_index_[next++];
          if (mark[child] == s) continue;
          mark[child] = s;
          pattern.push_back(child);
          if (step_of_row_[child] >= 0) {
            stack.emplace_back(child, l_start_[step_of_row_[child]]);
            descended = true;
            break;
          }
        }
        if (!descended) {
          topo.push_back(row);
          stack.pop_back();
        }
      }
    }
    // numeric lower solve in topological order
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      const int j = *it;
      const double xj = x[j];
      if (xj == 0.0) continue;
      const int k = step_of_row_[j];
      for (int p = l_start_[k]; p < l_start_[k + 1]; ++p) x[l_index_[p]] -= l_value_[p] * xj;
    }
    double big = 0.0;
    for (int i : pattern)
      if (step_of_row_[i] < 0) big = std::max(big, std::abs(x[i]));
    double unorm = 0.0;
    for (int i : pattern) unorm = std::max(unorm, std::abs(x[i]));
    if (big <= kSingularTol * std::max(1.0, unorm)) {
      for (int i : pattern) x[i] = 0.0;
      skipped.push_back(pos);
      continue;
    }
    // threshold pivoting, sparsest acceptable row
    int piv = -1;
    for (int i : pattern) {
      if (step_of_row_[i] >= 0 || std::abs(x[i]) < kPivotThreshold * big) continue;
      if (piv < 0 || row_count[i] < row_count[piv] ||
          (row_count[i] == row_count[piv] && std::abs(x[i]) > std::abs(x[piv]))) {
        piv = i;
      }
    }
    const double d = x[piv];
    for (int i : pattern) {
      const double v = x[i];
      x[i] = 0.0;
      if (v == 0.0 || i == piv) continue;
      if (step_of_row_[i] >= 0) {
        u_index_.push_back(step_of_row_[i]);
        u_value_.push_back(v);
      } else {
        l_index_.push_back(i);
        l_value_.push_back(v / d);
      }
    }
    u_diag_.push_back(d);
    u_start_.push_back(static_cast<int>(u_index_.size()));
    l_start_.push_back(static_cast<int>(l_index_.size()));
    row_of_step_[step] = piv;
    step_of_row_[piv] = step;
    col_of_step_[step] = pos;
    ++step;
  }

  if (skipped.empty()) return true;
  // patch dependent positions with unit columns on rows left without pivot
  for (int i = 0; i < m; ++i)
    if (step_of_row_[i] < 0) free_rows.push_back(i);
  dependent = skipped;
  for (std::size_t t = 0; t < skipped.size(); ++t) {
    const int row = free_rows[t];
    u_diag_.push_back(sign_for_patch);
    u_start_.push_back(static_cast<int>(u_index_.size()));
    l_start_.push_back(static_cast<int>(l_index_.size()));
    row_of_step_[step] = row;
    step_of_row_[row] = step;
    col_of_step_[step] = skipped[t];
    ++step;
  }
  return false;
}

void BasisLu::solve(std::vector<double>& v) const {
  // forward: L, in pivot order, leaves step values at the pivot rows
  for (int k = 0; k < m_; ++k) {
    const double vk = v[row_of_step_[k]];
    if (vk == 0.0) continue;
    for (int p = l_start_[k]; p < l_start_[k + 1]; ++p) v[l_index_[p]] -= l_value_[p] * vk;
  }
  // backward: U
  std::vector<double>& z = work_;
  for (int k = m_ - 1; k >= 0; --k) {
    const double zk = v[row_of_step_[k]] / u_diag_[k];
    z[k] = zk;
    if (zk == 0.0) continue;
    for (int p = u_start_[k]; p < u_start_[k + 1]; ++p) v[row_of_step_[u_index_[p]]] -= u_value_[p] * zk;
  }
  for (int k = 0; k < m_; ++k) {
    v[col_of_step_[k]] = z[k];
    z[k] = 0.0;
  }
}

void BasisLu::solve_transposed(std::vector<double>& v) const {
  std::vector<double>& z = work_;
  // U^T z = c, with c permuted into step order
  for (int k = 0; k < m_; ++k) {
    double s = v[col_of_step_[k]];
    for (int p = u_start_[k]; p < u_start_[k + 1]; ++p) s -= u_value_[p] * z[u_index_[p]];
    z[k] = s / u_diag_[k];
  }
  // L^T w = z, rows of later steps first
  for (int k = m_ - 1; k >= 0; --k) {
    double s = z[k];
    for (int p = l_start_[k]; p < l_start_[k + 1]; ++p) s -= l_value_[p] * v[l_index_[p]];
    v[row_of_step_[k]] = s;
  }
  std::fill(z.begin(), z.end(), 0.0);
}

}  // namespace games::detail
