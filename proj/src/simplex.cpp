// Bounded-variable primal revised simplex.
//
// Internal form: every row i gets a logical variable r_i = a_i x with bounds
// derived from its sense, so the constraint block is [A  -I] (x, r) = 0.
// The problem is scaled by powers of two (rows, columns, objective) before
// solving; all tolerances apply in the scaled space. Phase 1 minimizes the
// sum of bound violations of basic variables (no artificials); phase 2 the
// true cost. The basis inverse is a sparse LU factorization plus a
// product-form eta file, refactorized every `refactor_interval` pivots.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "basis_lu.hpp"
#include "games/errors.hpp"
#include "games/lp.hpp"

namespace games {

// ---------------------------------------------------------------------------
// SparseLp

int SparseLp::add_column(std::string col_name, double c, double lo, double hi, bool is_integer) {
  cost.push_back(c);
  lower.push_back(lo);
  upper.push_back(hi);
  integer.push_back(is_integer ? 1 : 0);
  col_names.push_back(std::move(col_name));
  return num_cols() - 1;
}

int SparseLp::add_row(std::string row_name, RowSense s, double b) {
  sense.push_back(s);
  rhs.push_back(b);
  row_names.push_back(std::move(row_name));
  return num_rows() - 1;
}

void SparseLp::add_entry(int row, int col, double value) { entries.push_back({row, col, value}); }

void SparseLp::validate() const {
  const auto n = cost.size();
  if (lower.size() != n || upper.size() != n || integer.size() != n || col_names.size() != n) {
    throw InputError("column arrays differ in length");
  }
  if (sense.size() != rhs.size() || row_names.size() != rhs.size()) {
    throw InputError("row arrays differ in length");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(cost[j]) || std::isinf(cost[j])) throw InputError("non-finite cost on " + col_names[j]);
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == kInf ||
        upper[j] == -kInf) {
      throw InputError("invalid bounds on column " + col_names[j]);
    }
  }
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    if (!std::isfinite(rhs[i])) throw InputError("non-finite rhs on row " + row_names[i]);
  }
  std::vector<std::pair<int, int>> keys;
  keys.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= num_rows() || e.col < 0 || e.col >= num_cols()) {
      throw InputError("matrix entry out of range");
    }
    if (!std::isfinite(e.value)) throw InputError("non-finite matrix entry");
    keys.emplace_back(e.row, e.col);
  }
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
    throw InputError("duplicate matrix entry");
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::GapLimit: return "gap-limit";
    case SolveStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// workspace

namespace {

double pow2_round(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) return 1.0;
  return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(s))));
}

}  // namespace

struct SimplexWorkspace::Impl {
  SolverOptions opts;
  int m = 0;
  int n = 0;
  int total = 0;
  // scaled structural matrix, column-major
  std::vector<int> col_start;
  std::vector<int> row_index;
  std::vector<double> value;
  std::vector<double> row_scale;
  std::vector<double> col_scale;
  double obj_scale = 1.0;
  std::vector<double> cost;  // scaled, logicals zero
  std::vector<double> row_lo;
  std::vector<double> row_hi;

  // per-solve state
  std::vector<double> lo, up, x;
  std::vector<VarState> state;
  std::vector<int> head;
  std::vector<int> where;
  detail::BasisLu lu;
  struct Eta {
    int r;
    double pivot;
    std::vector<int> idx;
    std::vector<double> val;
  };
  std::vector<Eta> etas;
  std::size_t eta_nnz = 0;
  long refactor_count = 0;
  // row-wise copy of the scaled matrix for pivot-row products
  std::vector<int> row_start, row_col;
  std::vector<double> row_val;
  std::vector<double> d, weight, rho, acc;
  std::vector<char> acc_mark;
  std::vector<int> touched;
  long iterations = 0;
  int bland_activations = 0;

  Impl(const SparseLp& lp, const SolverOptions& o) : opts(o) {
    lp.validate();
    m = lp.num_rows();
    n = lp.num_cols();
    total = n + m;
    // CSC of the unscaled matrix
    std::vector<int> count(n + 1, 0);
    for (const auto& e : lp.entries)
      if (e.value != 0.0) ++count[e.col + 1];
    std::partial_sum(count.begin(), count.end(), count.begin());
    col_start = count;
    row_index.assign(col_start[n], 0);
    value.assign(col_start[n], 0.0);
    std::vector<int> fill(col_start.begin(), col_start.end() - 1);
    for (const auto& e : lp.entries) {
      if (e.value == 0.0) continue;
      row_index[fill[e.col]] = e.row;
      value[fill[e.col]++] = e.value;
    }
    compute_scaling();
    for (int j = 0; j < n; ++j)
      for (int p = col_start[j]; p < col_start[j + 1]; ++p) value[p] *= row_scale[row_index[p]] * col_scale[j];
    double cmax = 0.0;
    for (int j = 0; j < n; ++j) cmax = std::max(cmax, std::abs(lp.cost[j] * col_scale[j]));
    obj_scale = cmax > 0.0 ? pow2_round(1.0 / cmax) : 1.0;
    cost.assign(total, 0.0);
    for (int j = 0; j < n; ++j) cost[j] = lp.cost[j] * col_scale[j] * obj_scale;
    row_start.assign(m + 1, 0);
    for (int p = 0; p < col_start[n]; ++p) ++row_start[row_index[p] + 1];
    std::partial_sum(row_start.begin(), row_start.end(), row_start.begin());
    row_col.resize(col_start[n]);
    row_val.resize(col_start[n]);
    {
      std::vector<int> next(row_start.begin(), row_start.end() - 1);
      for (int j = 0; j < n; ++j)
        for (int p = col_start[j]; p < col_start[j + 1]; ++p) {
          row_col[next[row_index[p]]] = j;
          row_val[next[row_index[p]]++] = value[p];
        }
    }
    acc.assign(total, 0.0);
    acc_mark.assign(total, 0);
    row_lo.resize(m);
    row_hi.resize(m);
    for (int i = 0; i < m; ++i) {
      const double b = lp.rhs[i] * row_scale[i];
      row_lo[i] = lp.sense[i] == RowSense::LessEqual ? -kInf : b;
      row_hi[i] = lp.sense[i] == RowSense::GreaterEqual ? kInf : b;
    }
  }

  void compute_scaling() {
    row_scale.assign(m, 1.0);
    col_scale.assign(n, 1.0);
    for (int pass = 0; pass < 6; ++pass) {
      std::vector<double> rmin(m, kInf), rmax(m, 0.0);
      for (int j = 0; j < n; ++j)
        for (int p = col_start[j]; p < col_start[j + 1]; ++p) {
          const double a = std::abs(value[p]) * col_scale[j];
          rmin[row_index[p]] = std::min(rmin[row_index[p]], a);
          rmax[row_index[p]] = std::max(rmax[row_index[p]], a);
        }
      for (int i = 0; i < m; ++i)
        if (rmax[i] > 0.0) row_scale[i] = 1.0 / std::sqrt(rmin[i] * rmax[i]);
      for (int j = 0; j < n; ++j) {
        double cmin = kInf, cmax = 0.0;
        for (int p = col_start[j]; p < col_start[j + 1]; ++p) {
          const double a = std::abs(value[p]) * row_scale[row_index[p]];
          cmin = std::min(cmin, a);
          cmax = std::max(cmax, a);
        }
        if (cmax > 0.0) col_scale[j] = 1.0 / std::sqrt(cmin * cmax);
      }
    }
    for (auto& s : row_scale) s = pow2_round(s);
    for (auto& s : col_scale) s = pow2_round(s);
  }

  // -- basis factorization ---------------------------------------------------

  /// Factorizes the current basis. Dependent columns are swapped for the
  /// logicals of the rows they leave uncovered; returns the number of swaps.
  int refactor() {
    ++refactor_count;
    etas.clear();
    eta_nnz = 0;
    std::vector<int> bstart(m + 1, 0), bindex;
    std::vector<double> bvalue;
    bindex.reserve(static_cast<std::size_t>(m) * 2);
    bvalue.reserve(static_cast<std::size_t>(m) * 2);
    for (int k = 0; k < m; ++k) {
      const int j = head[k];
      if (j < n) {
        for (int p = col_start[j]; p < col_start[j + 1]; ++p) {
          bindex.push_back(row_index[p]);
          bvalue.push_back(value[p]);
        }
      } else {
        bindex.push_back(j - n);
        bvalue.push_back(-1.0);
      }
      bstart[k + 1] = static_cast<int>(bindex.size());
    }
    std::vector<int> dependent, free_rows;
    if (lu.factor(m, bstart, bindex, bvalue, dependent, free_rows, -1.0)) return 0;
    for (std::size_t t = 0; t < dependent.size(); ++t) {
      const int pos = dependent[t];
      const int old = head[pos];
      const int logical = n + free_rows[t];
      state[old] = VarState::AtLower;
      x[old] = nonbasic_value(old, state[old]);
      where[old] = -1;
      head[pos] = logical;
      where[logical] = pos;
      state[logical] = VarState::Basic;
    }
    return static_cast<int>(dependent.size());
  }

  void ftran(std::vector<double>& v) const {
    if (m == 0) return;
    lu.solve(v);
    for (const auto& e : etas) {
      const double vr = v[e.r] / e.pivot;
      if (vr != 0.0) {
        for (std::size_t k = 0; k < e.idx.size(); ++k) v[e.idx[k]] -= e.val[k] * vr;
      }
      v[e.r] = vr;
    }
  }

  void btran(std::vector<double>& w) const {
    if (m == 0) return;
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double s = w[it->r];
      for (std::size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * w[it->idx[k]];
      w[it->r] = s / it->pivot;
    }
    lu.solve_transposed(w);
  }

  void load_column(int j, std::vector<double>& a) const {
    std::fill(a.begin(), a.end(), 0.0);
    if (j < n) {
      for (int p = col_start[j]; p < col_start[j + 1]; ++p) a[row_index[p]] = value[p];
    } else {
      a[j - n] = -1.0;
    }
  }

  void compute_basic_values() {
    std::vector<double> rhs(m, 0.0);
    for (int j = 0; j < total; ++j) {
      if (state[j] == VarState::Basic || x[j] == 0.0) continue;
      if (j < n) {
        for (int p = col_start[j]; p < col_start[j + 1]; ++p) rhs[row_index[p]] -= value[p] * x[j];
      } else {
        rhs[j - n] += x[j];
      }
    }
    ftran(rhs);
    for (int k = 0; k < m; ++k) x[head[k]] = rhs[k];
  }

  // -- state setup -----------------------------------------------------------

  double nonbasic_value(int j, VarState& s) const {
    if (s == VarState::AtLower && lo[j] == -kInf) s = up[j] < kInf ? VarState::AtUpper : VarState::Free;
    if (s == VarState::AtUpper && up[j] == kInf) s = lo[j] > -kInf ? VarState::AtLower : VarState::Free;
    if (s == VarState::Free && lo[j] > -kInf) s = VarState::AtLower;
    if (s == VarState::Free && up[j] < kInf) s = VarState::AtUpper;
    switch (s) {
      case VarState::AtLower: return lo[j];
      case VarState::AtUpper: return up[j];
      default: return 0.0;
    }
  }

  void slack_basis() {
    state.assign(total, VarState::AtLower);
    head.resize(m);
    where.assign(total, -1);
    for (int j = 0; j < n; ++j) x[j] = nonbasic_value(j, state[j]);
    for (int i = 0; i < m; ++i) {
      state[n + i] = VarState::Basic;
      head[i] = n + i;
      where[n + i] = i;
    }
  }

  bool load_basis(const Basis& b) {
    if (static_cast<int>(b.columns.size()) != n || static_cast<int>(b.rows.size()) != m) return false;
    state.resize(total);
    for (int j = 0; j < n; ++j) state[j] = b.columns[j];
    for (int i = 0; i < m; ++i) state[n + i] = b.rows[i];
    head.clear();
    where.assign(total, -1);
    for (int j = 0; j < total; ++j) {
      if (state[j] == VarState::Basic) {
        where[j] = static_cast<int>(head.size());
        head.push_back(j);
      } else {
        x[j] = nonbasic_value(j, state[j]);
      }
    }
    return static_cast<int>(head.size()) == m;
  }

  // -- main loop -------------------------------------------------------------

  double infeasibility(int j) const {
    if (x[j] < lo[j]) return lo[j] - x[j];
    if (x[j] > up[j]) return x[j] - up[j];
    return 0.0;
  }

  SolveResult solve(const std::vector<double>& lower, const std::vector<double>& upper,
                    const Basis* warm) {
    const auto t0 = std::chrono::steady_clock::now();
    lo.assign(total, 0.0);
    up.assign(total, 0.0);
    x.assign(total, 0.0);
    for (int j = 0; j < n; ++j) {
      lo[j] = lower[j] == -kInf ? -kInf : lower[j] / col_scale[j];
      up[j] = upper[j] == kInf ? kInf : upper[j] / col_scale[j];
      if (lo[j] > up[j]) {
        SolveResult r;
        r.status = SolveStatus::Infeasible;
        return r;
      }
    }
    for (int i = 0; i < m; ++i) {
      lo[n + i] = row_lo[i];
      up[n + i] = row_hi[i];
    }
    if (!(warm && load_basis(*warm))) slack_basis();
    refactor();
    compute_basic_values();

    const double ftol = opts.feasibility_tol;
    const double dtol = opts.optimality_tol;
    const double piv_tol = 1e-9;
    int since_refactor = 0;
    bool verified = false;  // last pricing ran on a fresh factorization
    bool bland = false;
    double last_obj = kInf;
    int stall = 0;
    const int stall_limit = std::max(50, m / 20);
    int recoveries = 0;
    std::vector<double> cb(m), y(m), alpha(m);
    d.assign(total, 0.0);
    weight.assign(total, 1.0);
    bool d_phase2 = false;
    long d_epoch = -1;
    SolveResult res;

    while (true) {
      if (iterations >= opts.iteration_limit) {
        res.status = SolveStatus::IterationLimit;
        break;
      }
      if ((iterations & 63) == 0 && opts.time_limit_s < kInf) {
        const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (el > opts.time_limit_s) {
          res.status = SolveStatus::IterationLimit;
          break;
        }
      }
      // dense eta files cost more per solve than a fresh factorization
      if (since_refactor >= opts.refactor_interval ||
          (since_refactor >= 8 && eta_nnz > lu.fill() + static_cast<std::size_t>(m))) {
        if (!recover_factorization(recoveries)) break;
        since_refactor = 0;
      }

      bool phase1 = false;
      double obj = 0.0;
      for (int k = 0; k < m; ++k) {
        const int j = head[k];
        if (x[j] < lo[j] - ftol) {
          cb[k] = -1.0;
          phase1 = true;
        } else if (x[j] > up[j] + ftol) {
          cb[k] = 1.0;
          phase1 = true;
        } else {
          cb[k] = 0.0;
        }
      }
      if (phase1) {
        for (int k = 0; k < m; ++k) obj += infeasibility(head[k]);
      } else {
        for (int k = 0; k < m; ++k) cb[k] = cost[head[k]];
        for (int j = 0; j < total; ++j) obj += cost[j] * x[j];
      }
      if (obj < last_obj - 1e-12 * std::max(1.0, std::abs(last_obj))) {
        stall = 0;
        bland = false;
      } else if (++stall > stall_limit && !bland) {
        bland = true;
        ++bland_activations;
      }
      last_obj = obj;

      // phase-2 reduced costs are updated from the pivot row between
      // factorizations; phase 1 recomputes them because its costs move
      const bool d_fresh = phase1 || !d_phase2 || d_epoch != refactor_count;
      if (d_fresh) {
        if (!phase1 && !d_phase2) std::fill(weight.begin(), weight.end(), 1.0);
        y = cb;
        btran(y);
        for (int j = 0; j < total; ++j) {
          if (state[j] == VarState::Basic) {
            d[j] = 0.0;
            continue;
          }
          double dj = phase1 ? 0.0 : cost[j];
          if (j < n) {
            for (int p = col_start[j]; p < col_start[j + 1]; ++p) dj -= value[p] * y[row_index[p]];
          } else {
            dj += y[j - n];
          }
          d[j] = dj;
        }
        d_phase2 = !phase1;
        d_epoch = refactor_count;
      }

      // Devex pricing
      int q = -1;
      double best = 0.0;
      int q_dir = 0;
      for (int j = 0; j < total; ++j) {
        const VarState s = state[j];
        if (s == VarState::Basic) continue;
        if (up[j] - lo[j] <= 0.0) continue;  // fixed
        const double dj = d[j];
        int dir = 0;
        if ((s == VarState::AtLower || s == VarState::Free) && dj < -dtol) dir = 1;
        if ((s == VarState::AtUpper || s == VarState::Free) && dj > dtol) dir = -1;
        if (dir == 0) continue;
        if (bland) {
          q = j;
          q_dir = dir;
          break;
        }
        const double score = dj * dj / weight[j];
        if (score > best) {
          best = score;
          q = j;
          q_dir = dir;
        }
      }

      if (q < 0) {
        if (!verified && since_refactor > 0) {
          if (!recover_factorization(recoveries)) break;
          since_refactor = 0;
          verified = true;
          continue;
        }
        if (phase1) {
          res.status = SolveStatus::Infeasible;
          res.certificate.assign(m, 0.0);
          for (int i = 0; i < m; ++i) {
            const double yi = y[i] * row_scale[i];
            res.certificate[i] = yi;
            if (std::abs(y[i]) > dtol) res.certificate_rows.push_back(i);
          }
        } else {
          res.status = SolveStatus::Optimal;
          res.duals.resize(m);
          for (int i = 0; i < m; ++i) res.duals[i] = y[i] * row_scale[i] / obj_scale;
          res.reduced_costs.resize(n);
          for (int j = 0; j < n; ++j) {
            double d = cost[j];
            for (int p = col_start[j]; p < col_start[j + 1]; ++p) d -= value[p] * y[row_index[p]];
            res.reduced_costs[j] = d / (col_scale[j] * obj_scale);
          }
        }
        break;
      }
      verified = false;

      load_column(q, alpha);
      ftran(alpha);
      // Harris two-pass ratio test
      double theta_max = kInf;
      for (int k = 0; k < m; ++k) {
        const double a = alpha[k];
        if (std::abs(a) < piv_tol) continue;
        const double rate = -q_dir * a;
        const double dist = blocking_distance(head[k], rate, phase1, ftol);
        if (dist == kInf) continue;
        theta_max = std::min(theta_max, (std::max(dist, 0.0) + ftol) / std::abs(rate));
      }
      int r = -1;
      double theta = kInf;
      if (theta_max < kInf) {
        double best_piv = 0.0;
        for (int k = 0; k < m; ++k) {
          const double a = alpha[k];
          if (std::abs(a) < piv_tol) continue;
          const double rate = -q_dir * a;
          const double dist = blocking_distance(head[k], rate, phase1, ftol);
          if (dist == kInf) continue;
          const double ratio = std::max(dist, 0.0) / std::abs(rate);
          if (ratio > theta_max) continue;
          const bool better = bland ? (r < 0 || ratio < theta - 1e-15 ||
                                       (ratio <= theta + 1e-15 && head[k] < head[r]))
                                    : std::abs(a) > best_piv;
          if (better) {
            best_piv = std::abs(a);
            r = k;
            theta = ratio;
          }
        }
      }
      const double range = up[q] - lo[q];
      if (range < kInf && (r < 0 || range <= theta)) {
        // bound flip of the entering variable
        theta = range;
        r = -1;
      }
      if (r < 0 && theta == kInf) {
        if (!phase1 && !d_fresh) {
          if (!recover_factorization(recoveries)) break;
          since_refactor = 0;
          continue;
        }
        if (!phase1) {
          res.status = SolveStatus::Unbounded;
          res.certificate.assign(n, 0.0);
          if (q < n) res.certificate[q] = q_dir * col_scale[q];
          for (int k = 0; k < m; ++k)
            if (head[k] < n) res.certificate[head[k]] = -q_dir * alpha[k] * col_scale[head[k]];
          break;
        }
        // phase 1 cannot be unbounded; numerical trouble
        if (!recover_factorization(recoveries)) break;
        since_refactor = 0;
        continue;
      }

      ++iterations;
      x[q] += q_dir * theta;
      for (int k = 0; k < m; ++k)
        if (alpha[k] != 0.0) x[head[k]] -= q_dir * theta * alpha[k];
      if (r < 0) {
        state[q] = q_dir > 0 ? VarState::AtUpper : VarState::AtLower;
        x[q] = q_dir > 0 ? up[q] : lo[q];
        continue;
      }
      const int leaving = head[r];
      update_pricing(q, leaving, r, alpha[r], phase1);
      const double rate = -q_dir * alpha[r];
      bool to_lower = rate < 0.0;
      if (phase1 && x[leaving] + q_dir * theta * alpha[r] < lo[leaving] - ftol) to_lower = true;
      if (phase1 && x[leaving] + q_dir * theta * alpha[r] > up[leaving] + ftol) to_lower = false;
      x[leaving] = to_lower ? lo[leaving] : up[leaving];
      state[leaving] = to_lower ? VarState::AtLower : VarState::AtUpper;
      if (lo[leaving] == -kInf && up[leaving] == kInf) {
        state[leaving] = VarState::Free;
        x[leaving] = 0.0;
      }
      where[leaving] = -1;
      head[r] = q;
      where[q] = r;
      state[q] = VarState::Basic;
      Eta eta;
      eta.r = r;
      eta.pivot = alpha[r];
      for (int k = 0; k < m; ++k) {
        if (k != r && alpha[k] != 0.0) {
          eta.idx.push_back(k);
          eta.val.push_back(alpha[k]);
        }
      }
      eta_nnz += eta.idx.size();
      etas.push_back(std::move(eta));
      ++since_refactor;
    }

    res.iterations = iterations;
    res.bland_activations = bland_activations;
    res.x.resize(n);
    for (int j = 0; j < n; ++j) res.x[j] = x[j] * col_scale[j];
    res.row_activity.resize(m);
    for (int i = 0; i < m; ++i) res.row_activity[i] = x[n + i] / row_scale[i];
    double objective = 0.0;
    for (int j = 0; j < n; ++j) objective += cost[j] * x[j];
    res.objective = objective / obj_scale;
    if (res.status == SolveStatus::Optimal) res.bound = res.objective;
    res.basis.columns.assign(state.begin(), state.begin() + n);
    res.basis.rows.assign(state.begin() + n, state.end());
    return res;
  }

  /// Pivot-row pass: row r of the old basis inverse times the nonbasic
  /// columns, updating phase-2 reduced costs and Devex reference weights.
  void update_pricing(int q, int leaving, int r, double arq, bool phase1) {
    rho.assign(m, 0.0);
    rho[r] = 1.0;
    btran(rho);
    const double beta = phase1 ? 0.0 : d[q] / arq;
    const double wq = weight[q];
    touched.clear();
    for (int i = 0; i < m; ++i) {
      const double ri = rho[i];
      if (ri == 0.0) continue;
      const int logical = n + i;
      if (state[logical] != VarState::Basic) {
        if (acc_mark[logical] == 0) {
          acc_mark[logical] = 1;
          touched.push_back(logical);
        }
        acc[logical] -= ri;
      }
      for (int p = row_start[i]; p < row_start[i + 1]; ++p) {
        const int j = row_col[p];
        if (state[j] == VarState::Basic) continue;
        if (acc_mark[j] == 0) {
          acc_mark[j] = 1;
          touched.push_back(j);
        }
        acc[j] += ri * row_val[p];
      }
    }
    for (int j : touched) {
      const double arj = acc[j];
      acc[j] = 0.0;
      acc_mark[j] = 0;
      if (j == q) continue;
      d[j] -= beta * arj;
      const double ratio = arj / arq;
      weight[j] = std::max(weight[j], ratio * ratio * wq);
    }
    d[q] = 0.0;
    d[leaving] = -beta;
    weight[leaving] = std::max(wq / (arq * arq), 1.0);
    if (weight[leaving] > 1e8) std::fill(weight.begin(), weight.end(), 1.0);
  }

  /// Distance a basic variable can travel at the given rate before it blocks;
  /// infinity when it does not block.
  double blocking_distance(int j, double rate, bool phase1, double ftol) const {
    const double v = x[j];
    if (phase1 && v < lo[j] - ftol) return rate > 0.0 ? lo[j] - v : kInf;
    if (phase1 && v > up[j] + ftol) return rate < 0.0 ? v - up[j] : kInf;
    if (rate > 0.0) return up[j] < kInf ? up[j] - v : kInf;
    return lo[j] > -kInf ? v - lo[j] : kInf;
  }

  bool recover_factorization(int& recoveries) {
    if (refactor() > 0 && ++recoveries > 1000) throw NumericalError("basis keeps turning singular");
    compute_basic_values();
    for (int k = 0; k < m; ++k)
      if (!std::isfinite(x[head[k]])) throw NumericalError("non-finite basic solution");
    return true;
  }
};

SimplexWorkspace::SimplexWorkspace(const SparseLp& lp, const SolverOptions& opts)
    : impl_(std::make_unique<Impl>(lp, opts)) {}
SimplexWorkspace::~SimplexWorkspace() = default;
SimplexWorkspace::SimplexWorkspace(SimplexWorkspace&&) noexcept = default;
SimplexWorkspace& SimplexWorkspace::operator=(SimplexWorkspace&&) noexcept = default;

SolveResult SimplexWorkspace::solve(const std::vector<double>& lower,
                                    const std::vector<double>& upper, const Basis* warm_start) {
  impl_->iterations = 0;
  impl_->bland_activations = 0;
  return impl_->solve(lower, upper, warm_start);
}

SolveResult solve_lp(const SparseLp& lp, const SolverOptions& opts) {
  SimplexWorkspace ws(lp, opts);
  return ws.solve(lp.lower, lp.upper, nullptr);
}

SolveResult solve_lp(const SparseLp& lp, const SolverOptions& opts, const Basis& warm_start) {
  SimplexWorkspace ws(lp, opts);
  return ws.solve(lp.lower, lp.upper, &warm_start);
}

}  // namespace games
