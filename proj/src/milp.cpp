#include <algorithm>
#include <chrono>
#include <memory>
#include <optional>
#include <cmath>
#include <queue>
#include <vector>

#include "games/lp.hpp"

namespace games {

namespace {

struct BoundChange {
  int col;
  double lo;
  double hi;
};

struct Node {
  double bound;
  long id;
  std::vector<BoundChange> changes;  // relative to the root bounds
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

/// Most fractional integer column (ties to the lowest index), or -1.
int pick_branch(const SparseLp& lp, const std::vector<double>& x, double tol) {
  int best = -1;
  double best_score = 0.0;
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (!lp.integer[j]) continue;
    const double f = x[j] - std::floor(x[j]);
    if (f <= tol || f >= 1.0 - tol) continue;
    const double score = std::min(f, 1.0 - f);
    if (score > best_score + 1e-12) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

/// Least fractional integer column (ties to the lowest index), or -1.
int pick_dive(const SparseLp& lp, const std::vector<double>& x, double tol) {
  int best = -1;
  double best_score = 1.0;
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (!lp.integer[j]) continue;
    const double f = x[j] - std::floor(x[j]);
    if (f <= tol || f >= 1.0 - tol) continue;
    const double score = std::min(f, 1.0 - f);
    if (score < best_score - 1e-12) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

}  // namespace

SolveResult solve_milp(const SparseLp& lp, const SolverOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  SimplexWorkspace ws(lp, opts);
  const int n = lp.num_cols();
  std::vector<double> root_lo = lp.lower;
  std::vector<double> root_hi = lp.upper;
  for (int j = 0; j < n; ++j) {
    if (!lp.integer[j]) continue;
    if (root_lo[j] > -kInf) root_lo[j] = std::ceil(root_lo[j] - opts.integrality_tol);
    if (root_hi[j] < kInf) root_hi[j] = std::floor(root_hi[j] + opts.integrality_tol);
  }

  long iterations = 0;
  long nodes = 0;
  int bland = 0;
  SolveResult root = ws.solve(root_lo, root_hi, nullptr);
  iterations += root.iterations;
  bland += root.bland_activations;
  ++nodes;
  if (root.status != SolveStatus::Optimal) {
    root.nodes = nodes;
    return root;
  }

  SolveResult incumbent;
  incumbent.objective = kInf;
  bool have_incumbent = false;
  auto gap_tol = [&](double inc) { return std::max(opts.gap * std::abs(inc), 1e-9); };
  auto accept = [&](SolveResult&& r) {
    if (r.status != SolveStatus::Optimal) return;
    if (pick_branch(lp, r.x, opts.integrality_tol) >= 0) return;
    if (have_incumbent && r.objective >= incumbent.objective) return;
    for (int j = 0; j < n; ++j)
      if (lp.integer[j]) r.x[j] = std::round(r.x[j]);
    incumbent = std::move(r);
    have_incumbent = true;
  };

  auto root_basis = std::make_shared<const Basis>(root.basis);
  if (pick_branch(lp, root.x, opts.integrality_tol) < 0) {
    accept(std::move(root));
  } else {
    // rounding heuristics: fix the integers at rounded values and re-solve
    for (int mode = 0; mode < 2; ++mode) {
      std::vector<double> lo = root_lo;
      std::vector<double> hi = root_hi;
      bool ok = true;
      for (int j = 0; j < n && ok; ++j) {
        if (!lp.integer[j]) continue;
        double v = mode == 0 ? std::round(root.x[j]) : std::ceil(root.x[j] - opts.integrality_tol);
        v = std::min(std::max(v, root_lo[j]), root_hi[j]);
        lo[j] = hi[j] = v;
      }
      SolveResult h = ws.solve(lo, hi, root_basis.get());
      iterations += h.iterations;
      accept(std::move(h));
    }
    // fractional diving from the root relaxation
    {
      std::vector<double> lo = root_lo;
      std::vector<double> hi = root_hi;
      SolveResult cur = root;
      while (cur.status == SolveStatus::Optimal) {
        if (have_incumbent && cur.objective >= incumbent.objective - gap_tol(incumbent.objective)) break;
        const int j = pick_dive(lp, cur.x, opts.integrality_tol);
        if (j < 0) {
          accept(std::move(cur));
          break;
        }
        const double v = std::round(cur.x[j]);
        if (v < cur.x[j]) {
          hi[j] = v;
        } else {
          lo[j] = v;
        }
        const Basis basis = cur.basis;
        cur = ws.solve(lo, hi, &basis);
        iterations += cur.iterations;
      }
    }
    const double root_obj = root.objective;
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;
    open.push(Node{root_obj, next_id++, {}, root_basis});
    bool limit_hit = false;
    double best_bound = root_obj;
    // after branching, the child on the rounding side is solved next
    std::optional<Node> plunge;
    while (plunge || !open.empty()) {
      best_bound = open.empty() ? kInf : open.top().bound;
      if (plunge) best_bound = std::min(best_bound, plunge->bound);
      if (have_incumbent && incumbent.objective - best_bound <= gap_tol(incumbent.objective)) break;
      if (nodes >= opts.node_limit || elapsed() > opts.time_limit_s) {
        limit_hit = true;
        break;
      }
      Node node;
      if (plunge) {
        node = std::move(*plunge);
        plunge.reset();
      } else {
        node = open.top();
        open.pop();
      }
      std::vector<double> lo = root_lo;
      std::vector<double> hi = root_hi;
      for (const auto& c : node.changes) {
        lo[c.col] = c.lo;
        hi[c.col] = c.hi;
      }
      SolveResult r = ws.solve(lo, hi, node.basis.get());
      ++nodes;
      iterations += r.iterations;
      bland += r.bland_activations;
      if (r.status != SolveStatus::Optimal) continue;
      if (have_incumbent && r.objective >= incumbent.objective - gap_tol(incumbent.objective)) continue;
      const int j = pick_branch(lp, r.x, opts.integrality_tol);
      if (j < 0) {
        accept(std::move(r));
        continue;
      }
      auto basis = std::make_shared<const Basis>(r.basis);
      const double fl = std::floor(r.x[j]);
      Node down{r.objective, next_id++, node.changes, basis};
      down.changes.push_back({j, lo[j], fl});
      Node up{r.objective, next_id++, std::move(node.changes), basis};
      up.changes.push_back({j, fl + 1.0, hi[j]});
      if (r.x[j] - fl < 0.5) {
        open.push(std::move(up));
        plunge = std::move(down);
      } else {
        open.push(std::move(down));
        plunge = std::move(up);
      }
    }
    if (open.empty() && !plunge) best_bound = have_incumbent ? incumbent.objective : kInf;
    if (!have_incumbent) {
      SolveResult out;
      out.status = limit_hit ? SolveStatus::IterationLimit : SolveStatus::Infeasible;
      out.bound = best_bound;
      out.nodes = nodes;
      out.iterations = iterations;
      out.bland_activations = bland;
      return out;
    }
    incumbent.bound = std::min(best_bound, incumbent.objective);
    incumbent.status = limit_hit ? SolveStatus::GapLimit : SolveStatus::Optimal;
    incumbent.nodes = nodes;
    incumbent.iterations = iterations;
    incumbent.bland_activations = bland;
    return incumbent;
  }
  incumbent.bound = incumbent.objective;
  incumbent.status = SolveStatus::Optimal;
  incumbent.nodes = nodes;
  incumbent.iterations = iterations;
  incumbent.bland_activations = bland;
  return incumbent;
}

}  // namespace games
