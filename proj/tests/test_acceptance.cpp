// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <tuple>

#include "ae_fixtures.hpp"
#include "games/autoencoder.hpp"
#include "games/gtep.hpp"
#include "games/mps.hpp"
#include "games/pipeline.hpp"
#include "games/repdays.hpp"
#include "games/synth.hpp"
#include "gtep_fixtures.hpp"
#include "reference_forward.hpp"
#include "solver_oracles.hpp"

#ifndef GAMES_SOURCE_DIR
#define GAMES_SOURCE_DIR "."
#endif

using namespace games;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string detail = v.detail;
  if (limit_s > 0.0 && sec >= limit_s) {
    v.pass = false;
    detail += "; runtime over " + std::to_string(static_cast<int>(limit_s)) + " s";
  }
  if (!v.pass) ++failures;
  std::printf("criterion %2d %-28s %s  %s [%.2f s]\n", id, name, v.pass ? "PASS" : "FAIL", detail.c_str(), sec);
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

/// Reference synthetic data for training checks: 6 power and 3 NG nodes,
/// one coupling edge per power node.
MultiResolutionDataset reference_dataset(std::size_t days, std::uint64_t seed) {
  SynthParams p;
  p.days = days;
  p.coupling_per_power = 1;
  return normalize(generate_synthetic(p, seed).dataset);
}

// -- 1 ----------------------------------------------------------------------

Verdict gradient_check() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    // n = 3 + 2 joint nodes, t = 3 + 2 + 2 + 1 channels, k = 3
    auto inst = testing::random_instance(100 + seed, 3, 2, 3, 2, 2, 3, 3);
    const auto g = gradients(inst.model, inst.data.days, inst.config);
    auto params = inst.model.params.tensors();
    const auto grads = g.grad.tensors();
    for (std::size_t k = 0; k < params.size(); ++k) {
      for (Eigen::Index e = 0; e < params[k]->size(); ++e) {
        double& p = params[k]->data()[e];
        const double saved = p;
        const double h = 1e-5;
        p = saved + h;
        const double up = p;
        const long double f_up = testing::reference_loss(inst.model, inst.data.days, inst.config);
        p = saved - h;
        const double down = p;
        const long double f_down = testing::reference_loss(inst.model, inst.data.days, inst.config);
        p = saved;
        const double fd = static_cast<double>((f_up - f_down) / (static_cast<long double>(up) - down));
        const double an = grads[k]->data()[e];
        worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8}));
      }
    }
  }
  return {worst <= 1e-5, "worst relative error " + fmt(worst)};
}

// -- 2 ----------------------------------------------------------------------

Verdict training_efficacy() {
  const auto data = reference_dataset(50, 1);
  GamesConfig c;
  const auto r = train(data, c, split_days(data.day_count(), 0.8, 2));
  const double ratio = r.log.back().train_loss / r.log.front().train_loss;
  const int epochs = r.log.back().epoch;
  const bool ok = ratio < 0.2 && r.stopped_early && epochs < c.max_epochs;
  return {ok, "final/initial train loss " + fmt(ratio) + ", stopped at epoch " + std::to_string(epochs) +
                  (r.stopped_early ? " by early stopping" : " without early stopping")};
}

// -- 3 ----------------------------------------------------------------------

constexpr std::size_t kTrendDays = 150;
constexpr std::uint64_t kTrendSeed = 0;

Verdict bottleneck_trend() {
  const auto data = reference_dataset(kTrendDays, kTrendSeed);
  const auto split = split_days(data.day_count(), 0.8, kTrendSeed + 100);
  std::vector<double> best;
  for (Eigen::Index k = 1; k <= 4; ++k) {
    GamesConfig c;
    c.k = k;
    c.rng_seed = kTrendSeed;
    best.push_back(train(data, c, split).best_val_loss);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < best.size(); ++i) decreasing = decreasing && best[i] < best[i - 1];
  const bool diminishing = best[2] - best[3] < best[0] - best[1];
  std::string detail = "best validation loss k=1..4:";
  for (double b : best) detail += " " + fmt(b);
  return {decreasing && diminishing, detail};
}

// -- 4 ----------------------------------------------------------------------

double rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::size_t agree = 0, pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      ++pairs;
      agree += (a[i] == a[j]) == (b[i] == b[j]) ? 1 : 0;
    }
  return static_cast<double>(agree) / static_cast<double>(pairs);
}

Verdict clustering_oracle() {
  std::vector<Eigen::MatrixXd> line;
  for (double x : {0.0, 1.0, 5.0, 6.0}) line.push_back(Eigen::MatrixXd::Constant(1, 1, x));
  double exhaustive = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b) {
      double cost = 0.0;
      for (const auto& p : line) cost += std::min((p - line[a]).squaredNorm(), (p - line[b]).squaredNorm());
      exhaustive = std::min(exhaustive, cost);
    }
  const double obj = kmedoids(line, 2, 0).objective;

  double worst_ri = 1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::vector<Eigen::MatrixXd> pts;
    std::vector<std::size_t> labels;
    for (std::size_t c = 0; c < 3; ++c)
      for (int i = 0; i < 15; ++i) {
        Eigen::MatrixXd p = Eigen::MatrixXd::NullaryExpr(4, 3, [&] { return noise(rng); });
        p.col(c % 3).array() += 6.0;
        pts.push_back(p);
        labels.push_back(c);
      }
    worst_ri = std::min(worst_ri, rand_index(kmedoids(pts, 3, seed).assignment, labels));
  }
  const bool ok = obj == exhaustive && exhaustive == 2.0 && worst_ri >= 0.95;
  return {ok, "4-point objective " + fmt(obj) + " (enumeration " + fmt(exhaustive) + "), worst Rand index " +
                  fmt(worst_ri)};
}

// -- 5 ----------------------------------------------------------------------

Verdict solver_oracle() {
  int lp_ok = 0;
  for (unsigned seed = 0; seed < 50; ++seed) {
    const SparseLp lp = testing::random_lp(1000 + seed, 10 + seed % 7, 12 + seed % 9);
    const auto r = solve_lp(lp);
    if (r.status == SolveStatus::Optimal && testing::kkt_check(lp, r).ok()) ++lp_ok;
  }
  int milp_ok = 0;
  for (unsigned seed = 0; seed < 20; ++seed) {
    const SparseLp lp = testing::random_milp(500 + seed);
    const double oracle = testing::enumerate_milp(lp);
    const auto r = solve_milp(lp);
    if (oracle == kInf) {
      milp_ok += r.status == SolveStatus::Infeasible ? 1 : 0;
    } else if (r.status == SolveStatus::Optimal &&
               std::abs(r.objective - oracle) <= 1e-6 * std::max(1.0, std::abs(oracle))) {
      ++milp_ok;
    }
  }
  return {lp_ok == 50 && milp_ok == 20,
          std::to_string(lp_ok) + "/50 LPs pass KKT, " + std::to_string(milp_ok) + "/20 MILPs match enumeration"};
}

// -- 6 ----------------------------------------------------------------------

Verdict mps_round_trip() {
  int ok = 0;
  for (unsigned seed = 0; seed < 20; ++seed) {
    SparseLp lp = seed % 2 ? testing::random_milp(seed + 70) : testing::random_lp(seed + 70, 8, 10);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& e : lp.entries) e.value = u(rng) * 1e4 / 3.0;
    for (auto& b : lp.rhs) b = u(rng) / 7.0;
    lp.lower[0] = -kInf;
    std::stringstream ss;
    write_mps(lp, ss);
    const SparseLp back = read_mps(ss);
    auto trip = [](const SparseLp& x) {
      std::vector<std::tuple<int, int, double>> t;
      for (const auto& e : x.entries) t.emplace_back(e.row, e.col, e.value);
      std::sort(t.begin(), t.end());
      return t;
    };
    const bool same = lp.cost == back.cost && lp.lower == back.lower && lp.upper == back.upper &&
                      lp.integer == back.integer && lp.sense == back.sense && lp.rhs == back.rhs &&
                      lp.col_names == back.col_names && lp.row_names == back.row_names && trip(lp) == trip(back);
    ok += same ? 1 : 0;
  }
  return {ok == 20, std::to_string(ok) + "/20 instances identical after write and read"};
}

// -- 7, 10, 11 ----------------------------------------------------------------

struct SmokeRuns {
  ExperimentConfig config;
  PipelineResult first;
  PipelineResult second;
  double first_s = 0.0;
  double second_s = 0.0;
};

SmokeRuns& smoke() {
  static SmokeRuns runs = [] {
    SmokeRuns s;
    s.config = load_config(fs::path(GAMES_SOURCE_DIR) / "configs" / "smoke.json", "pipeline");
    const fs::path base = fs::temp_directory_path() / "games_acceptance";
    fs::remove_all(base);
    for (int i = 0; i < 2; ++i) {
      ExperimentConfig c = s.config;
      c.output_dir = base / ("run" + std::to_string(i));
      const auto t0 = std::chrono::steady_clock::now();
      auto r = run_pipeline(c);
      const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      (i == 0 ? s.first : s.second) = std::move(r);
      (i == 0 ? s.first_s : s.second_s) = sec;
    }
    return s;
  }();
  return runs;
}

Verdict two_step_feasibility() {
  const auto& s = smoke();
  const auto& rows = s.first.report->rows;
  double worst_violation = 0.0, worst_excess = -kInf;
  for (const auto& row : rows) {
    worst_violation = std::max(worst_violation, row.max_violation);
    worst_excess = std::max(worst_excess, row.cost.emission_total - row.eta);
  }
  const std::size_t expected = 2 * s.config.k_list.size() * s.config.reduction_goals.size();
  const bool ok = rows.size() == expected && worst_violation <= 1e-6 && worst_excess <= 1e-6;
  return {ok, std::to_string(rows.size()) + " runs, max violation " + fmt(worst_violation) +
                  ", max emission minus cap " + fmt(worst_excess)};
}

Verdict comparison_harness() {
  const auto& s = smoke();
  const auto& report = *s.first.report;
  bool ok = report.average_change.size() == 2;
  for (const auto& [goal, change] : report.average_change) ok = ok && change.size() == 6;
  // each average is the mean over K of 100 (games - raw) / raw
  int sign_checks = 0;
  for (const auto& [goal, change] : report.average_change) {
    for (std::size_t c = 0; c < 6; ++c) {
      double sum = 0.0;
      for (std::size_t k : s.config.k_list) {
        double g = 0.0, r = 0.0;
        for (const auto& row : report.rows) {
          if (row.goal != goal || row.k != k) continue;
          (row.source == "embeddings" ? g : r) = table3_quantities(row.cost)[c];
        }
        const double pc = percentage_change(g, r);
        if (r != 0.0 && g != r) {
          ok = ok && ((pc < 0.0) == (g < r));
          ++sign_checks;
        }
        sum += pc;
      }
      const double mean = sum / static_cast<double>(s.config.k_list.size());
      ok = ok && ((std::isnan(mean) && std::isnan(change[c])) || std::abs(mean - change[c]) <= 1e-9 * std::max(1.0, std::abs(mean)));
    }
  }
  std::ifstream f(s.first.comparison_csv.parent_path() / "change_summary.csv");
  std::string header, line;
  std::getline(f, header);
  int lines = 0;
  while (std::getline(f, line)) ++lines;
  ok = ok && header == "goal,Total,Power,NG,Inv-FOM,Shedding,Emission" && lines == 2;
  return {ok, "6 quantities x " + std::to_string(lines) + " goals, " + std::to_string(sign_checks) +
                  " signs agree with the cheaper method"};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const auto& s = smoke();
  const std::string a = slurp(s.first.comparison_csv);
  const std::string b = slurp(s.second.comparison_csv);
  const bool ok = !a.empty() && a == b && s.first_s < 300.0 && s.second_s < 300.0;
  return {ok, std::string(a == b ? "comparison CSVs byte-identical" : "comparison CSVs differ") + ", runs took " +
                  fmt(s.first_s) + " s and " + fmt(s.second_s) + " s"};
}

// -- 8 ----------------------------------------------------------------------

Verdict policy_monotonicity() {
  const auto c = testing::tiny_case(4, 4);
  SolverOptions opts;
  opts.gap = 1e-9;
  const double baseline = baseline_emission(c.instance, c.dataset, opts);
  const auto horizon = Horizon::full(c.dataset);
  std::vector<double> obj;
  bool optimal = true;
  for (double goal : {0.0, 0.8, 0.95}) {
    const GtepInstance in = goal > 0.0 ? with_reduction_goal(c.instance, goal, baseline) : c.instance;
    const auto sol = solve_planning(in, horizon, c.dataset, opts);
    optimal = optimal && sol.status == SolveStatus::Optimal;
    obj.push_back(sol.objective);
  }
  const double tol = 1e-9 * std::abs(obj[2]);
  const bool ok = optimal && obj[2] >= obj[1] - tol && obj[1] >= obj[0] - tol;
  return {ok, "objectives unconstrained " + fmt(obj[0]) + ", 80% " + fmt(obj[1]) + ", 95% " + fmt(obj[2]) +
                  (optimal ? "" : " (not all proven optimal)")};
}

// -- 9 ----------------------------------------------------------------------

Verdict degenerate_sanity() {
  SynthParams p;
  p.power_nodes = 3;
  p.gas_nodes = 2;
  p.gas_storage = 1;
  p.days = 4;
  p.candidate_lines = 1;
  const auto s = generate_synthetic(p, 3);
  RepresentativeDaySet all;
  for (std::size_t d = 0; d < s.dataset.day_count(); ++d) {
    all.medoids.push_back(d);
    all.assignment.push_back(d);
    all.weights.push_back(1);
  }
  const auto plan = solve_planning(s.instance, all, s.dataset, SolverOptions{});
  const auto full = evaluate_full_horizon(s.instance, plan, s.dataset);
  const double rel = std::abs(full.objective - plan.objective) / std::max(1.0, std::abs(full.objective));

  auto c = testing::tiny_case(2);
  for (auto& d : c.dataset.days) {
    d.electricity.setZero();
    d.gas.setZero();
  }
  SolverOptions opts;
  opts.gap = 1e-9;
  const auto zero = solve_planning(c.instance, Horizon::full(c.dataset), c.dataset, opts);
  int builds = 0;
  for (const auto* v : {&zero.investment.new_units, &zero.investment.storage_new, &zero.investment.supply_expansions,
                        &zero.investment.pipeline_expansions})
    for (int u : *v) builds += u;
  for (std::size_t l = 0; l < c.instance.power.lines.size(); ++l)
    if (!c.instance.power.lines[l].existing) builds += zero.investment.line_built[l];
  const bool ok = rel <= 1e-6 && std::abs(zero.cost.total) <= 1e-9 && std::abs(zero.objective) <= 1e-9 && builds == 0;
  return {ok, "all-days relative gap " + fmt(rel) + "; zero demand cost " + fmt(zero.cost.total) + ", builds " +
                  std::to_string(builds)};
}

}  // namespace

int main() {
  criterion(1, "gradient check", 10.0, gradient_check);
  criterion(2, "training efficacy", 60.0, training_efficacy);
  criterion(3, "bottleneck width trend", 0.0, bottleneck_trend);
  criterion(4, "clustering oracle", 5.0, clustering_oracle);
  criterion(5, "LP/MILP oracle", 60.0, solver_oracle);
  criterion(6, "MPS round trip", 0.0, mps_round_trip);
  criterion(7, "two-step feasibility", 0.0, two_step_feasibility);
  criterion(8, "policy monotonicity", 0.0, policy_monotonicity);
  criterion(9, "degenerate sanity", 0.0, degenerate_sanity);
  criterion(10, "comparison harness", 0.0, comparison_harness);
  criterion(11, "end-to-end determinism", 0.0, determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
