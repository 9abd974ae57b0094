#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "games/errors.hpp"
#include "games/format.hpp"
#include "games/gtep.hpp"

namespace games {

std::array<double, 6> table3_quantities(const CostBreakdown& c) {
  return {c.total, c.power_system, c.ng_system, c.invest_fom_power, c.shed_power + c.shed_gas, c.emission_power};
}

double percentage_change(double games_value, double raw_value) {
  if (raw_value == 0.0) return games_value == 0.0 ? 0.0 : std::nan("");
  return 100.0 * (games_value - raw_value) / raw_value;
}

namespace {

struct Task {
  std::vector<std::size_t> medoids;
  std::vector<std::size_t> weights;
  double goal;

  auto key() const { return std::tie(goal, medoids, weights); }
  bool operator<(const Task& o) const { return key() < o.key(); }
};

struct Outcome {
  CostBreakdown cost;
  double max_violation = 0.0;
  double eta = kInf;
  std::shared_ptr<const GtepSolution> planning;
  std::shared_ptr<const GtepSolution> full;
};

}  // namespace

ComparisonReport compare_methods(const GtepInstance& instance, const MultiResolutionDataset& dataset,
                                 const EmbeddingSet& embeddings, const CompareOptions& opts) {
  if (opts.k_list.empty()) throw InputError("K list is empty");
  if (opts.goals.empty()) throw InputError("reduction goal list is empty");
  if (embeddings.embeddings.size() != dataset.day_count()) {
    throw InputError("embeddings do not cover the dataset days");
  }
  const double baseline = baseline_emission(instance, dataset, opts.solver);

  struct Pending {
    std::size_t k;
    std::string source;
    double goal;
    Task task;
  };
  std::vector<Pending> pending;
  for (std::size_t k : opts.k_list) {
    if (k < 1 || k > dataset.day_count()) throw InputError("K must lie in [1, day count]");
    const auto sets = {std::make_pair(std::string("embeddings"), kmedoids(embeddings, k, opts.seed)),
                       std::make_pair(std::string("raw"), kmedoids_raw(dataset, k, opts.seed))};
    for (const auto& [source, set] : sets)
      for (double goal : opts.goals) pending.push_back({k, source, goal, Task{set.medoids, set.weights, goal}});
  }

  // identical day sets share one evaluation
  std::map<Task, Outcome> outcomes;
  for (const auto& p : pending) outcomes.emplace(p.task, Outcome{});
  std::vector<std::map<Task, Outcome>::iterator> work;
  for (auto it = outcomes.begin(); it != outcomes.end(); ++it) work.push_back(it);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next++;
      if (i >= work.size()) return;
      try {
        const Task& t = work[i]->first;
        const GtepInstance capped = with_reduction_goal(instance, t.goal, baseline);
        Horizon h;
        h.days = t.medoids;
        for (auto w : t.weights) h.weights.push_back(static_cast<double>(w));
        const GtepSolution plan = solve_planning(capped, h, dataset, opts.solver);
        if (plan.status == SolveStatus::Infeasible) throw InfeasibleError("planning model infeasible");
        const GtepSolution full = evaluate_full_horizon(capped, plan, dataset, opts.solver);
        Outcome& o = work[i]->second;
        o.cost = full.cost;
        o.eta = capped.coupling.eta;
        o.max_violation = check_feasibility(capped, full, dataset).max_violation();
        if (opts.keep_solutions) {
          o.planning = std::make_shared<const GtepSolution>(plan);
          o.full = std::make_shared<const GtepSolution>(full);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = work.size();
      }
    }
  };
  unsigned threads = opts.threads > 0 ? static_cast<unsigned>(opts.threads) : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(work.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  ComparisonReport report;
  for (const auto& p : pending) {
    const Outcome& o = outcomes.at(p.task);
    report.rows.push_back({p.k, p.source, p.goal, p.task.medoids, o.cost, o.max_violation, o.eta, o.planning, o.full});
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    return std::tie(a.goal, a.k, a.source) < std::tie(b.goal, b.k, b.source);
  });
  for (double goal : opts.goals) {
    std::array<double, 6> sum{};
    std::size_t count = 0;
    for (std::size_t k : opts.k_list) {
      const ComparisonRow* g = nullptr;
      const ComparisonRow* r = nullptr;
      for (const auto& row : report.rows) {
        if (row.goal != goal || row.k != k) continue;
        (row.source == "embeddings" ? g : r) = &row;
      }
      const auto qg = table3_quantities(g->cost);
      const auto qr = table3_quantities(r->cost);
      for (std::size_t c = 0; c < 6; ++c) sum[c] += percentage_change(qg[c], qr[c]);
      ++count;
    }
    for (auto& s : sum) s /= static_cast<double>(count);
    report.average_change[goal] = sum;
  }
  return report;
}

void write_comparison_csv(const ComparisonReport& report, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << "K,source,goal";
  for (const char* c : kTable3Columns) f << ',' << c;
  f << '\n';
  for (const auto& row : report.rows) {
    f << row.k << ',' << row.source << ',' << format_double(row.goal);
    for (double v : table3_quantities(row.cost)) f << ',' << format_double(v);
    f << '\n';
  }
}

void write_change_summary_csv(const ComparisonReport& report, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << "goal,Total,Power,NG,Inv-FOM,Shedding,Emission\n";
  for (const auto& [goal, change] : report.average_change) {
    f << format_double(goal);
    for (double v : change) f << ',' << format_double(v);
    f << '\n';
  }
}

}  // namespace games
