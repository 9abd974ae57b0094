#include "games/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "games/format.hpp"
#include "games/repdays.hpp"
#include "json.hpp"

#ifndef GAMES_VERSION
#define GAMES_VERSION "0.0.0"
#endif

namespace games {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads known keys from an object and rejects anything else.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InputError(where_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw InputError(where_ + "." + key + " has the wrong type");
    }
  }

  void path(const char* key, std::optional<fs::path>& out, const fs::path& base) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    if (!j_.at(key).is_string()) throw InputError(where_ + "." + key + " must be a string");
    fs::path p = j_.at(key).get<std::string>();
    out = p.is_relative() && !base.empty() ? base / p : p;
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw InputError("unknown key " + where_ + "." + key);
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

json synth_to_json(const SynthParams& p) {
  return {{"power_nodes", p.power_nodes},
          {"gas_nodes", p.gas_nodes},
          {"gas_storage", p.gas_storage},
          {"days", p.days},
          {"hours", p.hours},
          {"start_day", p.start_day},
          {"seasonal_amplitude", p.seasonal_amplitude},
          {"diurnal_amplitude", p.diurnal_amplitude},
          {"gas_temperature_sensitivity", p.gas_temperature_sensitivity},
          {"noise", p.noise},
          {"weather_ratio", p.weather_ratio},
          {"weather_persistence", p.weather_persistence},
          {"spatial_correlation", p.spatial_correlation},
          {"smoothing_passes", p.smoothing_passes},
          {"power_edge_ratio", p.power_edge_ratio},
          {"gas_edge_ratio", p.gas_edge_ratio},
          {"candidate_lines", p.candidate_lines},
          {"coupling_per_power", p.coupling_per_power},
          {"storage_per_gas", p.storage_per_gas},
          {"hours_per_period", p.hours_per_period},
          {"rps_share", p.rps_share}};
}

void synth_from_json(const json& j, SynthParams& p) {
  Reader r(j, "synthetic");
  r.get("power_nodes", p.power_nodes);
  r.get("gas_nodes", p.gas_nodes);
  r.get("gas_storage", p.gas_storage);
  r.get("days", p.days);
  r.get("hours", p.hours);
  r.get("start_day", p.start_day);
  r.get("seasonal_amplitude", p.seasonal_amplitude);
  r.get("diurnal_amplitude", p.diurnal_amplitude);
  r.get("gas_temperature_sensitivity", p.gas_temperature_sensitivity);
  r.get("noise", p.noise);
  r.get("weather_ratio", p.weather_ratio);
  r.get("weather_persistence", p.weather_persistence);
  r.get("spatial_correlation", p.spatial_correlation);
  r.get("smoothing_passes", p.smoothing_passes);
  r.get("power_edge_ratio", p.power_edge_ratio);
  r.get("gas_edge_ratio", p.gas_edge_ratio);
  r.get("candidate_lines", p.candidate_lines);
  r.get("coupling_per_power", p.coupling_per_power);
  r.get("storage_per_gas", p.storage_per_gas);
  r.get("hours_per_period", p.hours_per_period);
  r.get("rps_share", p.rps_share);
  r.finish();
}

json games_to_json(const GamesConfig& g) {
  json j = {{"k", g.k},
            {"alpha_g", g.alpha_g},
            {"alpha_w", g.alpha_w},
            {"alpha_s", g.alpha_s},
            {"learning_rate", g.learning_rate},
            {"max_epochs", g.max_epochs},
            {"patience", g.patience},
            {"adam_beta1", g.adam_beta1},
            {"adam_beta2", g.adam_beta2},
            {"adam_epsilon", g.adam_epsilon}};
  j["hidden_sizes"] = g.hidden_sizes ? json(*g.hidden_sizes) : json(nullptr);
  return j;
}

void games_from_json(const json& j, GamesConfig& g) {
  Reader r(j, "games");
  r.get("k", g.k);
  r.get("alpha_g", g.alpha_g);
  r.get("alpha_w", g.alpha_w);
  r.get("alpha_s", g.alpha_s);
  r.get("learning_rate", g.learning_rate);
  r.get("max_epochs", g.max_epochs);
  r.get("patience", g.patience);
  r.get("adam_beta1", g.adam_beta1);
  r.get("adam_beta2", g.adam_beta2);
  r.get("adam_epsilon", g.adam_epsilon);
  if (r.has("hidden_sizes") && !j.at("hidden_sizes").is_null()) {
    std::vector<Eigen::Index> h;
    r.get("hidden_sizes", h);
    g.hidden_sizes = h;
  }
  r.finish();
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json solver_to_json(const SolverOptions& o) {
  return {{"gap", o.gap},
          {"node_limit", o.node_limit},
          {"time_limit_s", number_or_null(o.time_limit_s)},
          {"feasibility_tol", o.feasibility_tol},
          {"optimality_tol", o.optimality_tol},
          {"integrality_tol", o.integrality_tol},
          {"iteration_limit", o.iteration_limit},
          {"refactor_interval", o.refactor_interval}};
}

void solver_from_json(const json& j, SolverOptions& o) {
  Reader r(j, "solver");
  r.get("gap", o.gap);
  r.get("node_limit", o.node_limit);
  if (r.has("time_limit_s")) {
    if (j.at("time_limit_s").is_null()) {
      o.time_limit_s = kInf;
    } else {
      r.get("time_limit_s", o.time_limit_s);
    }
  }
  r.get("feasibility_tol", o.feasibility_tol);
  r.get("optimality_tol", o.optimality_tol);
  r.get("integrality_tol", o.integrality_tol);
  r.get("iteration_limit", o.iteration_limit);
  r.get("refactor_interval", o.refactor_interval);
  r.finish();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
}

std::string goal_tag(double goal) { return "g" + format_double(goal); }

SolveStatus status_from_string(const std::string& s) {
  for (auto st : {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded, SolveStatus::GapLimit,
                  SolveStatus::IterationLimit})
    if (s == to_string(st)) return st;
  throw InputError("unknown solve status '" + s + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw InputError("malformed number '" + s + "'");
  return v;
}

// Files written under `root`, as sorted relative paths.
std::vector<fs::path> list_files(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<fs::path> day_set_files(const fs::path& out) {
  const fs::path dir = out / "daysets";
  if (!fs::is_directory(dir)) throw InputError("no day sets under " + dir.string() + "; run cluster first");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no day sets under " + dir.string());
  return files;
}

}  // namespace

// -- config ------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (dataset_dir.has_value() != instance_path.has_value()) {
    throw InputError("dataset_dir and instance must be given together");
  }
  if (dataset_dir && !fs::is_directory(*dataset_dir)) {
    throw InputError("dataset directory " + dataset_dir->string() + " does not exist");
  }
  if (instance_path && !fs::is_regular_file(*instance_path)) {
    throw InputError("instance file " + instance_path->string() + " does not exist");
  }
  if (!dataset_dir) synth.validate();
  if (k_list.empty()) throw InputError("k_list is empty");
  for (auto k : k_list)
    if (k < 1) throw InputError("k_list values must be at least 1");
  if (reduction_goals.empty()) throw InputError("reduction_goals is empty");
  for (double g : reduction_goals)
    if (!(g >= 0.0 && g <= 1.0)) throw InputError("reduction goals must lie in [0,1]");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InputError("train_fraction must lie in (0,1)");
  if (games.k < 1 || games.max_epochs < 1 || games.patience < 1) {
    throw InputError("games.k, max_epochs and patience must be positive");
  }
  if (!(solver.gap >= 0.0) || solver.node_limit < 1) throw InputError("solver gap or node_limit out of range");
  if (threads < 0) throw InputError("threads must be nonnegative");
  if (output_dir.empty()) throw InputError("output_dir is empty");
}

ExperimentConfig parse_config(const std::string& text, const fs::path& base, const std::string& stage) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config must be an object");
  if (j.contains("stages")) {
    const json& stages = j.at("stages");
    if (!stages.is_object()) throw InputError("config.stages must be an object");
    if (!stage.empty() && stages.contains(stage)) {
      const json patch = stages.at(stage);
      if (!patch.is_object() || patch.contains("stages")) throw InputError("bad override for stage " + stage);
      j.merge_patch(patch);
    }
    j.erase("stages");
  }
  ExperimentConfig c;
  Reader r(j, "config");
  r.path("dataset_dir", c.dataset_dir, base);
  r.path("instance", c.instance_path, base);
  if (r.has("synthetic")) synth_from_json(j.at("synthetic"), c.synth);
  if (r.has("games")) games_from_json(j.at("games"), c.games);
  if (r.has("solver")) solver_from_json(j.at("solver"), c.solver);
  r.get("train_fraction", c.train_fraction);
  r.get("k_list", c.k_list);
  r.get("reduction_goals", c.reduction_goals);
  r.get("seed", c.seed);
  r.get("threads", c.threads);
  std::optional<fs::path> out;
  r.path("output_dir", out, base);
  if (out) c.output_dir = *out;
  r.finish();
  return c;
}

ExperimentConfig load_config(const fs::path& path, const std::string& stage) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.parent_path(), stage);
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["dataset_dir"] = c.dataset_dir ? json(c.dataset_dir->generic_string()) : json(nullptr);
  j["instance"] = c.instance_path ? json(c.instance_path->generic_string()) : json(nullptr);
  j["synthetic"] = synth_to_json(c.synth);
  j["games"] = games_to_json(c.games);
  j["solver"] = solver_to_json(c.solver);
  j["train_fraction"] = c.train_fraction;
  j["k_list"] = c.k_list;
  j["reduction_goals"] = c.reduction_goals;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir.generic_string();
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StageSeeds derive_seeds(std::uint64_t master) {
  std::uint64_t state = master;
  StageSeeds s;
  s.synth = splitmix64(state);
  s.split = splitmix64(state);
  s.init = splitmix64(state);
  s.cluster = splitmix64(state);
  s.solver = splitmix64(state);
  return s;
}

bool is_stage(const std::string& name) {
  return std::any_of(std::begin(kStages), std::end(kStages), [&](const char* s) { return name == s; });
}

std::string version_string() { return GAMES_VERSION; }

// -- artifacts ---------------------------------------------------------------

void save_embeddings(const EmbeddingSet& set, const fs::path& path) {
  json emb = json::array();
  for (const auto& z : set.embeddings) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(z.cols()));
      for (Eigen::Index c = 0; c < z.cols(); ++c) row[static_cast<std::size_t>(c)] = z(i, c);
      rows.push_back(row);
    }
    emb.push_back(rows);
  }
  json j;
  j["day_indices"] = set.day_indices;
  j["embeddings"] = emb;
  write_text(path, j.dump() + "\n");
}

EmbeddingSet load_embeddings(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path.string());
  try {
    const json j = json::parse(f);
    EmbeddingSet set;
    set.day_indices = j.at("day_indices").get<std::vector<int>>();
    for (const auto& day : j.at("embeddings")) {
      const auto rows = day.get<std::vector<std::vector<double>>>();
      const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
      const Eigen::Index k = n > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
      Eigen::MatrixXd z(n, k);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != k) throw InputError("ragged embedding in " + path.string());
        for (Eigen::Index c = 0; c < k; ++c) z(i, c) = rows[i][c];
      }
      set.embeddings.push_back(std::move(z));
    }
    if (set.embeddings.size() != set.day_indices.size()) {
      throw InputError("embedding and day counts differ in " + path.string());
    }
    return set;
  } catch (const json::exception& e) {
    throw InputError("malformed embeddings " + path.string() + ": " + e.what());
  }
}

GtepSolution load_planning(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path.string());
  try {
    const json j = json::parse(f);
    GtepSolution s;
    s.status = status_from_string(j.at("status").get<std::string>());
    s.objective = j.at("objective").get<double>();
    s.eta = j.at("eta").is_null() ? kInf : j.at("eta").get<double>();
    const json& inv = j.at("investment");
    s.investment.new_units = inv.at("new_units").get<std::vector<int>>();
    s.investment.retired_units = inv.at("retired_units").get<std::vector<int>>();
    s.investment.line_built = inv.at("line_built").get<std::vector<int>>();
    s.investment.storage_new = inv.at("storage_new").get<std::vector<int>>();
    s.investment.supply_expansions = inv.at("supply_expansions").get<std::vector<int>>();
    s.investment.pipeline_expansions = inv.at("pipeline_expansions").get<std::vector<int>>();
    return s;
  } catch (const json::exception& e) {
    throw InputError("malformed solution " + path.string() + ": " + e.what());
  }
}

void validate_output_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("missing output " + path.string());
  const auto ext = path.extension().string();
  if (ext == ".json") {
    if (!json::accept(f)) throw InputError("output " + path.string() + " is not valid JSON");
    return;
  }
  if (ext == ".csv") {
    std::string line;
    std::size_t width = 0;
    std::size_t lines = 0;
    while (std::getline(f, line)) {
      if (line.empty() || line[0] == '#') continue;
      const std::size_t cells = split_csv_line(line).size();
      if (lines == 0) width = cells;
      if (cells != width) throw InputError("output " + path.string() + " has a ragged row");
      ++lines;
    }
    if (lines == 0) throw InputError("output " + path.string() + " has no header");
    return;
  }
  if (fs::file_size(path) == 0) throw InputError("output " + path.string() + " is empty");
}

// -- stages ------------------------------------------------------------------

IngestedData ingest(const ExperimentConfig& config) {
  IngestedData d;
  if (config.dataset_dir) {
    d.raw = load_dataset(*config.dataset_dir);
    d.instance = load_instance(*config.instance_path);
  } else {
    auto s = generate_synthetic(config.synth, derive_seeds(config.seed).synth);
    d.raw = std::move(s.dataset);
    d.instance = std::move(s.instance);
  }
  if (d.raw.normalization.applied) throw InputError("ingested dataset is already normalized");
  d.instance.validate(d.raw);
  return d;
}

std::vector<fs::path> plan_day_sets(const ExperimentConfig& config) {
  const fs::path out = config.output_dir;
  const auto files = day_set_files(out);
  const IngestedData data = ingest(config);
  SolverOptions opts = config.solver;
  opts.seed = derive_seeds(config.seed).solver;
  const double baseline = baseline_emission(data.instance, data.raw, opts);
  fs::create_directories(out / "plans");
  std::vector<fs::path> written;
  for (const auto& file : files) {
    const RepresentativeDaySet set = load_day_set(file);
    if (set.day_count() != data.raw.day_count()) {
      throw InputError("day set " + file.string() + " does not match the dataset");
    }
    for (double goal : config.reduction_goals) {
      const GtepInstance capped = with_reduction_goal(data.instance, goal, baseline);
      GtepSolution plan = solve_planning(capped, set, data.raw, opts);
      if (plan.status == SolveStatus::Infeasible) {
        throw InfeasibleError("planning model for " + file.filename().string() + " is infeasible");
      }
      plan.eta = capped.coupling.eta;
      const fs::path p = out / "plans" / (file.stem().string() + "_" + goal_tag(goal) + ".json");
      write_solution_json(plan, p);
      written.push_back(p);
    }
  }
  return written;
}

std::vector<fs::path> evaluate_plans(const ExperimentConfig& config) {
  const fs::path out = config.output_dir;
  const fs::path dir = out / "plans";
  if (!fs::is_directory(dir)) throw InputError("no planning reports under " + dir.string() + "; run plan first");
  std::vector<fs::path> plans;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") plans.push_back(e.path());
  std::sort(plans.begin(), plans.end());
  const IngestedData data = ingest(config);
  SolverOptions opts = config.solver;
  opts.seed = derive_seeds(config.seed).solver;
  fs::create_directories(out / "solutions");
  std::vector<fs::path> written;
  for (const auto& file : plans) {
    const GtepSolution plan = load_planning(file);
    GtepInstance capped = data.instance;
    capped.coupling.eta = plan.eta;
    GtepSolution full = evaluate_full_horizon(capped, plan, data.raw, opts);
    full.eta = plan.eta;
    const auto check = check_feasibility(capped, full, data.raw);
    const fs::path base = out / "solutions" / file.stem();
    write_solution_json(full, base.string() + ".json");
    write_day_summary_csv(capped, full, data.raw, base.string() + "_days.csv");
    json c;
    for (const auto& [family, v] : check.families) c[family] = {{"value", v.value}, {"where", v.where}};
    c["max_violation"] = check.max_violation();
    write_text(base.string() + "_check.json", c.dump(2) + "\n");
    written.push_back(base.string() + ".json");
  }
  return written;
}

std::vector<fs::path> report_plots(const fs::path& csv, const fs::path& out_dir) {
  std::ifstream f(csv);
  if (!f) throw InputError("cannot open " + csv.string());
  std::string line;
  if (!std::getline(f, line)) throw InputError("comparison CSV " + csv.string() + " is empty");
  const auto header = split_csv_line(line);
  std::vector<std::string> expected{"K", "source", "goal"};
  for (const char* c : kTable3Columns) expected.emplace_back(c);
  if (header != expected) throw InputError("comparison CSV " + csv.string() + " has an unexpected header");

  // (goal, source) -> K -> quantities
  std::map<std::pair<double, std::string>, std::map<std::size_t, std::array<double, 6>>> series;
  std::set<std::size_t> ks;
  std::size_t row_no = 1;
  while (std::getline(f, line)) {
    ++row_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != expected.size()) {
      throw InputError("comparison CSV row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                       " cells");
    }
    const double kv = parse_number(cells[0]);
    if (!(kv >= 1.0) || kv != std::floor(kv)) throw InputError("comparison CSV row " + std::to_string(row_no) + " has a bad K");
    const auto k = static_cast<std::size_t>(kv);
    if (cells[1] != "embeddings" && cells[1] != "raw") {
      throw InputError("comparison CSV row " + std::to_string(row_no) + " has unknown source '" + cells[1] + "'");
    }
    std::array<double, 6> q{};
    for (std::size_t c = 0; c < 6; ++c) q[c] = parse_number(cells[3 + c]);
    auto& s = series[{parse_number(cells[2]), cells[1]}];
    if (!s.emplace(k, q).second) throw InputError("comparison CSV repeats K=" + cells[0] + " for one series");
    ks.insert(k);
  }
  if (ks.empty()) throw InputError("comparison CSV " + csv.string() + " lists no K values");

  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (std::size_t c = 0; c < 6; ++c) {
    std::ostringstream o;
    o << "K";
    for (const auto& [key, values] : series) o << ',' << key.second << '@' << format_double(key.first);
    o << '\n';
    for (std::size_t k : ks) {
      o << k;
      for (const auto& [key, values] : series) {
        o << ',';
        const auto it = values.find(k);
        if (it != values.end()) o << format_double(it->second[c]);
      }
      o << '\n';
    }
    const fs::path p = out_dir / (std::string("plot_") + kTable3Columns[c] + ".csv");
    write_text(p, o.str());
    written.push_back(p);
  }

  // Table-3 layout: average over K of 100 (games - raw) / raw, per goal
  std::set<double> goals;
  for (const auto& [key, values] : series) goals.insert(key.first);
  std::ostringstream o;
  o << "goal,Total,Power,NG,Inv-FOM,Shedding,Emission\n";
  for (double goal : goals) {
    const auto g = series.find({goal, "embeddings"});
    const auto r = series.find({goal, "raw"});
    if (g == series.end() || r == series.end()) {
      throw InputError("goal " + format_double(goal) + " lacks one of the two sources");
    }
    std::array<double, 6> sum{};
    std::size_t count = 0;
    for (const auto& [k, qg] : g->second) {
      const auto qr = r->second.find(k);
      if (qr == r->second.end()) throw InputError("K=" + std::to_string(k) + " lacks a raw row");
      for (std::size_t c = 0; c < 6; ++c) sum[c] += percentage_change(qg[c], qr->second[c]);
      ++count;
    }
    o << format_double(goal);
    for (double s : sum) o << ',' << format_double(s / static_cast<double>(count));
    o << '\n';
  }
  const fs::path p = out_dir / "table3_summary.csv";
  write_text(p, o.str());
  written.push_back(p);
  return written;
}

PipelineResult run_pipeline(const ExperimentConfig& config, const std::string& stop_after) {
  if (!is_stage(stop_after)) throw InputError("unknown stage '" + stop_after + "'");
  run_stage("config", [&] { config.validate(); });
  const fs::path out = config.output_dir;
  const StageSeeds seeds = derive_seeds(config.seed);
  PipelineResult result;
  auto done = [&](const char* stage) {
    result.last_stage = stage;
    return stop_after == stage;
  };
  auto finish = [&] {
    json manifest;
    manifest["version"] = version_string();
    manifest["config_hash"] = config_hash(config);
    manifest["master_seed"] = config.seed;
    manifest["stage_seeds"] = {{"synth", seeds.synth},
                               {"split", seeds.split},
                               {"init", seeds.init},
                               {"cluster", seeds.cluster},
                               {"solver", seeds.solver}};
    manifest["last_stage"] = result.last_stage;
    manifest["config"] = json::parse(config_to_json(config));
    json files = json::array();
    for (const auto& rel : list_files(out)) {
      if (rel == "manifest.json") continue;
      validate_output_file(out / rel);
      files.push_back({{"path", rel.generic_string()}, {"bytes", fs::file_size(out / rel)}});
    }
    manifest["files"] = files;
    write_text(out / "manifest.json", manifest.dump(2) + "\n");
    validate_output_file(out / "manifest.json");
    for (const auto& rel : list_files(out)) result.files.push_back(out / rel);
    return result;
  };

  fs::create_directories(out);
  const IngestedData data = run_stage("ingest", [&] {
    IngestedData d = ingest(config);
    for (std::size_t k : config.k_list)
      if (k > d.raw.day_count()) throw InputError("K=" + std::to_string(k) + " exceeds the day count");
    save_dataset(d.raw, out / "data");
    save_instance(d.instance, out / "data" / "instance.json");
    return d;
  });
  if (done("ingest")) return finish();

  const MultiResolutionDataset normalized = run_stage("normalize", [&] { return normalize(data.raw); });
  if (done("normalize")) return finish();

  const GamesModel model = run_stage("train", [&] {
    GamesConfig gc = config.games;
    gc.rng_seed = seeds.init;
    const DaySplit split = split_days(normalized.day_count(), config.train_fraction, seeds.split);
    TrainResult tr = train(normalized, gc, split);
    save_model(tr.model, out / "model.json");
    write_training_log(tr.log, out / "training_log.csv");
    return tr.model;
  });
  if (done("train")) return finish();

  const EmbeddingSet embeddings = run_stage("embed", [&] {
    EmbeddingSet e = embed_all(model, normalized);
    save_embeddings(e, out / "embeddings.json");
    return e;
  });
  if (done("embed")) return finish();

  run_stage("cluster", [&] {
    fs::create_directories(out / "daysets");
    for (std::size_t k : config.k_list) {
      save_day_set(kmedoids(embeddings, k, seeds.cluster), out / "daysets" / ("embeddings_k" + std::to_string(k) + ".json"));
      save_day_set(kmedoids_raw(data.raw, k, seeds.cluster), out / "daysets" / ("raw_k" + std::to_string(k) + ".json"));
    }
  });
  if (done("cluster")) return finish();

  result.report = run_stage("compare", [&] {
    CompareOptions opts;
    opts.k_list = config.k_list;
    opts.goals = config.reduction_goals;
    opts.seed = seeds.cluster;
    opts.solver = config.solver;
    opts.solver.seed = seeds.solver;
    opts.threads = config.threads;
    opts.keep_solutions = true;
    ComparisonReport report = compare_methods(data.instance, data.raw, embeddings, opts);
    fs::create_directories(out / "solutions");
    for (const auto& row : report.rows) {
      const std::string stem = row.source + "_k" + std::to_string(row.k) + "_" + goal_tag(row.goal);
      GtepSolution planning = *row.planning;
      planning.eta = row.eta;
      GtepSolution full = *row.full;
      full.eta = row.eta;
      write_solution_json(planning, out / "solutions" / (stem + "_planning.json"));
      write_solution_json(full, out / "solutions" / (stem + "_full.json"));
    }
    result.comparison_csv = out / "comparison.csv";
    write_comparison_csv(report, result.comparison_csv);
    write_change_summary_csv(report, out / "change_summary.csv");
    for (auto& row : report.rows) {
      row.planning.reset();
      row.full.reset();
    }
    return report;
  });
  if (done("compare")) return finish();

  run_stage("report", [&] { report_plots(result.comparison_csv, out / "plots"); });
  done("report");
  return finish();
}

}  // namespace games
