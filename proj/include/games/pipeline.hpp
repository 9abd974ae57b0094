#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "games/autoencoder.hpp"
#include "games/errors.hpp"
#include "games/dataset.hpp"
#include "games/gtep.hpp"
#include "games/lp.hpp"
#include "games/synth.hpp"

namespace games {

/// One experiment. Data comes either from files (dataset directory plus
/// instance JSON) or from the synthetic generator.
struct ExperimentConfig {
  std::optional<std::filesystem::path> dataset_dir;
  std::optional<std::filesystem::path> instance_path;
  SynthParams synth;
  GamesConfig games;
  double train_fraction = 0.8;
  std::vector<std::size_t> k_list{2, 3, 5};
  std::vector<double> reduction_goals{0.80, 0.95};
  std::uint64_t seed = 0;
  SolverOptions solver;
  int threads = 1;
  std::filesystem::path output_dir = "games_out";

  /// Throws InputError on missing files, empty or zero K values, goals
  /// outside [0,1] or bad fractions.
  void validate() const;
};

/// Relative paths inside the config file resolve against its directory.
/// An optional "stages" object maps a command name to a partial config
/// merged over the top level (JSON merge patch) when that command runs.
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& stage = {});
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {},
                              const std::string& stage = {});
/// Canonical JSON; equal configs give equal text.
std::string config_to_json(const ExperimentConfig& config);
/// FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Per-stage seeds derived from the master seed.
struct StageSeeds {
  std::uint64_t synth = 0;
  std::uint64_t split = 0;
  std::uint64_t init = 0;
  std::uint64_t cluster = 0;
  std::uint64_t solver = 0;
};
StageSeeds derive_seeds(std::uint64_t master);

/// Stage names in execution order.
inline constexpr const char* kStages[] = {"ingest", "normalize", "train", "embed", "cluster", "compare", "report"};
bool is_stage(const std::string& name);

/// Prefixes the message of any exception escaping `stage` with the stage
/// name and rethrows it with the same type.
template <typename F>
auto run_stage(const char* stage, F&& body) -> decltype(body());

struct IngestedData {
  MultiResolutionDataset raw;
  GtepInstance instance;
};

IngestedData ingest(const ExperimentConfig& config);

struct PipelineResult {
  std::filesystem::path comparison_csv;
  std::vector<std::filesystem::path> files;  ///< every file written, sorted
  std::string last_stage;
  std::optional<ComparisonReport> report;
};

/// Runs ingest -> normalize -> train -> embed -> cluster -> compare ->
/// report, stopping after `stop_after` when given. Writes into the
/// config's output directory (created if needed) and validates every file
/// before returning.
PipelineResult run_pipeline(const ExperimentConfig& config, const std::string& stop_after = "report");

/// Stand-alone steps behind the `plan` and `evaluate` commands. Planning
/// reads every day set under <out>/daysets and writes one planning report
/// per reduction goal (goal 0 means no cap) under <out>/plans; evaluation
/// turns each of those into a full-horizon report under <out>/solutions.
std::vector<std::filesystem::path> plan_day_sets(const ExperimentConfig& config);
std::vector<std::filesystem::path> evaluate_plans(const ExperimentConfig& config);

/// Reads a comparison CSV and writes one series file per Table-3 quantity
/// (x = K, one column per source and goal) plus the percentage-change
/// summary. Returns the written paths.
std::vector<std::filesystem::path> report_plots(const std::filesystem::path& comparison_csv,
                                                const std::filesystem::path& out_dir);

void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet load_embeddings(const std::filesystem::path& path);

/// Investment and eta of a solution written by write_solution_json.
GtepSolution load_planning(const std::filesystem::path& path);

/// Throws InputError when a written file does not parse against its
/// expected layout (JSON, or CSV with a consistent column count).
void validate_output_file(const std::filesystem::path& path);

std::string version_string();

// -- implementation ----------------------------------------------------------

template <typename F>
auto run_stage(const char* stage, F&& body) -> decltype(body()) {
  const std::string tag = std::string("stage '") + stage + "': ";
  try {
    return body();
  } catch (const InputError& e) {
    throw InputError(tag + e.what());
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(tag + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(tag + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(tag + e.what());
  }
}

}  // namespace games
