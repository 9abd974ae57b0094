// games: command-line driver for the representative-day pipeline.
//
//   games <command> --config cfg.json [--out dir] [--seed n] [--stage s] [--gap g]
//
// Exit codes: 0 success, 2 bad input or config, 3 infeasible model,
// 4 numerical failure, 1 anything else.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "games/errors.hpp"
#include "games/pipeline.hpp"
#include "games/repdays.hpp"

namespace fs = std::filesystem;
using namespace games;

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> stage;
  std::optional<double> gap;
};

ExperimentConfig resolve(const Flags& f, const std::string& command) {
  ExperimentConfig c = load_config(f.config, command);
  if (f.out) c.output_dir = *f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.gap) c.solver.gap = *f.gap;
  c.validate();
  fs::create_directories(c.output_dir);
  return c;
}

GamesModel require_model(const ExperimentConfig& c) {
  const fs::path p = c.output_dir / "model.json";
  if (!fs::exists(p)) throw InputError("no trained model at " + p.string() + "; run train first");
  return load_model(p);
}

EmbeddingSet require_embeddings(const ExperimentConfig& c) {
  const fs::path p = c.output_dir / "embeddings.json";
  if (!fs::exists(p)) throw InputError("no embeddings at " + p.string() + "; run embed first");
  return load_embeddings(p);
}

void run(const std::string& command, const Flags& flags) {
  const ExperimentConfig c = resolve(flags, command);
  const fs::path out = c.output_dir;
  const StageSeeds seeds = derive_seeds(c.seed);

  if (command == "pipeline") {
    const auto r = run_pipeline(c, flags.stage.value_or("report"));
    std::cout << "completed through stage " << r.last_stage << ", " << r.files.size() << " files in "
              << out.string() << '\n';
    return;
  }
  if (command == "synth") {
    const auto d = run_stage("ingest", [&] { return ingest(c); });
    save_dataset(d.raw, out / "data");
    save_instance(d.instance, out / "data" / "instance.json");
    std::cout << d.raw.day_count() << " days written to " << (out / "data").string() << '\n';
    return;
  }
  if (command == "train") {
    const auto d = run_stage("ingest", [&] { return ingest(c); });
    run_stage("train", [&] {
      GamesConfig gc = c.games;
      gc.rng_seed = seeds.init;
      const auto normalized = normalize(d.raw);
      const auto tr = train(normalized, gc, split_days(normalized.day_count(), c.train_fraction, seeds.split));
      save_model(tr.model, out / "model.json");
      write_training_log(tr.log, out / "training_log.csv");
      std::cout << "best validation loss " << tr.best_val_loss << " at epoch " << tr.best_epoch
                << (tr.stopped_early ? " (early stop)" : "") << '\n';
    });
    return;
  }
  if (command == "embed") {
    const auto d = run_stage("ingest", [&] { return ingest(c); });
    run_stage("embed", [&] {
      const GamesModel model = require_model(c);
      const EmbeddingSet e = embed_all(model, prepare_for_model(model, d.raw));
      save_embeddings(e, out / "embeddings.json");
      std::cout << e.embeddings.size() << " day embeddings written\n";
    });
    return;
  }
  if (command == "cluster") {
    const auto d = run_stage("ingest", [&] { return ingest(c); });
    run_stage("cluster", [&] {
      const EmbeddingSet e = require_embeddings(c);
      fs::create_directories(out / "daysets");
      for (std::size_t k : c.k_list) {
        save_day_set(kmedoids(e, k, seeds.cluster), out / "daysets" / ("embeddings_k" + std::to_string(k) + ".json"));
        save_day_set(kmedoids_raw(d.raw, k, seeds.cluster), out / "daysets" / ("raw_k" + std::to_string(k) + ".json"));
      }
      std::cout << 2 * c.k_list.size() << " day sets written\n";
    });
    return;
  }
  if (command == "plan") {
    const auto files = run_stage("plan", [&] { return plan_day_sets(c); });
    std::cout << files.size() << " planning reports written\n";
    return;
  }
  if (command == "evaluate") {
    const auto files = run_stage("evaluate", [&] { return evaluate_plans(c); });
    std::cout << files.size() << " full-horizon reports written\n";
    return;
  }
  if (command == "compare") {
    const auto d = run_stage("ingest", [&] { return ingest(c); });
    run_stage("compare", [&] {
      CompareOptions opts;
      opts.k_list = c.k_list;
      opts.goals = c.reduction_goals;
      opts.seed = seeds.cluster;
      opts.solver = c.solver;
      opts.solver.seed = seeds.solver;
      opts.threads = c.threads;
      const auto report = compare_methods(d.instance, d.raw, require_embeddings(c), opts);
      write_comparison_csv(report, out / "comparison.csv");
      write_change_summary_csv(report, out / "change_summary.csv");
    });
    run_stage("report", [&] { report_plots(out / "comparison.csv", out / "plots"); });
    std::cout << "comparison written to " << (out / "comparison.csv").string() << '\n';
    return;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GAMES representative-day selection and capacity expansion"};
  app.require_subcommand(1);
  Flags flags;
  const char* commands[][2] = {
      {"synth", "generate a synthetic dataset and instance"},
      {"train", "train the graph autoencoder"},
      {"embed", "embed every day with the trained model"},
      {"cluster", "select representative days from embeddings and raw data"},
      {"plan", "solve the planning model for every day set and goal"},
      {"evaluate", "fix planning investments and solve every day"},
      {"compare", "run the full comparison between embedding and raw day sets"},
      {"pipeline", "run every stage in order"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "master seed");
    sub->add_option("--stage", flags.stage, "pipeline: stop after this stage");
    sub->add_option("--gap", flags.gap, "relative MILP gap");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (flags.stage && !is_stage(*flags.stage)) {
    std::cerr << "error: unknown stage '" << *flags.stage << "'\n";
    return 2;
  }
  try {
    run(command, flags);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
