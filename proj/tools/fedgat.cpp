// Command-line front end: gen / train / sweep / report over one JSON config.
// Exit codes: 0 success, 1 bad arguments or config, 2 runtime failure.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "fedgat/recipes.hpp"

namespace {

void print_outcome(const fedgat::RecipeOutcome& outcome, const std::string& out_dir) {
  for (const auto& line : outcome.summary) std::printf("%s\n", line.c_str());
  for (const auto& file : outcome.files)
    std::printf("wrote %s/%s\n", out_dir.c_str(), file.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated graph-attention laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, backend, robust, recipe, sweep_kind, report_dir;
  std::uint64_t seed = 0;
  std::size_t rounds = 0;
  bool paper_scale = false;

  app.add_option("--config", config_path, "experiment config JSON file");
  app.add_option("--seed", seed, "override the master seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--backend", backend, "plain | masked | paillier");
  app.add_option("--robust", robust, "off | trimmed_mean | norm_filter");
  app.add_flag("--paper-scale", paper_scale, "full-scale settings (node range, horizon, noise)");

  CLI::App* gen = app.add_subcommand("gen", "write per-client graph files and a manifest");
  CLI::App* train = app.add_subcommand("train", "run federated training");
  train->add_option("--recipe", recipe, "fig1 | fig2 | fig6");
  train->add_option("--rounds", rounds, "override the round count");
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("kind", sweep_kind, "noise | attack | overhead | scale (or fig3/fig4/fig5/fig7)")
      ->required();
  CLI::App* report = app.add_subcommand("report", "render run-directory CSVs to SVG and a summary");
  report->add_option("dir", report_dir, "run directory (defaults to --out)");
  for (CLI::App* sub : {gen, train, sweep, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  // Configuration phase: any failure here is a usage error.
  fedgat::ExperimentConfig cfg;
  std::string recipe_name;  // resolved fig name, empty for plain runs
  try {
    if (!config_path.empty()) cfg = fedgat::load_config(config_path);

    if (sweep->parsed()) {
      if (sweep_kind == "noise" || sweep_kind == "fig3") recipe_name = "fig3";
      else if (sweep_kind == "attack" || sweep_kind == "fig4") recipe_name = "fig4";
      else if (sweep_kind == "overhead" || sweep_kind == "fig5") recipe_name = "fig5";
      else if (sweep_kind == "scale" || sweep_kind == "fig7") recipe_name = "fig7";
      else throw std::invalid_argument("unknown sweep kind: " + sweep_kind);
    } else if (train->parsed() && !recipe.empty()) {
      if (recipe == "fig3" || recipe == "fig4" || recipe == "fig5" || recipe == "fig7")
        throw std::invalid_argument("recipe " + recipe + " is a sweep; use: fedgat sweep " + recipe);
      if (recipe != "fig1" && recipe != "fig2" && recipe != "fig6")
        throw std::invalid_argument("unknown recipe: " + recipe);
      recipe_name = recipe;
    }

    if (!recipe_name.empty()) fedgat::apply_recipe_preset(recipe_name, cfg, paper_scale);
    else if (paper_scale) fedgat::apply_paper_scale(cfg);

    if (app.count("--seed")) cfg.master_seed = seed;
    if (app.count("--backend")) cfg.fed.backend = fedgat::backend_from_string(backend);
    if (app.count("--robust")) cfg.fed.robust_mode = fedgat::robust_mode_from_string(robust);
    if (train->count("--rounds")) cfg.fed.rounds = rounds;
    if (app.count("--out")) cfg.out_dir = out_dir;
    if (cfg.out_dir.empty()) {
      if (gen->parsed()) cfg.out_dir = "runs/gen";
      else if (!recipe_name.empty()) cfg.out_dir = "runs/" + recipe_name;
      else cfg.out_dir = "runs/train";
    }
    if (report->parsed() && report_dir.empty()) {
      if (cfg.out_dir.empty()) throw std::invalid_argument("report: give a directory or --out");
      report_dir = cfg.out_dir;
    }
    fedgat::resolve_config(cfg);
    fedgat::validate_config(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  }

  // Execution phase.
  try {
    if (gen->parsed()) {
      print_outcome(fedgat::emit_federation(cfg), cfg.out_dir);
    } else if (train->parsed()) {
      const auto outcome = recipe_name.empty() ? fedgat::run_training(cfg)
                                               : fedgat::run_recipe(recipe_name, cfg, paper_scale);
      print_outcome(outcome, cfg.out_dir);
    } else if (sweep->parsed()) {
      print_outcome(fedgat::run_recipe(recipe_name, cfg, paper_scale), cfg.out_dir);
    } else {
      print_outcome(fedgat::run_report(report_dir), report_dir);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
