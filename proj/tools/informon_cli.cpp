#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "informon/errors.hpp"
#include "informon/scenario.hpp"

using namespace informon;

int main(int argc, char** argv) {
  CLI::App app{"informon: process-algebra lattice simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int refine = 0;
  std::string expr_text;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "JSON configuration file");
    if (needs_config) opt->required();
    sub->add_option("--seed", seed, "override rng_seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--refine", refine, "number of refinement levels, halving from the first");
  };

  auto* evolve = app.add_subcommand("evolve", "evolve the configured packets and compare with the exact solution");
  auto* reconstruct = app.add_subcommand("reconstruct", "cardinal-series reconstruction of the initial packets");
  auto* pcm = app.add_subcommand("pcm", "enumerate the process covering map of process.expr");
  auto* scenario = app.add_subcommand("scenario", "run the configured scenario");
  auto* bounds = app.add_subcommand("bounds", "evaluate the interpolation error bounds");
  auto* parse = app.add_subcommand("parse", "parse and print a process expression");
  for (auto* sub : {evolve, reconstruct, pcm, scenario}) add_common(sub, true);
  add_common(bounds, false);
  parse->add_option("expr", expr_text, "process expression")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) {
      const auto r = cli::run_parse(expr_text);
      std::cout << r.report.dump(2) << '\n';
      return r.exit_code;
    }

    cli::ScenarioConfig cfg = config_path.empty() ? cli::config_from_json(nlohmann::json::object())
                                                   : cli::load_config(config_path);
    for (auto* sub : {evolve, reconstruct, pcm, scenario, bounds}) {
      if (!sub->parsed()) continue;
      if (sub->count("--seed")) cfg.rng_seed = seed;
      if (sub->count("--out")) cfg.output_dir = out_dir;
      if (sub->count("--refine")) {
        if (refine < 1) throw ConfigError("--refine must be >= 1");
        const double first = cfg.refine.levels.front();
        cfg.refine.levels.clear();
        for (int k = 0; k < refine; ++k) cfg.refine.levels.push_back(first / std::pow(2.0, k));
      }
    }

    cli::RunReport r;
    if (evolve->parsed()) r = cli::run_evolve(cfg);
    else if (reconstruct->parsed()) r = cli::run_reconstruct(cfg);
    else if (pcm->parsed()) r = cli::run_pcm(cfg);
    else if (bounds->parsed()) r = cli::run_bounds(cfg);
    else r = cli::run_scenario(cfg);

    std::cout << (r.exit_code == cli::kPass ? "pass" : "FAIL") << ": " << r.files.size() << " files in "
              << cfg.output_dir << '\n';
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
}
