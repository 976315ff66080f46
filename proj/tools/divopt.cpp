// divopt: evolve quality-gated populations with low feature-space discrepancy.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "divopt/discrepancy.hpp"
#include "divopt/errors.hpp"
#include "divopt/harness.hpp"
#include "divopt/image.hpp"
#include "divopt/tsp.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary diversity optimisation by star discrepancy"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  auto* seed_opt = run->add_option("--seed", seed, "Base seed (overrides base_seed)");
  run->add_option("--jobs", jobs, "Parallel repetitions")->envname("DIVOPT_JOBS");

  std::string points_path;
  bool one_sided = false;
  auto* disc = app.add_subcommand("discrepancy", "Print the star discrepancy of a point CSV");
  disc->add_option("--points", points_path, "Point-set CSV")->required();
  disc->add_flag("--one-sided", one_sided, "Use the one-sided measure");

  std::string domain = "tsp";
  std::string instance_path;
  std::string image_path;
  auto* feat = app.add_subcommand("features", "Print every feature of one individual");
  feat->add_option("--domain", domain, "tsp or image")->check(CLI::IsMember({"tsp", "image"}));
  feat->add_option("--instance", instance_path, "TSP instance file");
  feat->add_option("--image", image_path, "PPM image");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      divopt::ExperimentConfig cfg = divopt::load_config(config_path);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (*seed_opt) cfg.base_seed = seed;
      std::filesystem::create_directories(cfg.output_dir);
      {
        std::ofstream echo(cfg.output_dir / "config.json", std::ios::binary);
        echo << divopt::config_to_json(cfg) << '\n';
      }
      const auto summary = divopt::run_experiment(cfg, jobs == 0 ? 1 : jobs);
      for (const auto& r : summary.runs) {
        if (r.completed)
          std::cout << r.run_id << " seed=" << r.seed << " initial=" << r.initial_discrepancy
                    << " final=" << r.final_discrepancy << '\n';
        else
          std::cout << r.run_id << " seed=" << r.seed << " FAILED: " << r.error << '\n';
      }
      if (summary.final_discrepancy) {
        std::cout << "final discrepancy: min=" << summary.final_discrepancy->min
                  << " mean=" << summary.final_discrepancy->mean
                  << " std=" << summary.final_discrepancy->std << '\n';
      }
      return summary.all_completed ? EXIT_SUCCESS : EXIT_FAILURE;
    }
    if (*disc) {
      const auto points = divopt::read_point_csv(points_path);
      std::cout << divopt::format_real(divopt::star_discrepancy(
                       points, one_sided ? divopt::DiscrepancyMeasure::one_sided
                                         : divopt::DiscrepancyMeasure::two_sided))
                << '\n';
      return EXIT_SUCCESS;
    }
    if (*feat) {
      if (domain == "tsp") {
        if (instance_path.empty()) throw divopt::config_error("--instance is required for tsp");
        const auto inst = divopt::read_instance(instance_path);
        for (const auto& name : divopt::tsp_feature_names())
          std::cout << name << ' ' << divopt::format_real(divopt::tsp_feature(name, inst)) << '\n';
      } else {
        if (image_path.empty()) throw divopt::config_error("--image is required for image");
        const auto img = divopt::read_ppm(image_path);
        for (const auto& name : divopt::image_feature_names())
          std::cout << name << ' ' << divopt::format_real(divopt::image_feature(name, img)) << '\n';
      }
      return EXIT_SUCCESS;
    }
  } catch (const std::exception& e) {
    std::cerr << "divopt: " << e.what() << '\n';
    return 2;
  }
  return EXIT_SUCCESS;
}
