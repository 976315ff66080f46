#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "divopt/errors.hpp"
#include "divopt/harness.hpp"
#include "oracles.hpp"

using namespace divopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("divopt_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kTspConfig = R"({
  "domain": "tsp", "mode": "T", "mu": 6, "lambda": 1, "generations": 15,
  "alpha": 1.0,
  "features": ["angle_mean", {"name": "mst_dists_mean", "f_min": 0.1, "f_max": 0.4}],
  "tsp": {"cities": 8, "sigma": 0.05},
  "repetitions": 3, "base_seed": 40
})";

}  // namespace

TEST_CASE("parse_config validation") {
  SUBCASE("TSP features with default ranges") {
    const auto cfg = parse_config(R"({"domain": "tsp", "features":
        ["angle_mean", "centroid_mean_dist", "mst_dists_mean"], "alpha": 1.18})");
    REQUIRE(cfg.features.size() == 3);
    CHECK(cfg.features[0].f_min == 0.8);
    CHECK(cfg.features[0].f_max == 2.8);
    CHECK(cfg.features[1].f_min == 0.24);
    CHECK(cfg.features[1].f_max == 0.6);
    CHECK(cfg.features[2].f_min == 0.06);
    CHECK(cfg.features[2].f_max == 0.15);
    CHECK(cfg.alpha == 1.18);
    const auto nn = parse_config(R"({"domain": "tsp", "features": ["nnds_mean"]})");
    CHECK(nn.features[0].f_min == 0.1);
    CHECK(nn.features[0].f_max == 0.7);
    const std::string dump = config_to_json(cfg);
    CHECK(dump.find("\"p_m\"") != std::string::npos);
    CHECK(parse_config(dump).features[2].f_max == 0.15);
  }
  auto rejects = [](const std::string& text, const std::string& key) {
    try {
      parse_config(text);
      FAIL("accepted: " << text);
    } catch (const config_error& e) {
      CHECK_MESSAGE(std::string(e.what()).find(key) != std::string::npos, e.what());
    }
  };
  rejects(R"({"domain": "tsp", "mu": 1, "features": ["angle_mean"]})", "mu");
  rejects(R"({"domain": "tsp", "generations": 0, "features": ["angle_mean"]})", "generations");
  rejects(R"({"domain": "tsp", "features": ["angle_mean", "nnds_mean", "mst_dists_mean",
              "centroid_mean_dist"]})", "d <= 3");
  rejects(R"({"domain": "tsp", "features": ["angle_mean"], "colour": 1})", "colour");
  rejects(R"({"domain": "tsp", "features": ["angle_mean"], "tsp": {"n": 5}})", "tsp.n");
  rejects(R"({"domain": "tsp", "features": ["mst_depth_mean"]})", "features[0]");
  rejects(R"({"domain": "tsp", "features": [{"name": "angle_mean", "f_min": 3, "f_max": 1}]})",
          "f_min");
  rejects(R"({"domain": "tsp", "features": ["angle_mean"], "tsp": {"cities": 30}})", "tsp.cities");
  rejects(R"({"domain": "image", "features": ["sd_hue"], "image": {"reference": "/no/such.ppm"}})",
          "image.reference");
  rejects(R"({"domain": "image", "features": ["sd_hue"]})", "image.reference");
  rejects(R"({"domain": "tsp", "features": ["angle_mean"], "mode": "Q"})", "mode");
  rejects(R"({"domain": "tsp", )", "parse");
}

TEST_CASE("summarize") {
  const double one[] = {0.2};
  const Stats a = summarize(one);
  CHECK(a.min == 0.2);
  CHECK(a.mean == 0.2);
  CHECK(a.std == 0.0);
  const double two[] = {0.1, 0.3};
  const Stats b = summarize(two);
  CHECK(b.min == 0.1);
  CHECK(b.mean == doctest::Approx(0.2));
  CHECK(b.std == doctest::Approx(0.1));
  const double same[] = {0.37, 0.37, 0.37};
  const Stats c = summarize(same);
  CHECK(c.mean == doctest::Approx(0.37));
  CHECK(c.std == doctest::Approx(0.0));
  CHECK_THROWS_AS(summarize(std::span<const double>{}), contract_error);
}

TEST_CASE("TSP experiment outputs") {
  const fs::path dir = scratch("tsp");
  ExperimentConfig cfg = parse_config(kTspConfig);
  cfg.output_dir = dir / "first";
  const ExperimentSummary summary = run_experiment(cfg, 2);
  REQUIRE(summary.all_completed);
  REQUIRE(summary.final_discrepancy);

  std::vector<double> finals;
  for (const auto& run : summary.runs) {
    finals.push_back(run.final_discrepancy);
    CHECK(run.trace.size() == cfg.generations);
    CHECK(run.gate_violations == 0);
    const fs::path run_dir = cfg.output_dir / run.run_id;
    for (const char* f : {"trace.csv", "population.csv", "features.csv", "population_genotypes.txt"})
      CHECK(fs::exists(run_dir / f));

    // The exported feature table reproduces the final discrepancy.
    const FeatureTable table = read_feature_csv(run_dir / "features.csv");
    CHECK(table.rows.size() == cfg.mu);
    CHECK(table.names == std::vector<std::string>{"angle_mean", "mst_dists_mean"});
    PointSet scaled(2);
    for (const auto& row : table.rows) {
      for (double c : row.scaled_features) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
      }
      scaled.add(row.scaled_features);
    }
    CHECK(std::fabs(star_discrepancy(scaled) - run.final_discrepancy) <= 1e-12);
    CHECK(std::fabs(star_discrepancy(read_point_csv(run_dir / "population.csv")) -
                    run.final_discrepancy) <= 1e-12);

    // Genotype files reload to the recorded features.
    std::ifstream sidecar(run_dir / "population_genotypes.txt");
    std::string name;
    std::size_t member = 0;
    while (sidecar >> name) {
      const TspInstance inst = read_instance(run_dir / name);
      CHECK(tsp_feature("angle_mean", inst) == table.rows[member].raw_features[0]);
      ++member;
    }
    CHECK(member == cfg.mu);
  }
  const Stats expected = summarize(finals);
  CHECK(summary.final_discrepancy->mean == expected.mean);
  CHECK(fs::exists(cfg.output_dir / "summary.csv"));

  SUBCASE("rerun is byte-identical regardless of job count") {
    cfg.output_dir = dir / "second";
    run_experiment(cfg, 1);
    for (const char* f : {"run_000/trace.csv", "run_001/features.csv", "run_002/population.csv",
                          "run_001/member_03.tsp", "summary.csv"})
      CHECK(slurp(dir / "first" / f) == slurp(dir / "second" / f));
  }
  SUBCASE("changing the base seed shifts repetitions, not their content") {
    cfg.output_dir = dir / "shifted";
    cfg.base_seed = 41;
    cfg.repetitions = 2;
    run_experiment(cfg, 1);
    CHECK(slurp(dir / "first/run_001/trace.csv") == slurp(dir / "shifted/run_000/trace.csv"));
    CHECK(slurp(dir / "first/run_002/trace.csv") == slurp(dir / "shifted/run_001/trace.csv"));
  }
}

TEST_CASE("initialisation failure is recorded, not fatal") {
  ExperimentConfig cfg = parse_config(kTspConfig);
  cfg.alpha = 2.5;
  cfg.init_budget = 3;
  cfg.repetitions = 2;
  const ExperimentSummary summary = run_experiment(cfg, 1, false);
  CHECK_FALSE(summary.all_completed);
  CHECK_FALSE(summary.final_discrepancy);
  CHECK(summary.runs[0].error.find("tsp") != std::string::npos);
  std::stringstream csv;
  write_summary_csv(csv, summary);
  CHECK(csv.str().find("failed") != std::string::npos);
  CHECK(csv.str().find("incomplete") != std::string::npos);
}

TEST_CASE("image experiment") {
  const fs::path dir = scratch("image");
  write_ppm(dir / "ref.ppm", make_gradient_reference(24, 24));
  std::ofstream(dir / "cfg.json") << R"({
    "domain": "image", "mode": "D", "mu": 5, "generations": 12,
    "features": [{"name": "sd_hue", "f_min": 0.0, "f_max": 0.3},
                 {"name": "mean_saturation", "f_min": 0.3, "f_max": 0.9}],
    "image": {"reference": "ref.ppm", "t_max": 100, "t_lb": 50, "t_ub": 800},
    "output_dir": "out"
  })";
  const ExperimentConfig cfg = load_config(dir / "cfg.json");
  CHECK(cfg.reference == dir / "ref.ppm");
  CHECK(cfg.alpha == 500.0);
  const ExperimentSummary summary = run_experiment(cfg, 1);
  REQUIRE(summary.all_completed);
  const auto& run = summary.runs[0];
  CHECK(run.gate_violations == 0);
  for (const auto& t : run.trace) {
    REQUIRE(t.mutation_parameter);
    CHECK(*t.mutation_parameter >= 50.0);
    CHECK(*t.mutation_parameter <= 800.0);
  }
  const std::string trace = slurp(dir / "out/run_000/trace.csv");
  CHECK(trace.rfind("generation,discrepancy,accepted,sd_hue_min,sd_hue_max,"
                    "mean_saturation_min,mean_saturation_max,t_max\n", 0) == 0);
  const RasterImage ref = read_ppm(dir / "ref.ppm");
  const RasterImage member = read_ppm(dir / "out/run_000/member_00.ppm");
  CHECK(mse(member, ref) < 500.0);
}

TEST_CASE("trace CSV layout") {
  const std::vector<FeatureSpec> specs{{"a", 0, 1, 1}, {"b", 0, 1, 1}};
  GenerationTrace t;
  t.generation = 1;
  t.discrepancy = 0.5;
  t.accepted = true;
  t.feature_min = {0.1, 0.2};
  t.feature_max = {0.3, 0.4};
  std::stringstream out;
  write_trace_csv(out, specs, std::span<const GenerationTrace>(&t, 1));
  CHECK(out.str() == "generation,discrepancy,accepted,a_min,a_max,b_min,b_max\n"
                     "1,0.5,1,0.10000000000000001,0.29999999999999999,0.20000000000000001,"
                     "0.40000000000000002\n");
}
