#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divopt/diversity.hpp"
#include "divopt/image.hpp"

namespace divopt {

enum class DomainKind { tsp, image };

struct ExperimentConfig {
  DomainKind domain = DomainKind::tsp;
  SelectionMode mode = SelectionMode::D;
  std::size_t mu = 20;
  std::size_t lambda = 1;
  std::size_t generations = 2000;
  std::vector<FeatureSpec> features;
  double alpha = 1.05;  // TSP: ratio >= alpha; image: mse < alpha
  bool one_sided = false;

  // tsp
  std::size_t cities = 15;
  double sigma = 0.025;
  std::optional<double> p_m;  // defaults to 3 / cities
  std::size_t init_budget = 20000;
  std::optional<std::filesystem::path> seed_dir;

  // image
  std::filesystem::path reference;
  WalkParams walk{};
  bool circular_hue = false;

  std::size_t repetitions = 1;
  std::uint64_t base_seed = 1;
  std::filesystem::path output_dir = "out";
};

// Parses and validates a JSON config. Relative paths resolve against base_dir.
// Throws config_error naming the offending key.
ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);
void validate_config(const ExperimentConfig& config);

// Normalised JSON dump with every default filled in.
std::string config_to_json(const ExperimentConfig& config);

EaSettings ea_settings(const ExperimentConfig& config);

struct Stats {
  double min;
  double mean;
  double std;  // population standard deviation
};

Stats summarize(std::span<const double> values);

struct MemberRecord {
  std::vector<double> raw_features;
  std::vector<double> scaled_features;
  double quality;
};

struct RepetitionResult {
  std::string run_id;
  std::uint64_t seed = 0;
  bool completed = false;
  std::string error;
  double initial_discrepancy = 0.0;
  double final_discrepancy = 0.0;
  std::vector<GenerationTrace> trace;
  std::vector<MemberRecord> population;
  // Members failing their gate after any selection step; TSP checks the cached
  // ratio, images recompute the MSE against the reference.
  std::size_t gate_violations = 0;
};

std::string run_id_for(std::size_t repetition);

// One seeded run (seed = base_seed + repetition). When write_outputs is set the
// run directory receives trace.csv, population.csv, features.csv and the
// genotype files.
RepetitionResult run_repetition(const ExperimentConfig& config, std::size_t repetition,
                                bool write_outputs = true);

struct ExperimentSummary {
  std::vector<RepetitionResult> runs;
  std::optional<Stats> final_discrepancy;  // over completed runs
  bool all_completed = false;
};

// Runs every repetition on up to jobs worker threads and writes summary.csv.
ExperimentSummary run_experiment(const ExperimentConfig& config, unsigned jobs = 1,
                                 bool write_outputs = true);

std::string format_real(double value);

void write_trace_csv(std::ostream& out, std::span<const FeatureSpec> features,
                     std::span<const GenerationTrace> trace);
void write_feature_csv(std::ostream& out, std::span<const FeatureSpec> features,
                       std::span<const MemberRecord> population);
void write_summary_csv(std::ostream& out, const ExperimentSummary& summary);

struct FeatureTable {
  std::vector<std::string> names;
  std::vector<MemberRecord> rows;
};

FeatureTable read_feature_csv(const std::filesystem::path& path);

}  // namespace divopt
