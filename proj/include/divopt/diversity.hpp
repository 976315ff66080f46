#pragma once

// (mu + lambda) evolutionary diversity optimisation over a pluggable domain.
// Members must pass the domain's quality gate; survivor selection removes one
// member at a time until mu remain, chosen by one of three rules:
//   D  removal giving the lowest star discrepancy of the remaining set
//   C  member with the lowest weighted feature contribution
//   T  as D, ties broken by lowest weighted contribution

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divopt/discrepancy.hpp"
#include "divopt/errors.hpp"
#include "divopt/rng.hpp"

namespace divopt {

struct FeatureSpec {
  std::string name;
  double f_min = 0.0;
  double f_max = 1.0;
  double weight = 1.0;
};

// Throws config_error naming the feature if f_min >= f_max or weight < 0.
void validate_feature_specs(std::span<const FeatureSpec> specs);

// (raw - f_min) / (f_max - f_min), clamped to [0,1].
std::vector<double> scale_features(std::span<const double> raw, std::span<const FeatureSpec> specs);

enum class SelectionMode { D, C, T };

SelectionMode parse_selection_mode(std::string_view text);
std::string_view to_string(SelectionMode mode);

inline constexpr double kUnboundedContribution = std::numeric_limits<double>::infinity();

// c(I,P) for every member. Per feature, values are sorted; an interior member
// scores (v - prev) * (next - v), the first holder of the minimum and of the
// maximum scores +inf, further copies of an extreme score 0. Features with
// weight 0 are ignored.
std::vector<double> weighted_contributions(const PointSet& points, std::span<const double> weights);

double weighted_contribution(std::size_t member, const PointSet& points,
                             std::span<const double> weights);

// Sum of the finite contributions; the quantity EA_C tries to increase.
double contribution_diversity(const PointSet& points, std::span<const double> weights);

// Index removed by one survivor-selection step on the given scaled points.
std::size_t choose_removal(const PointSet& points, std::span<const double> weights,
                           SelectionMode mode,
                           DiscrepancyMeasure measure = DiscrepancyMeasure::two_sided);

template <class G>
struct Individual {
  G genotype;
  std::vector<double> raw_features;
  std::vector<double> scaled_features;
  double quality = 0.0;
};

template <class G>
struct Scored {
  G genotype;
  double quality;
};

// What the optimiser needs from a problem domain.
template <class D>
concept DiversityDomain = requires(D& domain, const D& cdomain,
                                   const typename D::Genotype& genotype, Rng& rng,
                                   std::size_t count, double quality, bool success) {
  { domain.initialize(count, rng) } -> std::same_as<std::vector<Scored<typename D::Genotype>>>;
  { domain.mutate(genotype, rng) } -> std::same_as<typename D::Genotype>;
  { domain.quality(genotype, rng) } -> std::convertible_to<double>;
  { cdomain.accepts(quality) } -> std::same_as<bool>;
  { cdomain.features(genotype) } -> std::same_as<std::vector<double>>;
  { domain.adapt(success) };
  { cdomain.mutation_parameter() } -> std::same_as<std::optional<double>>;
  { cdomain.name() } -> std::convertible_to<std::string_view>;
};

struct EaSettings {
  std::size_t mu = 20;
  std::size_t lambda = 1;
  std::size_t generations = 2000;
  SelectionMode mode = SelectionMode::D;
  std::vector<FeatureSpec> features;
  DiscrepancyMeasure measure = DiscrepancyMeasure::two_sided;
};

void validate_settings(const EaSettings& settings);

struct GenerationTrace {
  std::size_t generation = 0;  // 1-based
  double discrepancy = 0.0;    // after survivor selection
  bool accepted = false;       // at least one offspring passed the gate
  bool success = false;        // signal handed to the domain's adaptation
  std::vector<double> feature_min;  // raw feature range over the population
  std::vector<double> feature_max;
  std::optional<double> mutation_parameter;  // value used for this generation's mutations
};

template <class G>
struct RunResult {
  std::vector<Individual<G>> population;
  std::vector<GenerationTrace> trace;
  double initial_discrepancy = 0.0;
};

template <class G>
PointSet scaled_point_set(const std::vector<Individual<G>>& population, std::size_t dimension) {
  PointSet points(dimension);
  for (const auto& member : population) points.add(member.scaled_features);
  return points;
}

inline std::vector<double> feature_weights(std::span<const FeatureSpec> specs) {
  std::vector<double> weights;
  weights.reserve(specs.size());
  for (const auto& spec : specs) weights.push_back(spec.weight);
  return weights;
}

// Removes members one at a time until mu remain.
template <class G>
void survivor_selection(std::vector<Individual<G>>& population, std::size_t mu,
                        std::span<const FeatureSpec> specs, SelectionMode mode,
                        DiscrepancyMeasure measure = DiscrepancyMeasure::two_sided) {
  const std::vector<double> weights = feature_weights(specs);
  while (population.size() > mu) {
    const std::size_t victim =
        choose_removal(scaled_point_set(population, specs.size()), weights, mode, measure);
    population.erase(population.begin() + static_cast<std::ptrdiff_t>(victim));
  }
}

template <DiversityDomain D>
Individual<typename D::Genotype> make_individual(const D& domain, typename D::Genotype genotype,
                                                 double quality,
                                                 std::span<const FeatureSpec> specs) {
  Individual<typename D::Genotype> ind{std::move(genotype), {}, {}, quality};
  ind.raw_features = domain.features(ind.genotype);
  if (ind.raw_features.size() != specs.size())
    throw contract_error(std::string(domain.name()) + ": domain returned " +
                         std::to_string(ind.raw_features.size()) + " features, expected " +
                         std::to_string(specs.size()));
  ind.scaled_features = scale_features(ind.raw_features, specs);
  return ind;
}

template <class G>
GenerationTrace describe_generation(const std::vector<Individual<G>>& population,
                                    const EaSettings& settings) {
  GenerationTrace trace;
  const std::size_t d = settings.features.size();
  trace.discrepancy = star_discrepancy(scaled_point_set(population, d), settings.measure);
  trace.feature_min.assign(d, std::numeric_limits<double>::infinity());
  trace.feature_max.assign(d, -std::numeric_limits<double>::infinity());
  for (const auto& member : population) {
    for (std::size_t i = 0; i < d; ++i) {
      trace.feature_min[i] = std::min(trace.feature_min[i], member.raw_features[i]);
      trace.feature_max[i] = std::max(trace.feature_max[i], member.raw_features[i]);
    }
  }
  return trace;
}

// One iteration: lambda uniformly chosen parents each produce an offspring,
// gate-passing offspring join, survivor selection restores mu, and the domain
// is told whether the selection objective improved.
template <DiversityDomain D>
GenerationTrace ea_generation(std::vector<Individual<typename D::Genotype>>& population,
                              D& domain, const EaSettings& settings, Rng& rng) {
  if (population.size() != settings.mu)
    throw contract_error("ea_generation: population size differs from mu");
  const std::size_t d = settings.features.size();
  const std::vector<double> weights = feature_weights(settings.features);

  const double discrepancy_before =
      star_discrepancy(scaled_point_set(population, d), settings.measure);
  const double diversity_before =
      settings.mode == SelectionMode::C
          ? contribution_diversity(scaled_point_set(population, d), weights)
          : 0.0;
  const std::optional<double> parameter = domain.mutation_parameter();

  std::uniform_int_distribution<std::size_t> pick(0, settings.mu - 1);
  bool accepted = false;
  for (std::size_t i = 0; i < settings.lambda; ++i) {
    const auto& parent = population[pick(rng)];
    auto child = domain.mutate(parent.genotype, rng);
    const double quality = domain.quality(child, rng);
    if (!domain.accepts(quality)) continue;
    population.push_back(make_individual(domain, std::move(child), quality, settings.features));
    accepted = true;
  }

  survivor_selection(population, settings.mu, settings.features, settings.mode, settings.measure);

  GenerationTrace trace = describe_generation(population, settings);
  trace.accepted = accepted;
  trace.mutation_parameter = parameter;
  if (settings.mode == SelectionMode::C) {
    trace.success = contribution_diversity(scaled_point_set(population, d), weights) >
                    diversity_before + kTieTolerance;
  } else {
    trace.success = trace.discrepancy < discrepancy_before - kTieTolerance;
  }
  domain.adapt(trace.success);
  return trace;
}

template <class G>
using GenerationObserver =
    std::function<void(const GenerationTrace&, const std::vector<Individual<G>>&)>;

template <DiversityDomain D>
RunResult<typename D::Genotype> run_ea(const EaSettings& settings, D& domain, Rng& rng,
                                       const GenerationObserver<typename D::Genotype>& observer = {}) {
  validate_settings(settings);
  using G = typename D::Genotype;
  RunResult<G> result;
  std::vector<Scored<G>> seeds = domain.initialize(settings.mu, rng);
  if (seeds.size() != settings.mu)
    throw initialization_error(std::string(domain.name()) + ": initialization produced " +
                               std::to_string(seeds.size()) + " of " +
                               std::to_string(settings.mu) + " individuals");
  result.population.reserve(settings.mu + settings.lambda);
  for (auto& seed : seeds) {
    if (!domain.accepts(seed.quality))
      throw initialization_error(std::string(domain.name()) +
                                 ": initialization produced an individual failing the quality gate");
    result.population.push_back(
        make_individual(domain, std::move(seed.genotype), seed.quality, settings.features));
  }
  result.initial_discrepancy = star_discrepancy(
      scaled_point_set(result.population, settings.features.size()), settings.measure);

  result.trace.reserve(settings.generations);
  for (std::size_t g = 1; g <= settings.generations; ++g) {
    GenerationTrace trace = ea_generation(result.population, domain, settings, rng);
    trace.generation = g;
    if (observer) observer(trace, result.population);
    result.trace.push_back(std::move(trace));
  }
  return result;
}

}  // namespace divopt
