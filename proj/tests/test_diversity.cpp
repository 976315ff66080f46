#include <doctest.h>

#include <cmath>
#include <limits>

#include "divopt/diversity.hpp"
#include "oracles.hpp"
#include "toy_domain.hpp"

using namespace divopt;
using divopt::testing::ToyDomain;

namespace {

std::vector<FeatureSpec> unit_specs(std::size_t d) {
  std::vector<FeatureSpec> specs;
  for (std::size_t i = 0; i < d; ++i) specs.push_back({"f" + std::to_string(i), 0.0, 1.0, 1.0});
  return specs;
}

std::vector<Individual<int>> population_of(const std::vector<std::vector<double>>& points) {
  std::vector<Individual<int>> pop;
  int id = 0;
  for (const auto& p : points) pop.push_back({id++, p, p, 1.0});
  return pop;
}

}  // namespace

TEST_CASE("scale_features clamps to the unit interval") {
  const std::vector<FeatureSpec> spec{{"f", 0.0, 2.0, 1.0}};
  const double mid[] = {1.0}, above[] = {3.0}, below[] = {-1.0};
  CHECK(scale_features(mid, spec)[0] == 0.5);
  CHECK(scale_features(above, spec)[0] == 1.0);
  CHECK(scale_features(below, spec)[0] == 0.0);

  const std::vector<FeatureSpec> inverted{{"bad", 2.0, 2.0, 1.0}};
  CHECK_THROWS_AS(validate_feature_specs(inverted), config_error);
  CHECK_THROWS_AS(scale_features(mid, inverted), config_error);
  const double two[] = {1.0, 1.0};
  CHECK_THROWS_AS(scale_features(two, spec), contract_error);
}

TEST_CASE("weighted_contribution gap products") {
  const double w[] = {1.0};
  const PointSet spread(1, {0.1, 0.4, 0.9});
  CHECK(weighted_contribution(1, spread, w) == doctest::Approx(0.15));
  CHECK(std::isinf(weighted_contribution(0, spread, w)));
  CHECK(std::isinf(weighted_contribution(2, spread, w)));

  const PointSet dup(1, {0.2, 0.2, 0.8});
  CHECK(std::isinf(weighted_contribution(0, dup, w)));
  CHECK(weighted_contribution(1, dup, w) == 0.0);
  CHECK(std::isinf(weighted_contribution(2, dup, w)));

  const PointSet lonely(1, {0.5});
  CHECK_THROWS_AS(weighted_contribution(0, lonely, w), contract_error);

  // Zero-weight features never contribute, including their extremes.
  const double w2[] = {1.0, 0.0};
  const PointSet two_d(2, {0.1, 0.9, 0.4, 0.1, 0.9, 0.5});
  CHECK(weighted_contribution(1, two_d, w2) == doctest::Approx(0.15));
}

TEST_CASE("property: contribution argmin is invariant under weight scaling") {
  Rng rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng() % 3;
    const std::size_t k = 3 + rng() % 15;
    std::vector<double> coords(d * k);
    for (double& c : coords) c = unit(rng);
    const PointSet points(d, coords);
    std::vector<double> w(d), scaled(d);
    for (std::size_t i = 0; i < d; ++i) {
      w[i] = unit(rng) + 0.05;
      scaled[i] = w[i] * 7.5;
    }
    CHECK(choose_removal(points, w, SelectionMode::C) == choose_removal(points, scaled, SelectionMode::C));
  }
}

TEST_CASE("survivor_selection") {
  const auto specs = unit_specs(2);
  SUBCASE("nothing to remove") {
    auto pop = population_of({{0.1, 0.2}, {0.7, 0.3}});
    survivor_selection(pop, 2, specs, SelectionMode::D);
    CHECK(pop.size() == 2);
  }
  SUBCASE("mode D keeps the lower-discrepancy remainder") {
    auto pop = population_of({{1.0, 1.0}, {0.5, 0.5}});
    survivor_selection(pop, 1, specs, SelectionMode::D);
    REQUIRE(pop.size() == 1);
    CHECK(pop[0].scaled_features == std::vector<double>{0.5, 0.5});
  }
  SUBCASE("mode T removes the surplus copy of a duplicate") {
    // Both copies tie on discrepancy; the first copy holds the extreme
    // (+inf contribution) and the second scores 0, so the second goes.
    auto pop = population_of({{0.1, 0.1}, {0.1, 0.1}, {0.9, 0.9}});
    const auto scan = min_removal_scan(scaled_point_set(pop, 2));
    CHECK(scan.tied_indices == std::vector<std::size_t>{0, 1});
    survivor_selection(pop, 2, specs, SelectionMode::T);
    REQUIRE(pop.size() == 2);
    CHECK(pop[0].genotype == 0);
    CHECK(pop[1].genotype == 2);
  }
  SUBCASE("contribution ties go to the lowest index") {
    // Four identical points: every removal ties on discrepancy and all
    // copies beyond the first score 0.
    auto pop = population_of({{0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}});
    survivor_selection(pop, 3, specs, SelectionMode::T);
    CHECK(pop[0].genotype == 0);
    CHECK(pop[1].genotype == 2);
  }
  SUBCASE("mode C removes the smallest contribution") {
    // Feature values 0.0, 0.45, 0.5, 1.0: the two interior points score
    // 0.45*0.05 and 0.05*0.5, so index 1 goes.
    auto pop = population_of({{0.0, 0.0}, {0.45, 0.45}, {0.5, 0.5}, {1.0, 1.0}});
    survivor_selection(pop, 3, specs, SelectionMode::C);
    CHECK(pop[1].genotype == 2);
  }
  SUBCASE("mode T only considers discrepancy-optimal removals") {
    Rng rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> coords(2 * 8);
      for (double& c : coords) c = std::round(unit(rng) * 4) / 4;
      const PointSet points(2, coords);
      const std::size_t victim = choose_removal(points, std::vector<double>{1, 1}, SelectionMode::T);
      const auto scan = min_removal_scan(points);
      CHECK(std::find(scan.tied_indices.begin(), scan.tied_indices.end(), victim) !=
            scan.tied_indices.end());
    }
  }
}

TEST_CASE("ea_generation") {
  EaSettings settings;
  settings.mu = 5;
  settings.features = unit_specs(2);
  Rng rng(4);
  SUBCASE("rejected offspring leave the population untouched") {
    ToyDomain strict(2, 10.0);  // gate unreachable
    auto init = strict.initialize(settings.mu, rng);
    std::vector<Individual<std::vector<double>>> pop;
    for (auto& s : init) pop.push_back(make_individual(strict, s.genotype, 10.0, settings.features));
    const auto before = pop;
    const GenerationTrace t = ea_generation(pop, strict, settings, rng);
    CHECK_FALSE(t.accepted);
    CHECK_FALSE(t.success);
    REQUIRE(pop.size() == before.size());
    for (std::size_t i = 0; i < pop.size(); ++i) CHECK(pop[i].genotype == before[i].genotype);
  }
  for (SelectionMode mode : {SelectionMode::D, SelectionMode::C, SelectionMode::T}) {
    CAPTURE(to_string(mode));
    settings.mode = mode;
    ToyDomain domain(2, 0.5, 0.3);
    auto result = run_ea(settings, domain, rng);
    CHECK(result.population.size() == settings.mu);
    for (const auto& m : result.population) CHECK(m.quality >= 0.5);
    double previous = result.initial_discrepancy;
    for (const auto& t : result.trace) {
      if (mode != SelectionMode::C) CHECK(t.discrepancy <= previous + 1e-12);
      previous = t.discrepancy;
    }
  }
}

TEST_CASE("run_ea") {
  EaSettings settings;
  settings.mu = 8;
  settings.generations = 300;
  settings.features = unit_specs(2);
  settings.mode = SelectionMode::T;

  SUBCASE("invariants hold every generation") {
    Rng rng(5);
    ToyDomain domain(2, 0.6, 0.2);
    std::size_t observed = 0;
    auto result = run_ea(settings, domain, rng,
                         GenerationObserver<std::vector<double>>(
                             [&](const GenerationTrace& t, const auto& pop) {
                               ++observed;
                               CHECK(pop.size() == settings.mu);
                               for (const auto& m : pop) {
                                 CHECK(ToyDomain::quality_of(m.genotype) >= 0.6);
                                 for (double c : m.scaled_features) {
                                   CHECK(c >= 0.0);
                                   CHECK(c <= 1.0);
                                 }
                               }
                               CHECK(oracle::star_discrepancy(scaled_point_set(pop, 2)) ==
                                     doctest::Approx(t.discrepancy).epsilon(1e-12));
                             }));
    CHECK(observed == settings.generations);
    CHECK(result.trace.size() == settings.generations);
    CHECK(result.trace.back().discrepancy < result.initial_discrepancy);
    CHECK(domain.mutations == settings.generations * settings.lambda);
  }
  SUBCASE("same seed, same run") {
    Rng a(77), b(77);
    ToyDomain da(2, 0.6, 0.2), db(2, 0.6, 0.2);
    const auto ra = run_ea(settings, da, a);
    const auto rb = run_ea(settings, db, b);
    REQUIRE(ra.trace.size() == rb.trace.size());
    for (std::size_t i = 0; i < ra.trace.size(); ++i) {
      CHECK(ra.trace[i].discrepancy == rb.trace[i].discrepancy);
      CHECK(ra.trace[i].accepted == rb.trace[i].accepted);
    }
    for (std::size_t i = 0; i < settings.mu; ++i) CHECK(ra.population[i].genotype == rb.population[i].genotype);
  }
  SUBCASE("lambda above one") {
    settings.lambda = 3;
    Rng rng(6);
    ToyDomain domain(2, 0.6, 0.2);
    const auto result = run_ea(settings, domain, rng);
    CHECK(result.population.size() == settings.mu);
    CHECK(domain.mutations == settings.generations * 3);
  }
  SUBCASE("bad settings") {
    Rng rng(7);
    ToyDomain domain(2, 0.6);
    settings.generations = 0;
    CHECK_THROWS_AS(run_ea(settings, domain, rng), config_error);
    settings.generations = 10;
    settings.mu = 1;
    CHECK_THROWS_AS(run_ea(settings, domain, rng), config_error);
    settings.mu = 4;
    settings.features = unit_specs(4);
    CHECK_THROWS_AS(run_ea(settings, domain, rng), config_error);
  }
  SUBCASE("initialisation that fails the gate") {
    Rng rng(8);
    ToyDomain domain(2, 5.0);
    CHECK_THROWS_AS(run_ea(settings, domain, rng), initialization_error);
  }
}

TEST_CASE("selection mode names") {
  CHECK(parse_selection_mode("T") == SelectionMode::T);
  CHECK(to_string(SelectionMode::C) == "C");
  CHECK_THROWS_AS(parse_selection_mode("X"), config_error);
}
