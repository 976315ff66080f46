#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "divopt/rng.hpp"

namespace divopt {

struct City {
  double x = 0.0;
  double y = 0.0;
};

// Cities in the unit square.
struct TspInstance {
  std::vector<City> cities;

  std::size_t size() const { return cities.size(); }
};

// Visiting order; a permutation of 0..n-1.
using Tour = std::vector<std::size_t>;

inline constexpr std::size_t kMaxExactCities = 18;

double distance(const City& a, const City& b);

// Euclidean cycle length including the closing edge.
double tour_length(const TspInstance& instance, const Tour& tour);

// First-improvement 2-opt with the candidate moves shuffled on every pass.
// Stops when no segment reversal shortens the tour.
Tour two_opt(const TspInstance& instance, Tour start, Rng& rng);

Tour random_tour(std::size_t n, Rng& rng);

// Best of three 2-opt runs from independent uniformly random tours.
double heuristic_value(const TspInstance& instance, Rng& rng);

// Held-Karp dynamic programme; n <= kMaxExactCities.
double exact_opt(const TspInstance& instance);

// heuristic_value / exact_opt. Throws degenerate_instance_error if OPT is 0.
double approximation_ratio(const TspInstance& instance, Rng& rng);

inline bool passes_ratio_gate(double ratio, double alpha) { return ratio >= alpha; }

struct InstanceMutation {
  double sigma = 0.025;
  double p_m = 0.2;  // per-city perturbation probability
  int max_resamples = 100;
};

// Gaussian coordinate perturbation of a random subset of cities. Offsets
// that leave the unit square are redrawn, then clamped after max_resamples.
TspInstance mutate_instance(const TspInstance& instance, const InstanceMutation& params,
                            Rng& rng);

TspInstance random_instance(std::size_t n, Rng& rng);

struct MstEdge {
  std::size_t a;  // a < b
  std::size_t b;
  double weight;
};

// Prim's construction from city 0; ties go to the lowest index.
std::vector<MstEdge> mst(const TspInstance& instance);

struct AngleMean {
  double value;
  std::size_t degenerate;  // cities sharing a position with a nearest neighbour
};

AngleMean angle_mean_detail(const TspInstance& instance);
double feature_angle_mean(const TspInstance& instance);
double feature_centroid_mean_dist(const TspInstance& instance);
double feature_mst_dists_mean(const TspInstance& instance);
double feature_nnds_mean(const TspInstance& instance);
// Depth of every node in the MST rooted at city 0, averaged.
double feature_mst_depth_mean(const TspInstance& instance);

// Names accepted by tsp_feature(): angle_mean, centroid_mean_dist, nnds_mean,
// mst_dists_mean, mst_depth_mean.
const std::vector<std::string>& tsp_feature_names();
double tsp_feature(std::string_view name, const TspInstance& instance);

struct HardInstance {
  TspInstance instance;
  double ratio;
  std::vector<double> ratio_history;  // accepted ratios, in order
};

// (1+1) hill climb on approximation_ratio from a random instance until the
// ratio reaches alpha. Throws initialization_error once budget steps are spent.
HardInstance init_hard_instance(std::size_t n, double alpha, std::size_t budget,
                                const InstanceMutation& mutation, Rng& rng);

// Text format: first line n, then n lines "x y".
void write_instance(std::ostream& out, const TspInstance& instance);
void write_instance(const std::filesystem::path& path, const TspInstance& instance);
TspInstance read_instance(std::istream& in);
TspInstance read_instance(const std::filesystem::path& path);

}  // namespace divopt
