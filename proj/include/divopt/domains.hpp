#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "divopt/diversity.hpp"
#include "divopt/image.hpp"
#include "divopt/rng.hpp"
#include "divopt/tsp.hpp"

namespace divopt {

struct TspDomainConfig {
  std::size_t cities = 15;
  double alpha = 1.05;  // approximation-ratio threshold
  InstanceMutation mutation{};
  std::size_t init_budget = 20000;  // hill-climb steps per initial instance
  std::vector<std::string> features;
  std::vector<TspInstance> seeds;  // optional starting instances
};

// Hard TSP instances: quality is the 2-opt approximation ratio, evaluated
// once when an individual is created.
class TspDomain {
 public:
  using Genotype = TspInstance;

  explicit TspDomain(TspDomainConfig config);

  std::vector<Scored<TspInstance>> initialize(std::size_t count, Rng& rng);
  TspInstance mutate(const TspInstance& parent, Rng& rng) const;
  double quality(const TspInstance& instance, Rng& rng) const;
  bool accepts(double ratio) const { return passes_ratio_gate(ratio, config_.alpha); }
  std::vector<double> features(const TspInstance& instance) const;
  void adapt(bool) {}
  std::optional<double> mutation_parameter() const { return std::nullopt; }
  std::string_view name() const { return "tsp"; }

  const TspDomainConfig& config() const { return config_; }

 private:
  TspDomainConfig config_;
};

struct ImageDomainConfig {
  RasterImage reference;
  double mse_threshold = kDefaultMseThreshold;
  WalkParams walk{};
  std::vector<std::string> features;
  bool circular_hue = false;
};

// Images close to a reference: quality is the MSE, which must stay below the
// threshold. The walk length adapts after every generation.
class ImageDomain {
 public:
  using Genotype = RasterImage;

  explicit ImageDomain(ImageDomainConfig config);

  // Every initial member is a copy of the reference.
  std::vector<Scored<RasterImage>> initialize(std::size_t count, Rng& rng);
  RasterImage mutate(const RasterImage& parent, Rng& rng) const;
  double quality(const RasterImage& image, Rng& rng) const;
  bool accepts(double error) const { return passes_mse_gate(error, config_.mse_threshold); }
  std::vector<double> features(const RasterImage& image) const;
  void adapt(bool success) { walk_ = adapt_walk_length(walk_, success); }
  std::optional<double> mutation_parameter() const { return walk_.t_max; }
  std::string_view name() const { return "image"; }

  const ImageDomainConfig& config() const { return config_; }
  const WalkParams& walk() const { return walk_; }

 private:
  ImageDomainConfig config_;
  WalkParams walk_;
};

static_assert(DiversityDomain<TspDomain>);
static_assert(DiversityDomain<ImageDomain>);

// Scaling ranges used when a config names a feature without f_min/f_max.
std::optional<FeatureSpec> default_tsp_feature_spec(std::string_view name);
std::optional<FeatureSpec> default_image_feature_spec(std::string_view name);

}  // namespace divopt
