#include "divopt/domains.hpp"

#include <algorithm>

#include "divopt/errors.hpp"

namespace divopt {

TspDomain::TspDomain(TspDomainConfig config) : config_(std::move(config)) {
  if (config_.cities < 4 || config_.cities > kMaxExactCities)
    throw config_error("tsp.cities: must lie in [4, " + std::to_string(kMaxExactCities) + "]");
  if (config_.alpha < 1.0) throw config_error("alpha: TSP ratio threshold must be >= 1");
  for (const auto& name : config_.features) tsp_feature(name, TspInstance{{{0, 0}, {1, 0}, {0, 1}}});
  for (const auto& seed : config_.seeds) {
    if (seed.size() != config_.cities)
      throw config_error("tsp.seed_dir: seed instance has " + std::to_string(seed.size()) +
                         " cities, expected " + std::to_string(config_.cities));
  }
}

std::vector<Scored<TspInstance>> TspDomain::initialize(std::size_t count, Rng& rng) {
  std::vector<Scored<TspInstance>> out;
  out.reserve(count);
  for (const auto& seed : config_.seeds) {
    if (out.size() == count) break;
    const double ratio = approximation_ratio(seed, rng);
    if (accepts(ratio)) out.push_back({seed, ratio});
  }
  while (out.size() < count) {
    HardInstance hard =
        init_hard_instance(config_.cities, config_.alpha, config_.init_budget, config_.mutation, rng);
    out.push_back({std::move(hard.instance), hard.ratio});
  }
  return out;
}

TspInstance TspDomain::mutate(const TspInstance& parent, Rng& rng) const {
  return mutate_instance(parent, config_.mutation, rng);
}

double TspDomain::quality(const TspInstance& instance, Rng& rng) const {
  return approximation_ratio(instance, rng);
}

std::vector<double> TspDomain::features(const TspInstance& instance) const {
  std::vector<double> values;
  values.reserve(config_.features.size());
  for (const auto& name : config_.features) values.push_back(tsp_feature(name, instance));
  return values;
}

ImageDomain::ImageDomain(ImageDomainConfig config)
    : config_(std::move(config)), walk_(config_.walk) {
  if (config_.reference.pixel_count() == 0) throw config_error("image.reference: empty image");
  if (!(walk_.factor > 1.0)) throw config_error("image.F: must be > 1");
  if (walk_.k < 1) throw config_error("image.k: must be >= 1");
  if (walk_.radius < 0) throw config_error("image.r: must be >= 0");
  if (!(walk_.t_lb >= 1.0 && walk_.t_lb <= walk_.t_max && walk_.t_max <= walk_.t_ub))
    throw config_error("image.t_max: need 1 <= t_lb <= t_max <= t_ub");
  for (const auto& name : config_.features) image_feature(name, config_.reference);
}

std::vector<Scored<RasterImage>> ImageDomain::initialize(std::size_t count, Rng&) {
  if (!accepts(0.0)) throw initialization_error("image: the reference itself fails the MSE gate");
  return std::vector<Scored<RasterImage>>(count, Scored<RasterImage>{config_.reference, 0.0});
}

RasterImage ImageDomain::mutate(const RasterImage& parent, Rng& rng) const {
  return offset_random_walk_mutation(parent, walk_, rng);
}

double ImageDomain::quality(const RasterImage& image, Rng&) const {
  return mse(image, config_.reference);
}

std::vector<double> ImageDomain::features(const RasterImage& image) const {
  std::vector<double> values;
  values.reserve(config_.features.size());
  for (const auto& name : config_.features)
    values.push_back(image_feature(name, image, config_.circular_hue));
  return values;
}

std::optional<FeatureSpec> default_tsp_feature_spec(std::string_view name) {
  // Ranges observed on 50-city instances. mst_depth_mean has no default.
  if (name == "angle_mean") return FeatureSpec{"angle_mean", 0.8, 2.8, 1.0};
  if (name == "centroid_mean_dist") return FeatureSpec{"centroid_mean_dist", 0.24, 0.6, 1.0};
  if (name == "nnds_mean") return FeatureSpec{"nnds_mean", 0.1, 0.7, 1.0};
  if (name == "mst_dists_mean") return FeatureSpec{"mst_dists_mean", 0.06, 0.15, 1.0};
  return std::nullopt;
}

std::optional<FeatureSpec> default_image_feature_spec(std::string_view name) {
  // Starting points only; ranges depend on the reference image and should be
  // set per experiment.
  if (name == "sd_hue") return FeatureSpec{"sd_hue", 0.42, 0.7, 1.0};
  if (name == "mean_hue") return FeatureSpec{"mean_hue", 0.25, 0.4, 1.0};
  if (name == "mean_saturation") return FeatureSpec{"mean_saturation", 0.42, 0.5, 1.0};
  if (name == "smoothness") return FeatureSpec{"smoothness", 0.906, 0.918, 1.0};
  if (name == "gcf") return FeatureSpec{"gcf", 0.0245, 0.0275, 1.0};
  if (name == "symmetry") return FeatureSpec{"symmetry", 0.715, 0.74, 1.0};
  return std::nullopt;
}

}  // namespace divopt
