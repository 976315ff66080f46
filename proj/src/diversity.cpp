#include "divopt/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace divopt {

void validate_feature_specs(std::span<const FeatureSpec> specs) {
  for (const auto& spec : specs) {
    if (!(spec.f_min < spec.f_max))
      throw config_error("feature '" + spec.name + "': f_min must be below f_max");
    if (!(spec.weight >= 0.0))
      throw config_error("feature '" + spec.name + "': weight must be non-negative");
  }
}

std::vector<double> scale_features(std::span<const double> raw, std::span<const FeatureSpec> specs) {
  if (raw.size() != specs.size())
    throw contract_error("scale_features: feature count does not match the specs");
  std::vector<double> scaled(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& spec = specs[i];
    if (!(spec.f_min < spec.f_max))
      throw config_error("feature '" + spec.name + "': f_min must be below f_max");
    scaled[i] = std::clamp((raw[i] - spec.f_min) / (spec.f_max - spec.f_min), 0.0, 1.0);
  }
  return scaled;
}

SelectionMode parse_selection_mode(std::string_view text) {
  if (text == "D") return SelectionMode::D;
  if (text == "C") return SelectionMode::C;
  if (text == "T") return SelectionMode::T;
  throw config_error("mode: expected one of D, C, T, got '" + std::string(text) + "'");
}

std::string_view to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::D: return "D";
    case SelectionMode::C: return "C";
    case SelectionMode::T: return "T";
  }
  return "?";
}

std::vector<double> weighted_contributions(const PointSet& points, std::span<const double> weights) {
  const std::size_t k = points.size();
  const std::size_t d = points.dimension();
  if (k < 2) throw contract_error("weighted_contribution: population needs at least two members");
  if (weights.size() != d) throw contract_error("weighted_contribution: one weight per feature");

  std::vector<double> total(k, 0.0);
  std::vector<std::size_t> order(k);
  std::vector<double> gap(k);
  for (std::size_t f = 0; f < d; ++f) {
    if (weights[f] == 0.0) continue;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return points[a][f] < points[b][f]; });
    const double lo = points[order.front()][f];
    const double hi = points[order.back()][f];
    bool max_claimed = false;
    for (std::size_t pos = 0; pos < k; ++pos) {
      const double v = points[order[pos]][f];
      if (pos == 0) {
        gap[pos] = kUnboundedContribution;
        max_claimed = (lo == hi);
      } else if (v == lo) {
        gap[pos] = 0.0;
      } else if (v == hi) {
        gap[pos] = max_claimed ? 0.0 : kUnboundedContribution;
        max_claimed = true;
      } else {
        gap[pos] = (v - points[order[pos - 1]][f]) * (points[order[pos + 1]][f] - v);
      }
      total[order[pos]] += weights[f] * gap[pos];
    }
  }
  return total;
}

double weighted_contribution(std::size_t member, const PointSet& points,
                             std::span<const double> weights) {
  if (member >= points.size()) throw contract_error("weighted_contribution: member not in population");
  return weighted_contributions(points, weights)[member];
}

double contribution_diversity(const PointSet& points, std::span<const double> weights) {
  double sum = 0.0;
  for (double c : weighted_contributions(points, weights)) {
    if (std::isfinite(c)) sum += c;
  }
  return sum;
}

std::size_t choose_removal(const PointSet& points, std::span<const double> weights,
                           SelectionMode mode, DiscrepancyMeasure measure) {
  if (mode == SelectionMode::D) return min_removal_scan(points, measure).tied_indices.front();

  const std::vector<double> contributions = weighted_contributions(points, weights);
  std::vector<std::size_t> candidates;
  if (mode == SelectionMode::T) {
    candidates = min_removal_scan(points, measure).tied_indices;
  } else {
    candidates.resize(points.size());
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  }
  std::size_t best = candidates.front();
  for (std::size_t idx : candidates) {
    if (contributions[idx] < contributions[best]) best = idx;
  }
  return best;
}

void validate_settings(const EaSettings& settings) {
  if (settings.mu < 2) throw config_error("mu: must be >= 2");
  if (settings.lambda < 1) throw config_error("lambda: must be >= 1");
  if (settings.generations < 1) throw config_error("generations: must be >= 1");
  if (settings.features.empty() || settings.features.size() > kMaxExactDimension)
    throw config_error("features: exact discrepancy supports d <= 3 (got " +
                       std::to_string(settings.features.size()) + ")");
  validate_feature_specs(settings.features);
}

}  // namespace divopt
