#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace divopt {

// Multiset of points in [0,1]^d stored row-major.
class PointSet {
 public:
  explicit PointSet(std::size_t dimension);
  PointSet(std::size_t dimension, std::vector<double> coords);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return dimension_ == 0 ? 0 : coords_.size() / dimension_; }
  bool empty() const { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dimension_, dimension_};
  }

  // Throws contract_error if the point has the wrong dimension or leaves [0,1].
  void add(std::span<const double> point);

  // Copy with the i-th point removed.
  PointSet without(std::size_t i) const;

  const std::vector<double>& coords() const { return coords_; }

 private:
  std::size_t dimension_;
  std::vector<double> coords_;
};

struct BoxDeviation {
  double over;   // closed-box count / k - volume
  double under;  // volume - open-box count / k
};

enum class DiscrepancyMeasure {
  two_sided,  // standard star discrepancy
  one_sided,  // sup of count/k - Vol over half-open boxes, for comparison only
};

inline constexpr std::size_t kMaxExactDimension = 3;
inline constexpr double kTieTolerance = 1e-12;

// Deviation of the anchored box [0,u] (closed count) and [0,u) (open count).
BoxDeviation box_deviation(const PointSet& points, std::span<const double> u);

// Exact star discrepancy for d <= 3. Sweeps the last axis in sorted order for
// every corner of the critical grid on the remaining axes.
double star_discrepancy(const PointSet& points,
                        DiscrepancyMeasure measure = DiscrepancyMeasure::two_sided);

struct RemovalScan {
  std::vector<std::size_t> tied_indices;
  double value;
};

// Discrepancy of every (k-1)-subset; returns the minimum and all indices
// within kTieTolerance of it, ascending.
RemovalScan min_removal_scan(const PointSet& points,
                             DiscrepancyMeasure measure = DiscrepancyMeasure::two_sided);

// Point-set CSV: header "# d=<d> k=<k>" then one comma-separated row per point.
void write_point_csv(std::ostream& out, const PointSet& points);
void write_point_csv(const std::filesystem::path& path, const PointSet& points);
PointSet read_point_csv(std::istream& in);
PointSet read_point_csv(const std::filesystem::path& path);

}  // namespace divopt
