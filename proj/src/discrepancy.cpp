#include "divopt/discrepancy.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "divopt/errors.hpp"

namespace divopt {

PointSet::PointSet(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw contract_error("PointSet: dimension must be positive");
}

PointSet::PointSet(std::size_t dimension, std::vector<double> coords)
    : dimension_(dimension), coords_(std::move(coords)) {
  if (dimension == 0) throw contract_error("PointSet: dimension must be positive");
  if (coords_.size() % dimension_ != 0)
    throw contract_error("PointSet: coordinate count is not a multiple of the dimension");
  for (double c : coords_) {
    if (!(c >= 0.0 && c <= 1.0)) throw contract_error("PointSet: coordinate outside [0,1]");
  }
}

void PointSet::add(std::span<const double> point) {
  if (point.size() != dimension_) throw contract_error("PointSet::add: dimension mismatch");
  for (double c : point) {
    if (!(c >= 0.0 && c <= 1.0)) throw contract_error("PointSet::add: coordinate outside [0,1]");
  }
  coords_.insert(coords_.end(), point.begin(), point.end());
}

PointSet PointSet::without(std::size_t i) const {
  if (i >= size()) throw contract_error("PointSet::without: index out of range");
  std::vector<double> rest;
  rest.reserve(coords_.size() - dimension_);
  const auto first = coords_.begin() + static_cast<std::ptrdiff_t>(i * dimension_);
  rest.insert(rest.end(), coords_.begin(), first);
  rest.insert(rest.end(), first + static_cast<std::ptrdiff_t>(dimension_), coords_.end());
  return PointSet(dimension_, std::move(rest));
}

BoxDeviation box_deviation(const PointSet& points, std::span<const double> u) {
  if (u.size() != points.dimension()) throw contract_error("box_deviation: dimension mismatch");
  if (points.empty()) throw contract_error("box_deviation: empty point set");
  const std::size_t k = points.size();
  std::size_t closed = 0;
  std::size_t open = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const auto p = points[j];
    bool in_closed = true;
    bool in_open = true;
    for (std::size_t i = 0; i < u.size(); ++i) {
      in_closed = in_closed && p[i] <= u[i];
      in_open = in_open && p[i] < u[i];
    }
    closed += in_closed;
    open += in_open;
  }
  double volume = 1.0;
  for (double x : u) volume *= x;
  const double n = static_cast<double>(k);
  return {static_cast<double>(closed) / n - volume, volume - static_cast<double>(open) / n};
}

namespace {

// Sorted distinct values of one axis, with 1 appended if absent.
std::vector<double> critical_values(const PointSet& points, std::size_t axis) {
  std::vector<double> values;
  values.reserve(points.size() + 1);
  for (std::size_t j = 0; j < points.size(); ++j) values.push_back(points[j][axis]);
  values.push_back(1.0);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

}  // namespace

double star_discrepancy(const PointSet& points, DiscrepancyMeasure measure) {
  const std::size_t d = points.dimension();
  const std::size_t k = points.size();
  if (k == 0) throw contract_error("star_discrepancy: empty point set");
  if (d > kMaxExactDimension)
    throw unsupported_error("star_discrepancy: exact computation supports d <= 3, got d=" +
                            std::to_string(d));

  const std::size_t last = d - 1;
  std::vector<std::vector<double>> grid(last);
  for (std::size_t axis = 0; axis < last; ++axis) grid[axis] = critical_values(points, axis);
  const std::vector<double> sweep_values = critical_values(points, last);

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a][last] < points[b][last]; });

  const double n = static_cast<double>(k);
  const bool two_sided = measure == DiscrepancyMeasure::two_sided;
  double best = 0.0;

  std::vector<std::size_t> corner(last, 0);
  std::vector<char> closed_ok(k);
  std::vector<char> open_ok(k);
  for (;;) {
    double prefix_volume = 1.0;
    for (std::size_t axis = 0; axis < last; ++axis) prefix_volume *= grid[axis][corner[axis]];
    for (std::size_t j = 0; j < k; ++j) {
      const auto p = points[j];
      bool c = true;
      bool o = true;
      for (std::size_t axis = 0; axis < last; ++axis) {
        const double u = grid[axis][corner[axis]];
        c = c && p[axis] <= u;
        o = o && p[axis] < u;
      }
      closed_ok[j] = c;
      open_ok[j] = o;
    }

    std::size_t closed_ptr = 0;
    std::size_t open_ptr = 0;
    std::size_t closed_count = 0;
    std::size_t open_count = 0;
    for (double v : sweep_values) {
      while (open_ptr < k && points[order[open_ptr]][last] < v) {
        open_count += open_ok[order[open_ptr]];
        ++open_ptr;
      }
      while (closed_ptr < k && points[order[closed_ptr]][last] <= v) {
        closed_count += closed_ok[order[closed_ptr]];
        ++closed_ptr;
      }
      const double volume = prefix_volume * v;
      best = std::max(best, static_cast<double>(closed_count) / n - volume);
      if (two_sided) best = std::max(best, volume - static_cast<double>(open_count) / n);
    }

    // Advance the odometer over the first d-1 axes.
    std::size_t axis = 0;
    while (axis < last) {
      if (++corner[axis] < grid[axis].size()) break;
      corner[axis] = 0;
      ++axis;
    }
    if (axis == last) break;
  }
  return best;
}

RemovalScan min_removal_scan(const PointSet& points, DiscrepancyMeasure measure) {
  const std::size_t k = points.size();
  if (k < 2) throw contract_error("min_removal_scan: need at least two points");
  std::vector<double> values(k);
  for (std::size_t j = 0; j < k; ++j) values[j] = star_discrepancy(points.without(j), measure);
  RemovalScan scan{{}, *std::min_element(values.begin(), values.end())};
  for (std::size_t j = 0; j < k; ++j) {
    if (values[j] - scan.value <= kTieTolerance) scan.tied_indices.push_back(j);
  }
  return scan;
}

void write_point_csv(std::ostream& out, const PointSet& points) {
  out << "# d=" << points.dimension() << " k=" << points.size() << '\n';
  char buf[32];
  for (std::size_t j = 0; j < points.size(); ++j) {
    const auto p = points[j];
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", p[i]);
      if (i) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

void write_point_csv(const std::filesystem::path& path, const PointSet& points) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  write_point_csv(out, points);
  if (!out) throw io_error("write failed: " + path.string());
}

PointSet read_point_csv(std::istream& in) {
  std::string line;
  std::size_t d = 0;
  std::size_t k = 0;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# d=%zu k=%zu", &d, &k) != 2 || d == 0) {
    throw io_error("point CSV: missing or malformed '# d=<d> k=<k>' header");
  }
  std::vector<double> coords;
  coords.reserve(d * k);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(row, cell, ',')) {
      try {
        coords.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw io_error("point CSV: bad number '" + cell + "' on data row " + std::to_string(rows + 1));
      }
      ++cols;
    }
    if (cols != d)
      throw io_error("point CSV: row " + std::to_string(rows + 1) + " has " +
                     std::to_string(cols) + " values, expected " + std::to_string(d));
    ++rows;
  }
  if (rows != k)
    throw io_error("point CSV: header says k=" + std::to_string(k) + " but found " +
                   std::to_string(rows) + " rows");
  return PointSet(d, std::move(coords));
}

PointSet read_point_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  return read_point_csv(in);
}

}  // namespace divopt
