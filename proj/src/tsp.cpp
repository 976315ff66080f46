#include "divopt/tsp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>

#include "divopt/errors.hpp"

namespace divopt {

namespace {

std::vector<double> distance_matrix(const TspInstance& instance) {
  const std::size_t n = instance.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = distance(instance.cities[i], instance.cities[j]);
    }
  }
  return dist;
}

void check_tour(const TspInstance& instance, const Tour& tour) {
  const std::size_t n = instance.size();
  if (tour.size() != n) throw contract_error("tour length does not match city count");
  std::vector<char> seen(n, 0);
  for (std::size_t c : tour) {
    if (c >= n || seen[c]) throw contract_error("tour is not a permutation of the cities");
    seen[c] = 1;
  }
}

}  // namespace

double distance(const City& a, const City& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double tour_length(const TspInstance& instance, const Tour& tour) {
  check_tour(instance, tour);
  double total = 0.0;
  for (std::size_t i = 0; i < tour.size(); ++i) {
    total += distance(instance.cities[tour[i]], instance.cities[tour[(i + 1) % tour.size()]]);
  }
  return total;
}

Tour two_opt(const TspInstance& instance, Tour tour, Rng& rng) {
  check_tour(instance, tour);
  const std::size_t n = tour.size();
  if (n < 4) return tour;
  const std::vector<double> dist = distance_matrix(instance);
  auto d = [&](std::size_t a, std::size_t b) { return dist[a * n + b]; };

  // Move (i, j) replaces edges (t[i],t[i+1]) and (t[j],t[j+1]) by reversing t[i+1..j].
  std::vector<std::pair<std::size_t, std::size_t>> moves;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // shares city t[0]
      moves.emplace_back(i, j);
    }
  }

  bool improved = true;
  while (improved) {
    improved = false;
    std::shuffle(moves.begin(), moves.end(), rng);
    for (const auto& [i, j] : moves) {
      const std::size_t a = tour[i], b = tour[i + 1], c = tour[j], e = tour[(j + 1) % n];
      const double delta = d(a, c) + d(b, e) - d(a, b) - d(c, e);
      if (delta < -1e-12) {
        std::reverse(tour.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                     tour.begin() + static_cast<std::ptrdiff_t>(j) + 1);
        improved = true;
        break;
      }
    }
  }
  return tour;
}

Tour random_tour(std::size_t n, Rng& rng) {
  Tour tour(n);
  std::iota(tour.begin(), tour.end(), std::size_t{0});
  std::shuffle(tour.begin(), tour.end(), rng);
  return tour;
}

double heuristic_value(const TspInstance& instance, Rng& rng) {
  double best = std::numeric_limits<double>::infinity();
  for (int run = 0; run < 3; ++run) {
    const Tour local = two_opt(instance, random_tour(instance.size(), rng), rng);
    best = std::min(best, tour_length(instance, local));
  }
  return best;
}

double exact_opt(const TspInstance& instance) {
  const std::size_t n = instance.size();
  if (n > kMaxExactCities)
    throw unsupported_error("exact_opt: Held-Karp supports at most " +
                            std::to_string(kMaxExactCities) + " cities, got " + std::to_string(n) +
                            "; configure smaller instances");
  if (n <= 1) return 0.0;
  if (n == 2) return 2.0 * distance(instance.cities[0], instance.cities[1]);

  // Tours start and end at city n-1; subsets range over cities 0..m-1.
  const std::size_t m = n - 1;
  const std::vector<double> dist = distance_matrix(instance);
  const std::size_t full = std::size_t{1} << m;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(full * m, inf);
  for (std::size_t j = 0; j < m; ++j) dp[(std::size_t{1} << j) * m + j] = dist[m * n + j];

  for (std::size_t mask = 1; mask < full; ++mask) {
    const double* row = &dp[mask * m];
    for (std::size_t in = mask; in; in &= in - 1) {
      const auto j = static_cast<std::size_t>(std::countr_zero(in));
      const double base = row[j];
      const double* dj = &dist[j * n];
      for (std::size_t out = ~mask & (full - 1); out; out &= out - 1) {
        const auto next = static_cast<std::size_t>(std::countr_zero(out));
        double& slot = dp[(mask | (std::size_t{1} << next)) * m + next];
        slot = std::min(slot, base + dj[next]);
      }
    }
  }
  double best = inf;
  const double* last = &dp[(full - 1) * m];
  for (std::size_t j = 0; j < m; ++j) best = std::min(best, last[j] + dist[j * n + m]);
  return best;
}

double approximation_ratio(const TspInstance& instance, Rng& rng) {
  const double opt = exact_opt(instance);
  if (!(opt > 0.0)) throw degenerate_instance_error("approximation_ratio: optimal tour length is 0");
  return heuristic_value(instance, rng) / opt;
}

TspInstance mutate_instance(const TspInstance& instance, const InstanceMutation& params,
                            Rng& rng) {
  if (!(params.sigma > 0.0)) throw contract_error("mutate_instance: sigma must be positive");
  TspInstance out = instance;
  std::bernoulli_distribution pick(params.p_m);
  std::normal_distribution<double> offset(0.0, params.sigma);
  for (City& city : out.cities) {
    if (!pick(rng)) continue;
    City moved{};
    for (int attempt = 0;; ++attempt) {
      moved = {city.x + offset(rng), city.y + offset(rng)};
      const bool inside = moved.x >= 0.0 && moved.x <= 1.0 && moved.y >= 0.0 && moved.y <= 1.0;
      if (inside || attempt + 1 >= params.max_resamples) break;
    }
    city = {std::clamp(moved.x, 0.0, 1.0), std::clamp(moved.y, 0.0, 1.0)};
  }
  return out;
}

TspInstance random_instance(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TspInstance instance;
  instance.cities.resize(n);
  for (City& c : instance.cities) c = {unit(rng), unit(rng)};
  return instance;
}

std::vector<MstEdge> mst(const TspInstance& instance) {
  const std::size_t n = instance.size();
  if (n < 2) return {};
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> key(n, inf);
  std::vector<std::size_t> parent(n, 0);
  std::vector<char> in_tree(n, 0);
  key[0] = 0.0;
  std::vector<MstEdge> edges;
  edges.reserve(n - 1);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v] && (u == n || key[v] < key[u])) u = v;
    }
    in_tree[u] = 1;
    if (step > 0) edges.push_back({std::min(u, parent[u]), std::max(u, parent[u]), key[u]});
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double w = distance(instance.cities[u], instance.cities[v]);
      if (w < key[v]) {
        key[v] = w;
        parent[v] = u;
      }
    }
  }
  return edges;
}

AngleMean angle_mean_detail(const TspInstance& instance) {
  const std::size_t n = instance.size();
  if (n < 3) throw contract_error("angle_mean: need at least three cities");
  const std::vector<double> dist = distance_matrix(instance);
  AngleMean result{0.0, 0};
  std::vector<std::size_t> others(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pos = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others[pos++] = j;
    std::partial_sort(others.begin(), others.begin() + 2, others.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double da = dist[i * n + a], db = dist[i * n + b];
                        return da < db || (da == db && a < b);
                      });
    const City& c = instance.cities[i];
    const City& p = instance.cities[others[0]];
    const City& q = instance.cities[others[1]];
    const double ux = p.x - c.x, uy = p.y - c.y, vx = q.x - c.x, vy = q.y - c.y;
    const double norms = std::hypot(ux, uy) * std::hypot(vx, vy);
    if (norms == 0.0) {
      ++result.degenerate;
      continue;
    }
    result.value += std::acos(std::clamp((ux * vx + uy * vy) / norms, -1.0, 1.0));
  }
  result.value /= static_cast<double>(n);
  return result;
}

double feature_angle_mean(const TspInstance& instance) { return angle_mean_detail(instance).value; }

double feature_centroid_mean_dist(const TspInstance& instance) {
  const std::size_t n = instance.size();
  if (n == 0) throw contract_error("centroid_mean_dist: empty instance");
  City centroid;
  for (const City& c : instance.cities) {
    centroid.x += c.x;
    centroid.y += c.y;
  }
  centroid.x /= static_cast<double>(n);
  centroid.y /= static_cast<double>(n);
  double total = 0.0;
  for (const City& c : instance.cities) total += distance(c, centroid);
  return total / static_cast<double>(n);
}

double feature_mst_dists_mean(const TspInstance& instance) {
  if (instance.size() < 2) throw contract_error("mst_dists_mean: need at least two cities");
  const auto edges = mst(instance);
  double total = 0.0;
  for (const MstEdge& e : edges) total += e.weight;
  return total / static_cast<double>(edges.size());
}

double feature_nnds_mean(const TspInstance& instance) {
  const std::size_t n = instance.size();
  if (n < 2) throw contract_error("nnds_mean: need at least two cities");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) nearest = std::min(nearest, distance(instance.cities[i], instance.cities[j]));
    }
    total += nearest;
  }
  return total / static_cast<double>(n);
}

double feature_mst_depth_mean(const TspInstance& instance) {
  const std::size_t n = instance.size();
  if (n == 0) throw contract_error("mst_depth_mean: empty instance");
  if (n == 1) return 0.0;
  std::vector<std::vector<std::size_t>> adjacent(n);
  for (const MstEdge& e : mst(instance)) {
    adjacent[e.a].push_back(e.b);
    adjacent[e.b].push_back(e.a);
  }
  std::vector<std::size_t> depth(n, n);
  std::queue<std::size_t> frontier;
  depth[0] = 0;
  frontier.push(0);
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : adjacent[u]) {
      if (depth[v] == n) {
        depth[v] = depth[u] + 1;
        frontier.push(v);
      }
    }
  }
  double total = 0.0;
  for (std::size_t x : depth) total += static_cast<double>(x);
  return total / static_cast<double>(n);
}

const std::vector<std::string>& tsp_feature_names() {
  static const std::vector<std::string> names{"angle_mean", "centroid_mean_dist", "nnds_mean",
                                              "mst_dists_mean", "mst_depth_mean"};
  return names;
}

double tsp_feature(std::string_view name, const TspInstance& instance) {
  if (name == "angle_mean") return feature_angle_mean(instance);
  if (name == "centroid_mean_dist") return feature_centroid_mean_dist(instance);
  if (name == "nnds_mean") return feature_nnds_mean(instance);
  if (name == "mst_dists_mean") return feature_mst_dists_mean(instance);
  if (name == "mst_depth_mean") return feature_mst_depth_mean(instance);
  throw config_error("unknown TSP feature '" + std::string(name) + "'");
}

HardInstance init_hard_instance(std::size_t n, double alpha, std::size_t budget,
                                const InstanceMutation& mutation, Rng& rng) {
  if (alpha < 1.0) throw contract_error("init_hard_instance: alpha must be >= 1");
  if (budget == 0) throw contract_error("init_hard_instance: budget must be >= 1");
  HardInstance current{random_instance(n, rng), 0.0, {}};
  current.ratio = approximation_ratio(current.instance, rng);
  current.ratio_history.push_back(current.ratio);
  for (std::size_t step = 0; current.ratio < alpha; ++step) {
    if (step == budget) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "tsp: no instance with ratio >= %.4f after %zu hill-climb steps (best %.6f)",
                    alpha, budget, current.ratio);
      throw initialization_error(buf);
    }
    TspInstance child = mutate_instance(current.instance, mutation, rng);
    const double ratio = approximation_ratio(child, rng);
    if (ratio >= current.ratio) {
      current.instance = std::move(child);
      current.ratio = ratio;
      current.ratio_history.push_back(ratio);
    }
  }
  return current;
}

void write_instance(std::ostream& out, const TspInstance& instance) {
  out << instance.size() << '\n';
  char buf[64];
  for (const City& c : instance.cities) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", c.x, c.y);
    out << buf;
  }
}

void write_instance(const std::filesystem::path& path, const TspInstance& instance) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  write_instance(out, instance);
  if (!out) throw io_error("write failed: " + path.string());
}

TspInstance read_instance(std::istream& in) {
  std::size_t n = 0;
  if (!(in >> n)) throw io_error("instance file: missing city count");
  TspInstance instance;
  instance.cities.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    City& c = instance.cities[i];
    if (!(in >> c.x >> c.y))
      throw io_error("instance file: expected " + std::to_string(n) + " cities, read " +
                     std::to_string(i));
    if (c.x < 0.0 || c.x > 1.0 || c.y < 0.0 || c.y > 1.0)
      throw io_error("instance file: city " + std::to_string(i) + " outside the unit square");
  }
  return instance;
}

TspInstance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  return read_instance(in);
}

}  // namespace divopt
