#include "divopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "divopt/domains.hpp"
#include "divopt/errors.hpp"

namespace divopt {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& object, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.count(key))
      throw config_error((where.empty() ? "" : where + ".") + key + ": unknown key");
  }
}

template <class T>
T get_or(const json& object, const std::string& key, const std::string& where, T fallback) {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error((where.empty() ? "" : where + ".") + key + ": wrong type");
  }
}

std::size_t get_count(const json& object, const std::string& key, const std::string& where,
                      std::size_t fallback) {
  if (!object.contains(key)) return fallback;
  const json& v = object.at(key);
  const std::string label = (where.empty() ? "" : where + ".") + key;
  if (!v.is_number_integer()) throw config_error(label + ": expected an integer");
  if (v.get<long long>() < 0) throw config_error(label + ": must be non-negative");
  return v.get<std::size_t>();
}

FeatureSpec parse_feature(const json& entry, DomainKind domain, std::size_t index) {
  const std::string where = "features[" + std::to_string(index) + "]";
  std::string name;
  if (entry.is_string()) {
    name = entry.get<std::string>();
  } else if (entry.is_object()) {
    reject_unknown_keys(entry, where, {"name", "f_min", "f_max", "weight"});
    if (!entry.contains("name") || !entry.at("name").is_string())
      throw config_error(where + ".name: required string");
    name = entry.at("name").get<std::string>();
  } else {
    throw config_error(where + ": expected a feature name or object");
  }

  const auto& known = domain == DomainKind::tsp ? tsp_feature_names() : image_feature_names();
  if (std::find(known.begin(), known.end(), name) == known.end())
    throw config_error(where + ".name: unknown feature '" + name + "'");

  std::optional<FeatureSpec> spec = domain == DomainKind::tsp ? default_tsp_feature_spec(name)
                                                              : default_image_feature_spec(name);
  const bool has_range = entry.is_object() && entry.contains("f_min") && entry.contains("f_max");
  if (!spec && !has_range)
    throw config_error(where + ": feature '" + name + "' has no default range; give f_min and f_max");
  FeatureSpec out = spec.value_or(FeatureSpec{name, 0.0, 1.0, 1.0});
  if (entry.is_object()) {
    out.f_min = get_or<double>(entry, "f_min", where, out.f_min);
    out.f_max = get_or<double>(entry, "f_max", where, out.f_max);
    out.weight = get_or<double>(entry, "weight", where, out.weight);
  }
  if (!(out.f_min < out.f_max)) throw config_error(where + ".f_min: must be below f_max");
  if (!(out.weight >= 0.0)) throw config_error(where + ".weight: must be non-negative");
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config: JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw config_error("config: top level must be an object");
  reject_unknown_keys(doc, "",
                      {"domain", "mode", "mu", "lambda", "generations", "features", "alpha",
                       "one_sided", "tsp", "image", "repetitions", "base_seed", "output_dir"});

  ExperimentConfig cfg;
  if (!doc.contains("domain")) throw config_error("domain: required (tsp or image)");
  const std::string domain = get_or<std::string>(doc, "domain", "", "");
  if (domain == "tsp") {
    cfg.domain = DomainKind::tsp;
  } else if (domain == "image") {
    cfg.domain = DomainKind::image;
    cfg.alpha = kDefaultMseThreshold;
  } else {
    throw config_error("domain: expected tsp or image, got '" + domain + "'");
  }
  if (doc.contains("mode")) cfg.mode = parse_selection_mode(get_or<std::string>(doc, "mode", "", ""));
  cfg.mu = get_count(doc, "mu", "", cfg.mu);
  cfg.lambda = get_count(doc, "lambda", "", cfg.lambda);
  cfg.generations = get_count(doc, "generations", "", cfg.generations);
  cfg.alpha = get_or<double>(doc, "alpha", "", cfg.alpha);
  cfg.one_sided = get_or<bool>(doc, "one_sided", "", cfg.one_sided);
  cfg.repetitions = get_count(doc, "repetitions", "", cfg.repetitions);
  cfg.base_seed = get_or<std::uint64_t>(doc, "base_seed", "", cfg.base_seed);
  if (doc.contains("output_dir"))
    cfg.output_dir = base_dir / get_or<std::string>(doc, "output_dir", "", "");

  if (!doc.contains("features") || !doc.at("features").is_array())
    throw config_error("features: required array");
  const json& features = doc.at("features");
  for (std::size_t i = 0; i < features.size(); ++i)
    cfg.features.push_back(parse_feature(features[i], cfg.domain, i));

  if (doc.contains("tsp")) {
    if (cfg.domain != DomainKind::tsp) throw config_error("tsp: section given for an image run");
    const json& t = doc.at("tsp");
    if (!t.is_object()) throw config_error("tsp: expected an object");
    reject_unknown_keys(t, "tsp", {"cities", "sigma", "p_m", "init_budget", "seed_dir"});
    cfg.cities = get_count(t, "cities", "tsp", cfg.cities);
    cfg.sigma = get_or<double>(t, "sigma", "tsp", cfg.sigma);
    if (t.contains("p_m")) cfg.p_m = get_or<double>(t, "p_m", "tsp", 0.0);
    cfg.init_budget = get_count(t, "init_budget", "tsp", cfg.init_budget);
    if (t.contains("seed_dir")) cfg.seed_dir = base_dir / get_or<std::string>(t, "seed_dir", "tsp", "");
  }
  if (doc.contains("image")) {
    if (cfg.domain != DomainKind::image) throw config_error("image: section given for a TSP run");
    const json& im = doc.at("image");
    if (!im.is_object()) throw config_error("image: expected an object");
    reject_unknown_keys(im, "image",
                        {"reference", "r", "t_max", "t_lb", "t_ub", "F", "k", "circular_hue"});
    if (im.contains("reference")) cfg.reference = base_dir / get_or<std::string>(im, "reference", "image", "");
    cfg.walk.radius = get_or<int>(im, "r", "image", cfg.walk.radius);
    cfg.walk.t_max = get_or<double>(im, "t_max", "image", cfg.walk.t_max);
    cfg.walk.t_lb = get_or<double>(im, "t_lb", "image", cfg.walk.t_lb);
    cfg.walk.t_ub = get_or<double>(im, "t_ub", "image", cfg.walk.t_ub);
    cfg.walk.factor = get_or<double>(im, "F", "image", cfg.walk.factor);
    cfg.walk.k = get_or<int>(im, "k", "image", cfg.walk.k);
    cfg.circular_hue = get_or<bool>(im, "circular_hue", "image", cfg.circular_hue);
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.mu < 2) throw config_error("mu: must be >= 2");
  if (cfg.lambda < 1) throw config_error("lambda: must be >= 1");
  if (cfg.generations < 1) throw config_error("generations: must be >= 1");
  if (cfg.repetitions < 1) throw config_error("repetitions: must be >= 1");
  if (cfg.features.empty()) throw config_error("features: at least one feature is required");
  if (cfg.features.size() > kMaxExactDimension)
    throw config_error("features: exact discrepancy supports d <= 3, got d=" +
                       std::to_string(cfg.features.size()));
  validate_feature_specs(cfg.features);
  if (cfg.domain == DomainKind::tsp) {
    if (cfg.alpha < 1.0) throw config_error("alpha: TSP ratio threshold must be >= 1");
    if (cfg.cities < 4 || cfg.cities > kMaxExactCities)
      throw config_error("tsp.cities: exact optimum needs 4 <= n <= " +
                         std::to_string(kMaxExactCities));
    if (!(cfg.sigma > 0.0)) throw config_error("tsp.sigma: must be positive");
    if (cfg.p_m && !(*cfg.p_m >= 0.0 && *cfg.p_m <= 1.0))
      throw config_error("tsp.p_m: must lie in [0,1]");
    if (cfg.init_budget < 1) throw config_error("tsp.init_budget: must be >= 1");
    if (cfg.seed_dir && !std::filesystem::is_directory(*cfg.seed_dir))
      throw config_error("tsp.seed_dir: not a directory: " + cfg.seed_dir->string());
  } else {
    if (!(cfg.alpha > 0.0)) throw config_error("alpha: MSE threshold must be positive");
    if (cfg.reference.empty()) throw config_error("image.reference: required for image runs");
    if (!std::filesystem::is_regular_file(cfg.reference))
      throw config_error("image.reference: missing reference image " + cfg.reference.string());
    const WalkParams& w = cfg.walk;
    if (!(w.factor > 1.0)) throw config_error("image.F: must be > 1");
    if (w.k < 1) throw config_error("image.k: must be >= 1");
    if (w.radius < 0) throw config_error("image.r: must be >= 0");
    if (!(w.t_lb >= 1.0 && w.t_lb <= w.t_max && w.t_max <= w.t_ub))
      throw config_error("image.t_max: need 1 <= t_lb <= t_max <= t_ub");
  }
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["domain"] = cfg.domain == DomainKind::tsp ? "tsp" : "image";
  doc["mode"] = std::string(to_string(cfg.mode));
  doc["mu"] = cfg.mu;
  doc["lambda"] = cfg.lambda;
  doc["generations"] = cfg.generations;
  doc["alpha"] = cfg.alpha;
  doc["one_sided"] = cfg.one_sided;
  doc["repetitions"] = cfg.repetitions;
  doc["base_seed"] = cfg.base_seed;
  doc["output_dir"] = cfg.output_dir.generic_string();
  json features = json::array();
  for (const auto& f : cfg.features)
    features.push_back({{"name", f.name}, {"f_min", f.f_min}, {"f_max", f.f_max}, {"weight", f.weight}});
  doc["features"] = features;
  if (cfg.domain == DomainKind::tsp) {
    json t{{"cities", cfg.cities},
           {"sigma", cfg.sigma},
           {"p_m", cfg.p_m.value_or(3.0 / static_cast<double>(cfg.cities))},
           {"init_budget", cfg.init_budget}};
    if (cfg.seed_dir) t["seed_dir"] = cfg.seed_dir->generic_string();
    doc["tsp"] = t;
  } else {
    doc["image"] = {{"reference", cfg.reference.generic_string()},
                    {"r", cfg.walk.radius},
                    {"t_max", cfg.walk.t_max},
                    {"t_lb", cfg.walk.t_lb},
                    {"t_ub", cfg.walk.t_ub},
                    {"F", cfg.walk.factor},
                    {"k", cfg.walk.k},
                    {"circular_hue", cfg.circular_hue}};
  }
  return doc.dump(2);
}

EaSettings ea_settings(const ExperimentConfig& cfg) {
  EaSettings s;
  s.mu = cfg.mu;
  s.lambda = cfg.lambda;
  s.generations = cfg.generations;
  s.mode = cfg.mode;
  s.features = cfg.features;
  s.measure = cfg.one_sided ? DiscrepancyMeasure::one_sided : DiscrepancyMeasure::two_sided;
  return s;
}

Stats summarize(std::span<const double> values) {
  if (values.empty()) throw contract_error("summarize: no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {*std::min_element(values.begin(), values.end()), mean, std::sqrt(sq / n)};
}

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trace_csv(std::ostream& out, std::span<const FeatureSpec> features,
                     std::span<const GenerationTrace> trace) {
  const bool has_parameter = !trace.empty() && trace.front().mutation_parameter.has_value();
  out << "generation,discrepancy,accepted";
  for (const auto& f : features) out << ',' << f.name << "_min," << f.name << "_max";
  if (has_parameter) out << ",t_max";
  out << '\n';
  for (const auto& row : trace) {
    out << row.generation << ',' << format_real(row.discrepancy) << ',' << (row.accepted ? 1 : 0);
    for (std::size_t i = 0; i < features.size(); ++i)
      out << ',' << format_real(row.feature_min[i]) << ',' << format_real(row.feature_max[i]);
    if (has_parameter) out << ',' << format_real(row.mutation_parameter.value_or(0.0));
    out << '\n';
  }
}

void write_feature_csv(std::ostream& out, std::span<const FeatureSpec> features,
                       std::span<const MemberRecord> population) {
  if (population.empty()) throw contract_error("write_feature_csv: empty population");
  out << "member";
  for (const auto& f : features) out << ',' << f.name;
  for (const auto& f : features) out << ',' << f.name << "_scaled";
  out << ",quality\n";
  for (std::size_t m = 0; m < population.size(); ++m) {
    out << m;
    for (double v : population[m].raw_features) out << ',' << format_real(v);
    for (double v : population[m].scaled_features) out << ',' << format_real(v);
    out << ',' << format_real(population[m].quality) << '\n';
  }
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw io_error(path.string() + ": empty feature CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 4 || (header.size() - 2) % 2 != 0 || header.front() != "member" ||
      header.back() != "quality")
    throw io_error(path.string() + ": unexpected feature CSV header");
  const std::size_t d = (header.size() - 2) / 2;
  FeatureTable table;
  table.names.assign(header.begin() + 1, header.begin() + 1 + static_cast<std::ptrdiff_t>(d));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    if (cells.size() != header.size()) throw io_error(path.string() + ": ragged feature CSV row");
    MemberRecord rec;
    rec.raw_features.assign(cells.begin() + 1, cells.begin() + 1 + static_cast<std::ptrdiff_t>(d));
    rec.scaled_features.assign(cells.begin() + 1 + static_cast<std::ptrdiff_t>(d), cells.end() - 1);
    rec.quality = cells.back();
    table.rows.push_back(std::move(rec));
  }
  return table;
}

void write_summary_csv(std::ostream& out, const ExperimentSummary& summary) {
  out << "run_id,seed,status,initial_discrepancy,final_discrepancy\n";
  for (const auto& run : summary.runs) {
    out << run.run_id << ',' << run.seed << ',' << (run.completed ? "completed" : "failed") << ',';
    if (run.completed)
      out << format_real(run.initial_discrepancy) << ',' << format_real(run.final_discrepancy);
    else
      out << ',';
    out << '\n';
  }
  if (summary.final_discrepancy) {
    out << "min,,aggregate,," << format_real(summary.final_discrepancy->min) << '\n';
    out << "mean,,aggregate,," << format_real(summary.final_discrepancy->mean) << '\n';
    out << "std,,aggregate,," << format_real(summary.final_discrepancy->std) << '\n';
  }
  if (!summary.all_completed) out << "incomplete,,aggregate,,\n";
}

std::string run_id_for(std::size_t repetition) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%03zu", repetition);
  return buf;
}

namespace {

std::vector<TspInstance> load_seed_instances(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<TspInstance> seeds;
  for (const auto& file : files) seeds.push_back(read_instance(file));
  return seeds;
}

template <class D>
void execute(const ExperimentConfig& cfg, D& domain, RepetitionResult& result,
             const std::filesystem::path* run_dir,
             const std::function<bool(const typename D::Genotype&, double)>& gate_holds) {
  const EaSettings settings = ea_settings(cfg);
  Rng rng(result.seed);
  auto observer = [&](const GenerationTrace&, const std::vector<Individual<typename D::Genotype>>& pop) {
    for (const auto& member : pop)
      if (!gate_holds(member.genotype, member.quality)) ++result.gate_violations;
  };
  auto run = run_ea(settings, domain, rng, GenerationObserver<typename D::Genotype>(observer));

  result.initial_discrepancy = run.initial_discrepancy;
  result.final_discrepancy = run.trace.back().discrepancy;
  result.trace = std::move(run.trace);
  for (const auto& member : run.population)
    result.population.push_back({member.raw_features, member.scaled_features, member.quality});
  result.completed = true;
  if (!run_dir) return;

  std::filesystem::create_directories(*run_dir);
  auto open = [&](const char* name) {
    std::ofstream out(*run_dir / name, std::ios::binary);
    if (!out) throw io_error("cannot open " + (*run_dir / name).string() + " for writing");
    return out;
  };
  {
    auto out = open("trace.csv");
    write_trace_csv(out, settings.features, result.trace);
  }
  {
    auto out = open("features.csv");
    write_feature_csv(out, settings.features, result.population);
  }
  write_point_csv(*run_dir / "population.csv", scaled_point_set(run.population, settings.features.size()));
  auto sidecar = open("population_genotypes.txt");
  for (std::size_t m = 0; m < run.population.size(); ++m) {
    char name[32];
    if constexpr (std::is_same_v<typename D::Genotype, TspInstance>) {
      std::snprintf(name, sizeof name, "member_%02zu.tsp", m);
      write_instance(*run_dir / name, run.population[m].genotype);
    } else {
      std::snprintf(name, sizeof name, "member_%02zu.ppm", m);
      write_ppm(*run_dir / name, run.population[m].genotype);
    }
    sidecar << name << '\n';
  }
}

}  // namespace

RepetitionResult run_repetition(const ExperimentConfig& cfg, std::size_t repetition,
                                bool write_outputs) {
  RepetitionResult result;
  result.run_id = run_id_for(repetition);
  result.seed = cfg.base_seed + repetition;
  const std::filesystem::path run_dir = cfg.output_dir / result.run_id;
  try {
    std::vector<std::string> names;
    for (const auto& f : cfg.features) names.push_back(f.name);
    if (cfg.domain == DomainKind::tsp) {
      TspDomainConfig tc;
      tc.cities = cfg.cities;
      tc.alpha = cfg.alpha;
      tc.mutation.sigma = cfg.sigma;
      tc.mutation.p_m = cfg.p_m.value_or(3.0 / static_cast<double>(cfg.cities));
      tc.init_budget = cfg.init_budget;
      tc.features = names;
      if (cfg.seed_dir) tc.seeds = load_seed_instances(*cfg.seed_dir);
      TspDomain domain(std::move(tc));
      const double alpha = cfg.alpha;
      execute(cfg, domain, result, write_outputs ? &run_dir : nullptr,
              std::function<bool(const TspInstance&, double)>(
                  [alpha](const TspInstance&, double q) { return passes_ratio_gate(q, alpha); }));
    } else {
      ImageDomainConfig ic;
      ic.reference = read_ppm(cfg.reference);
      ic.mse_threshold = cfg.alpha;
      ic.walk = cfg.walk;
      ic.features = names;
      ic.circular_hue = cfg.circular_hue;
      ImageDomain domain(std::move(ic));
      const RasterImage& reference = domain.config().reference;
      const double threshold = cfg.alpha;
      execute(cfg, domain, result, write_outputs ? &run_dir : nullptr,
              std::function<bool(const RasterImage&, double)>(
                  [&reference, threshold](const RasterImage& img, double) {
                    return passes_mse_gate(mse(img, reference), threshold);
                  }));
    }
  } catch (const initialization_error& e) {
    result.completed = false;
    result.error = e.what();
  }
  return result;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg, unsigned jobs, bool write_outputs) {
  validate_config(cfg);
  ExperimentSummary summary;
  summary.runs.resize(cfg.repetitions);
  const unsigned workers =
      std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cfg.repetitions)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.repetitions; i = next++) {
      try {
        summary.runs[i] = run_repetition(cfg, i, write_outputs);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> finals;
  for (const auto& run : summary.runs)
    if (run.completed) finals.push_back(run.final_discrepancy);
  summary.all_completed = finals.size() == summary.runs.size();
  if (!finals.empty()) summary.final_discrepancy = summarize(finals);

  if (write_outputs) {
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream out(cfg.output_dir / "summary.csv", std::ios::binary);
    if (!out) throw io_error("cannot open " + (cfg.output_dir / "summary.csv").string());
    write_summary_csv(out, summary);
  }
  return summary;
}

}  // namespace divopt
