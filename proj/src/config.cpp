#include "ridgemg/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ridgemg/matrix_market.hpp"

namespace ridgemg {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError("config field '" + key + "': " + what);
}

void check_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      bad(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

double require_positive(const json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "expected a number");
  const double x = v.get<double>();
  if (!(x > 0.0)) bad(key, "must be positive");
  return x;
}

std::size_t require_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    bad(key, "expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

ClusteringChoice parse_clustering(const json& obj, const std::string& where) {
  if (!obj.is_object()) bad(where, "expected an object");
  check_keys(obj, where,
             {"algorithm", "tolerance", "size", "distance", "seed", "kmeans_max_iters",
              "renyi_sigma", "renyi_swaps_per_feature", "update_leaders"});
  ClusteringChoice c;
  if (!obj.contains("algorithm")) bad(where + ".algorithm", "required");
  const std::string algo = obj.at("algorithm").get<std::string>();
  if (algo == "leader_follower") {
    if (obj.contains("tolerance") == obj.contains("size")) {
      bad(where, "leader_follower takes exactly one of 'tolerance' or 'size'");
    }
    if (obj.contains("tolerance")) {
      c.kind = ClusteringChoice::Kind::leader_tolerance;
      c.tolerance = require_positive(obj.at("tolerance"), where + ".tolerance");
    } else {
      c.kind = ClusteringChoice::Kind::leader_target;
      c.target_size = require_count(obj.at("size"), where + ".size");
      if (c.target_size == 0) bad(where + ".size", "must be positive");
    }
  } else if (algo == "kmeans" || algo == "renyi") {
    c.kind = algo == "kmeans" ? ClusteringChoice::Kind::kmeans : ClusteringChoice::Kind::renyi;
    if (!obj.contains("size")) bad(where + ".size", "required for " + algo);
    c.target_size = require_count(obj.at("size"), where + ".size");
    if (c.target_size == 0) bad(where + ".size", "must be positive");
  } else {
    bad(where + ".algorithm",
        "unknown algorithm '" + algo + "' (expected leader_follower, kmeans or renyi)");
  }
  if (obj.contains("distance")) {
    try {
      c.distance = distance_from_string(obj.at("distance").get<std::string>());
    } catch (const std::invalid_argument& e) {
      bad(where + ".distance", e.what());
    }
  }
  if (obj.contains("seed")) c.seed = obj.at("seed").get<std::uint64_t>();
  if (obj.contains("kmeans_max_iters")) {
    c.kmeans_max_iters = require_count(obj.at("kmeans_max_iters"), where + ".kmeans_max_iters");
  }
  if (obj.contains("renyi_sigma")) {
    c.renyi_sigma = require_positive(obj.at("renyi_sigma"), where + ".renyi_sigma");
  }
  if (obj.contains("renyi_swaps_per_feature")) {
    c.renyi_swaps_per_feature =
        require_count(obj.at("renyi_swaps_per_feature"), where + ".renyi_swaps_per_feature");
  }
  if (obj.contains("update_leaders")) {
    if (!obj.at("update_leaders").is_boolean()) bad(where + ".update_leaders", "expected a bool");
    c.update_leaders = obj.at("update_leaders").get<bool>();
  }
  return c;
}

InterpolationChoice parse_interpolation(const json& obj, const std::string& where) {
  if (!obj.is_object()) bad(where, "expected an object");
  check_keys(obj, where, {"variant", "n_interp", "n_eigenvectors"});
  InterpolationChoice i;
  if (obj.contains("variant")) {
    const std::string v = obj.at("variant").get<std::string>();
    if (v == "adjusted_average") {
      i.variant = InterpVariant::adjusted_average;
    } else if (v == "plain_average") {
      i.variant = InterpVariant::plain_average;
    } else if (v == "least_squares_a") {
      i.variant = InterpVariant::least_squares_a;
    } else if (v == "least_squares_b") {
      i.variant = InterpVariant::least_squares_b;
    } else {
      bad(where + ".variant", "unknown variant '" + v + "'");
    }
  }
  if (obj.contains("n_interp")) {
    i.n_interp = require_count(obj.at("n_interp"), where + ".n_interp");
    if (i.n_interp == 0) bad(where + ".n_interp", "must be positive");
  }
  if (obj.contains("n_eigenvectors")) {
    i.n_eigenvectors = require_count(obj.at("n_eigenvectors"), where + ".n_eigenvectors");
    if (i.n_eigenvectors == 0) bad(where + ".n_eigenvectors", "must be positive");
  }
  return i;
}

CoarseSolveChoice parse_coarse_solver(const json& obj, const std::string& where) {
  if (!obj.is_object()) bad(where, "expected an object");
  check_keys(obj, where, {"kind", "tol", "max_iters", "truncation"});
  CoarseSolveChoice s;
  if (obj.contains("kind")) {
    const std::string k = obj.at("kind").get<std::string>();
    if (k == "direct_cholesky") {
      s.kind = CoarseSolveChoice::Kind::direct_cholesky;
    } else if (k == "inner_cg") {
      s.kind = CoarseSolveChoice::Kind::inner_cg;
    } else if (k == "inner_fcg") {
      s.kind = CoarseSolveChoice::Kind::inner_fcg;
    } else {
      bad(where + ".kind", "unknown coarse solver '" + k + "'");
    }
  }
  if (obj.contains("tol")) s.tol = require_positive(obj.at("tol"), where + ".tol");
  if (obj.contains("max_iters")) {
    s.max_iters = require_count(obj.at("max_iters"), where + ".max_iters");
    if (s.max_iters == 0) bad(where + ".max_iters", "must be positive");
  }
  if (obj.contains("truncation")) {
    s.truncation = require_count(obj.at("truncation"), where + ".truncation");
    if (s.truncation == 0) bad(where + ".truncation", "must be positive");
  }
  return s;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), path.parent_path());
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& origin,
                              const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": not valid JSON: " + e.what());
  }
  if (!root.is_object()) throw ConfigError(origin + ": top level must be a JSON object");
  check_keys(root, "",
             {"dataset", "name", "beta_grid", "tol_grid", "methods", "levels", "solver",
              "n_repeats", "rhs_seed", "output", "threads"});

  ExperimentConfig cfg;
  if (!root.contains("dataset")) bad("dataset", "required");
  if (!root.at("dataset").is_string()) bad("dataset", "expected a path string");
  cfg.dataset = root.at("dataset").get<std::string>();
  cfg.dataset_name =
      root.contains("name") ? root.at("name").get<std::string>() : cfg.dataset.stem().string();

  if (!root.contains("beta_grid") || !root.at("beta_grid").is_array() ||
      root.at("beta_grid").empty()) {
    bad("beta_grid", "required non-empty array");
  }
  for (std::size_t i = 0; i < root.at("beta_grid").size(); ++i) {
    const json& v = root.at("beta_grid")[i];
    if (!v.is_number() || v.get<double>() < 0.0) {
      bad("beta_grid[" + std::to_string(i) + "]", "expected a nonnegative number");
    }
    cfg.beta_grid.push_back(v.get<double>());
  }
  if (!root.contains("tol_grid") || !root.at("tol_grid").is_array() ||
      root.at("tol_grid").empty()) {
    bad("tol_grid", "required non-empty array");
  }
  for (std::size_t i = 0; i < root.at("tol_grid").size(); ++i) {
    cfg.tol_grid.push_back(
        require_positive(root.at("tol_grid")[i], "tol_grid[" + std::to_string(i) + "]"));
  }

  if (!root.contains("methods") || !root.at("methods").is_array() || root.at("methods").empty()) {
    bad("methods", "required non-empty array");
  }
  for (std::size_t i = 0; i < root.at("methods").size(); ++i) {
    const json& v = root.at("methods")[i];
    if (!v.is_string()) bad("methods[" + std::to_string(i) + "]", "expected a method name");
    try {
      (void)method_from_string(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      bad("methods[" + std::to_string(i) + "]", e.what());
    }
    cfg.methods.push_back(v.get<std::string>());
  }

  const bool needs_levels = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                        [](const std::string& m) { return m != "cg" && m != "jacobi_cg"; });
  if (root.contains("levels")) {
    if (!root.at("levels").is_array() || root.at("levels").empty()) {
      bad("levels", "expected a non-empty array of level specs");
    }
    for (std::size_t i = 0; i < root.at("levels").size(); ++i) {
      const json& lv = root.at("levels")[i];
      const std::string where = "levels[" + std::to_string(i) + "]";
      if (!lv.is_object()) bad(where, "expected an object");
      check_keys(lv, where, {"clustering", "interpolation", "coarse_solver", "beta"});
      LevelSpec spec;
      if (!lv.contains("clustering")) bad(where + ".clustering", "required");
      spec.clustering = parse_clustering(lv.at("clustering"), where + ".clustering");
      if (lv.contains("interpolation")) {
        spec.interpolation = parse_interpolation(lv.at("interpolation"), where + ".interpolation");
      }
      if (lv.contains("coarse_solver")) {
        spec.solver = parse_coarse_solver(lv.at("coarse_solver"), where + ".coarse_solver");
      }
      if (lv.contains("beta")) {
        spec.beta_override = require_positive(lv.at("beta"), where + ".beta");
      }
      cfg.levels.push_back(std::move(spec));
    }
  } else if (needs_levels) {
    bad("levels", "required by the preconditioned methods in 'methods'");
  }

  if (root.contains("solver")) {
    const json& s = root.at("solver");
    if (!s.is_object()) bad("solver", "expected an object");
    check_keys(s, "solver", {"max_iters", "truncation", "omega"});
    if (s.contains("max_iters")) {
      cfg.solver.max_iters = require_count(s.at("max_iters"), "solver.max_iters");
      if (cfg.solver.max_iters == 0) bad("solver.max_iters", "must be positive");
    }
    if (s.contains("truncation")) {
      cfg.solver.truncation = require_count(s.at("truncation"), "solver.truncation");
      if (cfg.solver.truncation == 0) bad("solver.truncation", "must be positive");
    }
    if (s.contains("omega")) {
      cfg.solver.omega_mode = SolverConfig::OmegaMode::fixed;
      cfg.solver.omega_fixed = require_positive(s.at("omega"), "solver.omega");
    }
  }

  if (root.contains("n_repeats")) {
    cfg.n_repeats = require_count(root.at("n_repeats"), "n_repeats");
    if (cfg.n_repeats == 0) bad("n_repeats", "must be positive");
  }
  if (root.contains("rhs_seed")) cfg.rhs_seed = root.at("rhs_seed").get<std::uint64_t>();
  if (root.contains("output")) {
    if (!root.at("output").is_string()) bad("output", "expected a path string");
    cfg.output = root.at("output").get<std::string>();
  }
  if (root.contains("threads")) {
    cfg.threads = static_cast<unsigned>(require_count(root.at("threads"), "threads"));
    if (cfg.threads == 0) bad("threads", "must be positive");
  }

  if (!base_dir.empty()) {
    if (cfg.dataset.is_relative()) cfg.dataset = base_dir / cfg.dataset;
    if (cfg.output.is_relative()) cfg.output = base_dir / cfg.output;
  }
  if (!std::filesystem::exists(cfg.dataset)) {
    bad("dataset", "file does not exist: " + cfg.dataset.string());
  }
  return cfg;
}

namespace {

json clustering_to_json(const ClusteringChoice& c) {
  json out;
  switch (c.kind) {
    case ClusteringChoice::Kind::leader_tolerance:
      out["algorithm"] = "leader_follower";
      out["tolerance"] = c.tolerance;
      break;
    case ClusteringChoice::Kind::leader_target:
      out["algorithm"] = "leader_follower";
      out["size"] = c.target_size;
      break;
    case ClusteringChoice::Kind::kmeans:
      out["algorithm"] = "kmeans";
      out["size"] = c.target_size;
      out["kmeans_max_iters"] = c.kmeans_max_iters;
      break;
    case ClusteringChoice::Kind::renyi:
      out["algorithm"] = "renyi";
      out["size"] = c.target_size;
      out["renyi_sigma"] = c.renyi_sigma;
      out["renyi_swaps_per_feature"] = c.renyi_swaps_per_feature;
      break;
  }
  out["distance"] = to_string(c.distance);
  out["seed"] = c.seed;
  out["update_leaders"] = c.update_leaders;
  return out;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["dataset"] = cfg.dataset.string();
  root["name"] = cfg.dataset_name;
  root["beta_grid"] = cfg.beta_grid;
  root["tol_grid"] = cfg.tol_grid;
  root["methods"] = cfg.methods;
  root["n_repeats"] = cfg.n_repeats;
  root["rhs_seed"] = cfg.rhs_seed;
  root["output"] = cfg.output.string();
  root["threads"] = cfg.threads;
  root["solver"] = {{"max_iters", cfg.solver.max_iters}, {"truncation", cfg.solver.truncation}};
  if (cfg.solver.omega_mode == SolverConfig::OmegaMode::fixed) {
    root["solver"]["omega"] = cfg.solver.omega_fixed;
  }
  root["levels"] = json::array();
  for (const LevelSpec& spec : cfg.levels) {
    json lv;
    lv["clustering"] = clustering_to_json(spec.clustering);
    lv["interpolation"] = {{"variant", to_string(spec.interpolation.variant)},
                           {"n_interp", spec.interpolation.n_interp},
                           {"n_eigenvectors", spec.interpolation.n_eigenvectors}};
    const char* kind = spec.solver.kind == CoarseSolveChoice::Kind::direct_cholesky ? "direct_cholesky"
                       : spec.solver.kind == CoarseSolveChoice::Kind::inner_cg     ? "inner_cg"
                                                                                   : "inner_fcg";
    lv["coarse_solver"] = {{"kind", kind},
                           {"tol", spec.solver.tol},
                           {"max_iters", spec.solver.max_iters},
                           {"truncation", spec.solver.truncation}};
    if (spec.beta_override) lv["beta"] = *spec.beta_override;
    root["levels"].push_back(std::move(lv));
  }
  return root.dump(2);
}

std::vector<BenchRow> run_experiment(const ExperimentConfig& cfg) {
  set_num_threads(cfg.threads);
  const FeatureMatrix x = read_matrix_market(cfg.dataset);

  std::vector<MethodSpec> methods;
  methods.reserve(cfg.methods.size());
  for (const std::string& name : cfg.methods) {
    MethodSpec spec;
    spec.kind = method_from_string(name);
    spec.solver = cfg.solver;
    if (spec.kind == MethodKind::fcg_twolevel || spec.kind == MethodKind::fgmres_twolevel) {
      spec.levels = {cfg.levels.front()};
    } else if (spec.kind == MethodKind::fcg_multilevel) {
      spec.levels = cfg.levels;
    }
    methods.push_back(std::move(spec));
  }

  std::vector<BenchRow> rows = compare_methods(x, cfg.dataset_name, cfg.beta_grid, cfg.tol_grid,
                                               methods, cfg.n_repeats, cfg.rhs_seed);

  std::ofstream csv(cfg.output);
  if (!csv) throw std::runtime_error("cannot write output file: " + cfg.output.string());
  csv << to_csv(rows);

  std::ofstream echo(cfg.output.string() + ".config.json");
  if (echo) echo << config_to_json(cfg) << '\n';
  return rows;
}

}  // namespace ridgemg
