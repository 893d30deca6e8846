#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffnet/engine.hpp"
#include "diffnet/signal.hpp"
#include "diffnet/theory.hpp"
#include "diffnet/topology.hpp"

namespace diffnet {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what) {}
};

struct TopologySpec {
  enum class Kind { kGenerate, kFile } kind = Kind::kGenerate;
  int node_count = 20;
  double target_mean_degree = 9.8;
  std::uint64_t seed = 1;
  std::string path;
};

struct NoiseSpec {
  enum class Kind { kUniformRange, kConstant, kExplicit } kind = Kind::kUniformRange;
  double low = 0.1;
  double high = 0.4;
  std::uint64_t seed = 7;
  bool pin_range = true;
  double scale = 1.0;
  double value = 0.4;               // kConstant
  std::vector<double> values;       // kExplicit
};

struct StepSizeSpec {
  enum class Kind { kAlternating, kConstant, kExplicit } kind = Kind::kAlternating;
  double low = 0.1;
  double high = 1.0;
  double value = 1.0;
  std::vector<double> values;
};

struct TrajectorySpec {
  enum class Kind { kStatic, kFlip, kRandomWalk } kind = Kind::kStatic;
  long flip_iteration = 0;
  double trace_q = 0.0;  // Tr[Q]; per-coordinate variance is trace_q / M
};

struct SystemSpec {
  std::uint64_t seed = 3;
  std::vector<double> w_o;  // explicit initial vector; empty = seeded draw
};

struct CombinerSpec {
  CombinerRule rule = CombinerRule::kUniform;
  double nu = 0.2;
  double delta_c = 1e-5;
};

struct MuSSpec {
  bool from_theory = false;
  double value = 0.0;
  double delta_n = 3000.0;
  double safety = 1.0;
};

struct AlgorithmSpec {
  std::string name;
  AlgorithmKind kind = AlgorithmKind::kDnlmsFull;
  int sampled_nodes = 0;     // dnlms_random
  bool beta_relative = false;
  double beta = 0.0;         // absolute, or multiple of sigma_max_sq when relative
  MuSSpec mu_s;
};

struct MetricsSpec {
  int ma_window = 64;
  int steady_window = 600;
};

struct ScenarioConfig {
  std::string name = "scenario";
  TopologySpec topology;
  FilterMode filter_mode = FilterMode::kClassical;
  int order = 50;
  NoiseSpec noise;
  StepSizeSpec step_sizes;
  TrajectorySpec trajectory;
  SystemSpec system;
  CombinerSpec combiner;
  double delta = 1e-5;
  double alpha_plus = 4.0;
  bool use_phi_lut = false;
  long iterations = 20000;
  int realizations = 100;
  std::uint64_t seed = 2024;
  MetricsSpec metrics;
  std::vector<AlgorithmSpec> algorithms;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& path,
                                           const std::string& key) {
  if (!j.contains(key)) throw ConfigError(path + "." + key, "missing required field");
  return j.at(key);
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path, "wrong type");
  }
}

template <typename T>
T field(const nlohmann::json& j, const std::string& path, const std::string& key) {
  return get_as<T>(require_field(j, path, key), path + "." + key);
}

template <typename T>
T field_or(const nlohmann::json& j, const std::string& path, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return get_as<T>(j.at(key), path + "." + key);
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  using detail::field;
  using detail::field_or;
  ScenarioConfig c;
  const std::string root = "config";
  c.name = field_or<std::string>(j, root, "name", "scenario");

  {
    const auto& t = detail::require_field(j, root, "topology");
    const std::string p = root + ".topology";
    if (t.contains("file")) {
      c.topology.kind = TopologySpec::Kind::kFile;
      c.topology.path = field<std::string>(t, p, "file");
    } else {
      c.topology.kind = TopologySpec::Kind::kGenerate;
      c.topology.node_count = field<int>(t, p, "V");
      c.topology.target_mean_degree = field<double>(t, p, "target_mean_degree");
      c.topology.seed = field_or<std::uint64_t>(t, p, "seed", 1);
      if (c.topology.node_count < 2) throw ConfigError(p + ".V", "must be >= 2");
      if (c.topology.target_mean_degree < 1.0 ||
          c.topology.target_mean_degree > c.topology.node_count - 1)
        throw ConfigError(p + ".target_mean_degree", "must lie in [1, V-1]");
    }
  }

  {
    const auto& f = detail::require_field(j, root, "filter");
    const std::string p = root + ".filter";
    std::string mode = field<std::string>(f, p, "mode");
    if (mode == "classical")
      c.filter_mode = FilterMode::kClassical;
    else if (mode == "graph")
      c.filter_mode = FilterMode::kGraph;
    else
      throw ConfigError(p + ".mode", "expected 'classical' or 'graph'");
    c.order = field<int>(f, p, "order");
    if (c.order < 1) throw ConfigError(p + ".order", "must be >= 1");
  }

  {
    const auto& nj = detail::require_field(j, root, "noise");
    const std::string p = root + ".noise";
    std::string kind = field<std::string>(nj, p, "kind");
    if (kind == "uniform_range") {
      c.noise.kind = NoiseSpec::Kind::kUniformRange;
      c.noise.low = field<double>(nj, p, "low");
      c.noise.high = field<double>(nj, p, "high");
      c.noise.seed = field_or<std::uint64_t>(nj, p, "seed", 7);
      c.noise.pin_range = field_or<bool>(nj, p, "pin_range", true);
      c.noise.scale = field_or<double>(nj, p, "scale", 1.0);
      if (!(c.noise.low > 0.0) || c.noise.high < c.noise.low)
        throw ConfigError(p, "need 0 < low <= high");
      if (!(c.noise.scale > 0.0)) throw ConfigError(p + ".scale", "must be > 0");
    } else if (kind == "constant") {
      c.noise.kind = NoiseSpec::Kind::kConstant;
      c.noise.value = field<double>(nj, p, "value");
      if (!(c.noise.value > 0.0)) throw ConfigError(p + ".value", "must be > 0");
    } else if (kind == "explicit") {
      c.noise.kind = NoiseSpec::Kind::kExplicit;
      c.noise.values = field<std::vector<double>>(nj, p, "values");
      for (double t : c.noise.values)
        if (!(t > 0.0)) throw ConfigError(p + ".values", "variances must be > 0");
    } else {
      throw ConfigError(p + ".kind", "expected uniform_range | constant | explicit");
    }
  }

  {
    const auto& sj = detail::require_field(j, root, "step_sizes");
    const std::string p = root + ".step_sizes";
    std::string kind = field<std::string>(sj, p, "kind");
    if (kind == "alternating") {
      c.step_sizes.kind = StepSizeSpec::Kind::kAlternating;
      c.step_sizes.low = field<double>(sj, p, "low");
      c.step_sizes.high = field<double>(sj, p, "high");
    } else if (kind == "constant") {
      c.step_sizes.kind = StepSizeSpec::Kind::kConstant;
      c.step_sizes.value = field<double>(sj, p, "value");
    } else if (kind == "explicit") {
      c.step_sizes.kind = StepSizeSpec::Kind::kExplicit;
      c.step_sizes.values = field<std::vector<double>>(sj, p, "values");
    } else {
      throw ConfigError(p + ".kind", "expected alternating | constant | explicit");
    }
    auto check = [&](double v) {
      if (!(v > 0.0 && v < 2.0)) throw ConfigError(p, "step sizes must lie in (0, 2)");
    };
    if (c.step_sizes.kind == StepSizeSpec::Kind::kAlternating) {
      check(c.step_sizes.low);
      check(c.step_sizes.high);
    } else if (c.step_sizes.kind == StepSizeSpec::Kind::kConstant) {
      check(c.step_sizes.value);
    } else {
      for (double v : c.step_sizes.values) check(v);
    }
  }

  {
    const auto& sysj = detail::require_field(j, root, "system");
    const std::string p = root + ".system";
    c.system.seed = field_or<std::uint64_t>(sysj, p, "seed", 3);
    c.system.w_o = field_or<std::vector<double>>(sysj, p, "w_o", {});
    if (!c.system.w_o.empty() && static_cast<int>(c.system.w_o.size()) != c.order)
      throw ConfigError(p + ".w_o", "length != filter order");
    const auto& tj = detail::require_field(sysj, p, "trajectory");
    const std::string tp = p + ".trajectory";
    std::string kind = field<std::string>(tj, tp, "kind");
    if (kind == "static") {
      c.trajectory.kind = TrajectorySpec::Kind::kStatic;
    } else if (kind == "flip") {
      c.trajectory.kind = TrajectorySpec::Kind::kFlip;
      c.trajectory.flip_iteration = field<long>(tj, tp, "iteration");
      if (c.trajectory.flip_iteration < 1) throw ConfigError(tp + ".iteration", "must be >= 1");
    } else if (kind == "random_walk") {
      c.trajectory.kind = TrajectorySpec::Kind::kRandomWalk;
      c.trajectory.trace_q = field<double>(tj, tp, "trace_q");
      if (c.trajectory.trace_q < 0.0) throw ConfigError(tp + ".trace_q", "must be >= 0");
    } else {
      throw ConfigError(tp + ".kind", "expected static | flip | random_walk");
    }
  }

  {
    const auto& cj = detail::require_field(j, root, "combiner");
    const std::string p = root + ".combiner";
    std::string rule = field<std::string>(cj, p, "rule");
    if (rule == "uniform")
      c.combiner.rule = CombinerRule::kUniform;
    else if (rule == "metropolis")
      c.combiner.rule = CombinerRule::kMetropolis;
    else if (rule == "acw")
      c.combiner.rule = CombinerRule::kAcw;
    else
      throw ConfigError(p + ".rule", "expected uniform | metropolis | acw");
    c.combiner.nu = field_or<double>(cj, p, "nu", 0.2);
    c.combiner.delta_c = field_or<double>(cj, p, "delta_c", 1e-5);
    if (!(c.combiner.nu > 0.0)) throw ConfigError(p + ".nu", "must be > 0");
    if (!(c.combiner.delta_c > 0.0)) throw ConfigError(p + ".delta_c", "must be > 0");
  }

  c.delta = field_or<double>(j, root, "regularizer", 1e-5);
  if (!(c.delta > 0.0)) throw ConfigError(root + ".regularizer", "must be > 0");
  c.alpha_plus = field_or<double>(j, root, "alpha_plus", 4.0);
  if (!(c.alpha_plus > 0.0)) throw ConfigError(root + ".alpha_plus", "must be > 0");
  c.use_phi_lut = field_or<bool>(j, root, "use_phi_lut", false);
  c.iterations = field<long>(j, root, "iterations");
  if (c.iterations < 1) throw ConfigError(root + ".iterations", "must be >= 1");
  c.realizations = field<int>(j, root, "realizations");
  if (c.realizations < 1) throw ConfigError(root + ".realizations", "must be >= 1");
  c.seed = field_or<std::uint64_t>(j, root, "seed", 2024);

  if (j.contains("metrics")) {
    const auto& mj = j.at("metrics");
    const std::string p = root + ".metrics";
    c.metrics.ma_window = field_or<int>(mj, p, "ma_window", 64);
    c.metrics.steady_window = field_or<int>(mj, p, "steady_window", 600);
    if (c.metrics.ma_window < 1) throw ConfigError(p + ".ma_window", "must be >= 1");
    if (c.metrics.steady_window < 1) throw ConfigError(p + ".steady_window", "must be >= 1");
  }

  const auto& aj = detail::require_field(j, root, "algorithms");
  if (!aj.is_array() || aj.empty())
    throw ConfigError(root + ".algorithms", "must be a non-empty array");
  for (std::size_t i = 0; i < aj.size(); ++i) {
    const std::string p = root + ".algorithms[" + std::to_string(i) + "]";
    const auto& a = aj.at(i);
    AlgorithmSpec s;
    std::string kind = field<std::string>(a, p, "kind");
    s.name = field_or<std::string>(a, p, "name", kind);
    if (kind == "dnlms") {
      s.kind = AlgorithmKind::kDnlmsFull;
    } else if (kind == "dnlms_random") {
      s.kind = AlgorithmKind::kDnlmsRandom;
      s.sampled_nodes = field<int>(a, p, "sampled_nodes");
      if (s.sampled_nodes < 0) throw ConfigError(p + ".sampled_nodes", "must be >= 0");
    } else if (kind == "as_dnlms" || kind == "asc_dnlms") {
      s.kind = kind == "as_dnlms" ? AlgorithmKind::kAsDnlms : AlgorithmKind::kAscDnlms;
      if (a.contains("beta") == a.contains("beta_r"))
        throw ConfigError(p, "give exactly one of beta, beta_r");
      if (a.contains("beta")) {
        s.beta = field<double>(a, p, "beta");
      } else {
        s.beta_relative = true;
        s.beta = field<double>(a, p, "beta_r");
      }
      if (!(s.beta > 0.0)) throw ConfigError(p, "beta must be > 0");
      const auto& mj = detail::require_field(a, p, "mu_s");
      if (mj.is_number()) {
        s.mu_s.value = detail::get_as<double>(mj, p + ".mu_s");
        if (!(s.mu_s.value > 0.0)) throw ConfigError(p + ".mu_s", "must be > 0");
      } else if (mj.is_object()) {
        s.mu_s.from_theory = true;
        s.mu_s.delta_n = detail::field<double>(mj, p + ".mu_s", "delta_n");
        s.mu_s.safety = detail::field_or<double>(mj, p + ".mu_s", "safety", 1.0);
        if (!(s.mu_s.delta_n >= 1.0)) throw ConfigError(p + ".mu_s.delta_n", "must be >= 1");
        if (!(s.mu_s.safety > 0.0)) throw ConfigError(p + ".mu_s.safety", "must be > 0");
      } else {
        throw ConfigError(p + ".mu_s", "expected a number or {delta_n, safety}");
      }
    } else {
      throw ConfigError(p + ".kind", "expected dnlms | dnlms_random | as_dnlms | asc_dnlms");
    }
    c.algorithms.push_back(std::move(s));
  }
  return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  return parse_scenario(j);
}

/// Scenario with every shared ingredient realized: topology, shift, noise
/// profile, step sizes, base optimal system, and per-algorithm engine
/// parameters resolved to absolute values. Immutable during runs, shared
/// across realization threads.
struct CompiledScenario {
  ScenarioConfig config;
  NetworkTopology topology;
  std::optional<ShiftOperator> shift;
  NoiseProfile noise;
  std::vector<double> mu_tilde;
  std::vector<double> w_o_base;

  struct ResolvedAlgorithm {
    AlgorithmSpec spec;
    EngineConfig engine;
  };
  std::vector<ResolvedAlgorithm> algorithms;
};

inline CompiledScenario compile_scenario(const ScenarioConfig& cfg) {
  NetworkTopology topo = cfg.topology.kind == TopologySpec::Kind::kFile
                             ? NetworkTopology::load(cfg.topology.path)
                             : build_random_geometric_network(cfg.topology.node_count,
                                                              cfg.topology.target_mean_degree,
                                                              cfg.topology.seed);
  const int v = topo.node_count();

  NoiseProfile noise;
  switch (cfg.noise.kind) {
    case NoiseSpec::Kind::kUniformRange:
      noise = draw_noise_profile(v, cfg.noise.low, cfg.noise.high, cfg.noise.seed,
                                 cfg.noise.pin_range, cfg.noise.scale);
      break;
    case NoiseSpec::Kind::kConstant:
      noise.sigma_v_sq.assign(v, cfg.noise.value);
      break;
    case NoiseSpec::Kind::kExplicit:
      noise.sigma_v_sq = cfg.noise.values;
      if (static_cast<int>(noise.sigma_v_sq.size()) != v)
        throw ConfigError("config.noise.values", "length != V");
      break;
  }
  noise.validate();

  std::vector<double> mu_tilde(v);
  switch (cfg.step_sizes.kind) {
    case StepSizeSpec::Kind::kAlternating:
      for (int k = 0; k < v; ++k)
        mu_tilde[k] = (k % 2 == 0) ? cfg.step_sizes.high : cfg.step_sizes.low;
      break;
    case StepSizeSpec::Kind::kConstant:
      mu_tilde.assign(v, cfg.step_sizes.value);
      break;
    case StepSizeSpec::Kind::kExplicit:
      mu_tilde = cfg.step_sizes.values;
      if (static_cast<int>(mu_tilde.size()) != v)
        throw ConfigError("config.step_sizes.values", "length != V");
      break;
  }

  CompiledScenario out{cfg,
                       std::move(topo),
                       std::nullopt,
                       std::move(noise),
                       std::move(mu_tilde),
                       cfg.system.w_o.empty() ? generate_optimal_system(cfg.order, cfg.system.seed)
                                              : cfg.system.w_o,
                       {}};
  if (cfg.filter_mode == FilterMode::kGraph)
    out.shift.emplace(normalized_adjacency_shift(out.topology));

  const double sigma_max_sq = out.noise.max_sq();
  for (const AlgorithmSpec& spec : cfg.algorithms) {
    EngineConfig ec;
    ec.algorithm = spec.kind;
    ec.combiner = cfg.combiner.rule;
    ec.acw_nu = cfg.combiner.nu;
    ec.acw_delta_c = cfg.combiner.delta_c;
    ec.delta = cfg.delta;
    ec.alpha_plus = cfg.alpha_plus;
    ec.use_phi_lut = cfg.use_phi_lut;
    if (spec.kind == AlgorithmKind::kDnlmsRandom) {
      if (spec.sampled_nodes > v)
        throw ConfigError("config.algorithms." + spec.name + ".sampled_nodes", "exceeds V");
      ec.sampled_nodes = spec.sampled_nodes;
    }
    if (uses_sampling_controller(spec.kind)) {
      ec.beta = spec.beta_relative ? spec.beta * sigma_max_sq : spec.beta;
      if (spec.mu_s.from_theory) {
        ec.mu_s = spec.mu_s.safety *
                  min_step_size_mu_s(cfg.alpha_plus, ec.beta, sigma_max_sq, spec.mu_s.delta_n);
      } else {
        ec.mu_s = spec.mu_s.value;
      }
    }
    out.algorithms.push_back({spec, ec});
  }
  return out;
}

}  // namespace diffnet
