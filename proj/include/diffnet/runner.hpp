#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "diffnet/metrics.hpp"
#include "diffnet/scenario.hpp"

namespace diffnet {

/// Observer invoked after every engine iteration of a realization. Used by
/// the verification suites to check in-flight invariants; the Monte-Carlo
/// paths run without one.
using IterationHook =
    std::function<void(long iteration, const DiffusionEngine&, const IterationRecord&)>;

struct RealizationResult {
  std::vector<IterationRecord> series;
  bool diverged = false;
  long diverged_at = -1;
};

/// Runs one seeded realization of one algorithm. The environment streams
/// are keyed by (seed, realization, node, purpose) only, so every algorithm
/// sees identical inputs, noise, and system trajectories for a given
/// realization index.
inline RealizationResult run_realization(const CompiledScenario& sc, int algo_index,
                                         int realization, const IterationHook* hook = nullptr) {
  const ScenarioConfig& cfg = sc.config;
  const int v = sc.topology.node_count();
  const int m = cfg.order;
  const auto& resolved = sc.algorithms.at(algo_index);

  EngineConfig ec = resolved.engine;
  ec.schedule_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(realization),
                                 1000 + static_cast<std::uint64_t>(algo_index),
                                 StreamPurpose::kSchedule);
  DiffusionEngine engine(sc.topology, m, sc.mu_tilde, ec);

  std::vector<Rng> input_streams, noise_streams;
  input_streams.reserve(v);
  noise_streams.reserve(v);
  for (int k = 0; k < v; ++k) {
    input_streams.emplace_back(cfg.seed, realization, k, StreamPurpose::kInput);
    noise_streams.emplace_back(cfg.seed, realization, k, StreamPurpose::kNoise);
  }
  Rng walk_stream(cfg.seed, realization, 0, StreamPurpose::kWalk);

  RegressorPipeline pipeline(cfg.filter_mode, v, m,
                             sc.shift.has_value() ? &*sc.shift : nullptr);

  std::vector<double> w_o = sc.w_o_base;
  const double sigma_q_sq =
      cfg.trajectory.kind == TrajectorySpec::Kind::kRandomWalk
          ? cfg.trajectory.trace_q / static_cast<double>(m)
          : 0.0;

  std::vector<double> u(v), d(v), x(static_cast<std::size_t>(v) * m);

  RealizationResult out;
  out.series.resize(cfg.iterations);
  for (long n = 0; n < cfg.iterations; ++n) {
    switch (cfg.trajectory.kind) {
      case TrajectorySpec::Kind::kStatic:
        break;
      case TrajectorySpec::Kind::kFlip:
        if (n == cfg.trajectory.flip_iteration) abrupt_flip(w_o);
        break;
      case TrajectorySpec::Kind::kRandomWalk:
        if (n > 0) random_walk_update(w_o, sigma_q_sq, walk_stream);
        break;
    }

    for (int k = 0; k < v; ++k) u[k] = input_streams[k].gaussian();
    pipeline.step(u, x);
    for (int k = 0; k < v; ++k) {
      std::span<const double> xk(x.data() + static_cast<std::size_t>(k) * m,
                                 static_cast<std::size_t>(m));
      d[k] = desired_signal(xk, w_o, sc.noise.sigma_v_sq[k], noise_streams[k]);
    }

    IterationStats stats = engine.iterate(x, d);

    IterationRecord& rec = out.series[n];
    rec.nmsd = nmsd(engine.w_all(), w_o);
    rec.nmse = nmse(engine.shadow_errors());
    rec.v_s = stats.v_s;
    rec.v_t = stats.v_t;
    rec.mults = static_cast<double>(stats.ops.mults);
    rec.sums = static_cast<double>(stats.ops.sums);
    rec.divs = static_cast<double>(stats.ops.divs);
    rec.comparisons = static_cast<double>(stats.ops.comparisons);
    if (!rec.finite()) {
      out.diverged = true;
      out.diverged_at = n;
      out.series.resize(n);
      return out;
    }
    if (hook) (*hook)(n, engine, rec);
  }
  return out;
}

struct AlgorithmSummary {
  std::string name;
  AlgorithmKind kind;
  std::vector<IterationRecord> mean_series;
  IterationRecord steady;
  int realizations_used = 0;
  std::vector<int> diverged_realizations;
};

inline int configured_thread_count() {
  if (const char* env = std::getenv("DIFFNET_THREADS")) {
    int t = std::atoi(env);
    if (t >= 1) return t;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Monte-Carlo over realizations, parallel up to the configured thread
/// count. Results are reduced in realization order, so the averaged series
/// is independent of scheduling.
inline AlgorithmSummary run_algorithm(const CompiledScenario& sc, int algo_index,
                                      int thread_cap = 0) {
  const ScenarioConfig& cfg = sc.config;
  const int r_total = cfg.realizations;
  int threads = thread_cap > 0 ? thread_cap : configured_thread_count();
  threads = std::max(1, std::min(threads, r_total));

  std::vector<RealizationResult> results(r_total);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int r = next.fetch_add(1);
      if (r >= r_total) return;
      results[r] = run_realization(sc, algo_index, r);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  AlgorithmSummary summary;
  summary.name = sc.algorithms[algo_index].spec.name;
  summary.kind = sc.algorithms[algo_index].spec.kind;
  summary.mean_series.assign(cfg.iterations, {});
  for (int r = 0; r < r_total; ++r) {
    if (results[r].diverged) {
      summary.diverged_realizations.push_back(r);
      continue;
    }
    for (long n = 0; n < cfg.iterations; ++n) summary.mean_series[n] += results[r].series[n];
    ++summary.realizations_used;
  }
  if (summary.realizations_used == 0)
    throw std::runtime_error("run_algorithm: every realization diverged for " + summary.name);
  for (auto& rec : summary.mean_series) rec /= static_cast<double>(summary.realizations_used);
  int window = std::min<long>(cfg.metrics.steady_window, cfg.iterations);
  summary.steady = steady_state_summary(summary.mean_series, window);
  return summary;
}

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

}  // namespace detail

inline void write_series_csv(const std::string& path, const AlgorithmSummary& s, int ma_window) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::size_t n_total = s.mean_series.size();
  std::vector<double> nmsd_lin(n_total), nmse_lin(n_total), vs_raw(n_total);
  for (std::size_t n = 0; n < n_total; ++n) {
    nmsd_lin[n] = s.mean_series[n].nmsd;
    nmse_lin[n] = s.mean_series[n].nmse;
    vs_raw[n] = s.mean_series[n].v_s;
  }
  auto nmsd_ma = moving_average(nmsd_lin, ma_window);
  auto nmse_ma = moving_average(nmse_lin, ma_window);
  auto vs_ma = moving_average(vs_raw, ma_window);

  out << "n,nmsd_db,nmse_db,v_s,v_t,mults,sums,divs,comparisons,"
         "nmsd_db_ma,nmse_db_ma,v_s_ma\n";
  for (std::size_t n = 0; n < n_total; ++n) {
    const IterationRecord& r = s.mean_series[n];
    out << n << ',' << detail::format_double(to_db(r.nmsd)) << ','
        << detail::format_double(to_db(r.nmse)) << ',' << detail::format_double(r.v_s) << ','
        << detail::format_double(r.v_t) << ',' << detail::format_double(r.mults) << ','
        << detail::format_double(r.sums) << ',' << detail::format_double(r.divs) << ','
        << detail::format_double(r.comparisons) << ','
        << detail::format_double(to_db(nmsd_ma[n])) << ','
        << detail::format_double(to_db(nmse_ma[n])) << ','
        << detail::format_double(vs_ma[n]) << '\n';
  }
}

inline nlohmann::json theory_report_json(const CompiledScenario& sc, int algo_index) {
  const auto& resolved = sc.algorithms[algo_index];
  const double beta = resolved.engine.beta;
  const double s_min = sc.noise.min_sq(), s_max = sc.noise.max_sq();
  const int v = sc.topology.node_count();

  nlohmann::json j;
  j["algorithm"] = resolved.spec.name;
  j["beta"] = beta;
  BetaConditions bc = beta_conditions(s_min, s_max);
  j["beta_necessary_threshold"] = bc.necessary;
  j["beta_sufficient_threshold"] = bc.sufficient;
  j["beta_necessary_satisfied"] = beta > bc.necessary;
  j["beta_sufficient_satisfied"] = beta > bc.sufficient;
  DutyCycleBounds db = duty_cycle_bounds(beta, s_min, s_max);
  j["theta_max"] = db.theta_max;
  j["theta_min"] = db.theta_min;
  j["theta_bar_max"] = db.theta_bar_max;
  j["theta_bar_min"] = db.theta_bar_min;
  j["p_hat_min"] = db.p_hat_min;
  j["p_hat_max"] = db.p_hat_max;
  SampledBounds sb = expected_sampled_bounds(v, beta, s_min, s_max);
  j["sampled_nodes_lower"] = sb.lower;
  j["sampled_nodes_upper"] = sb.upper;
  const double delta_n = resolved.spec.mu_s.delta_n;
  if (beta > s_max) {
    j["mu_s_min"] = min_step_size_mu_s(sc.config.alpha_plus, beta, s_max, delta_n);
    j["mu_s_min_delta_n"] = delta_n;
  }
  CostAdvantage ca = cost_advantage_conditions(v, sc.config.order,
                                               sc.topology.neighborhood_mass(), s_max);
  j["cost_m_min"] = ca.m_min;
  j["cost_feasible"] = ca.feasible;
  if (ca.feasible) {
    j["cost_beta_threshold"] = ca.beta_threshold;
    j["cost_beta_satisfied"] = beta > ca.beta_threshold;
  }
  return j;
}

struct RunOptions {
  std::string out_dir;  // empty: no files written
  int thread_cap = 0;
};

struct ScenarioResult {
  std::vector<AlgorithmSummary> algorithms;
  nlohmann::json summary;
};

inline ScenarioResult run_scenario(const CompiledScenario& sc, const RunOptions& opt = {}) {
  const ScenarioConfig& cfg = sc.config;
  ScenarioResult result;
  nlohmann::json& summary = result.summary;
  summary["scenario"] = cfg.name;
  summary["V"] = sc.topology.node_count();
  summary["order"] = cfg.order;
  summary["filter_mode"] = cfg.filter_mode == FilterMode::kGraph ? "graph" : "classical";
  summary["iterations"] = cfg.iterations;
  summary["realizations"] = cfg.realizations;
  summary["seed"] = cfg.seed;
  summary["sigma_min_sq"] = sc.noise.min_sq();
  summary["sigma_max_sq"] = sc.noise.max_sq();
  summary["noise_mean_sq"] = sc.noise.mean_sq();
  summary["neighborhood_mass"] = sc.topology.neighborhood_mass();
  summary["algorithms"] = nlohmann::json::array();

  const bool write = !opt.out_dir.empty();
  std::filesystem::path dir;
  if (write) {
    dir = std::filesystem::path(opt.out_dir) / cfg.name;
    std::filesystem::create_directories(dir);
    sc.topology.save((dir / "topology.json").string());
  }

  for (int a = 0; a < static_cast<int>(sc.algorithms.size()); ++a) {
    AlgorithmSummary s = run_algorithm(sc, a, opt.thread_cap);
    nlohmann::json aj;
    aj["name"] = s.name;
    aj["realizations_used"] = s.realizations_used;
    if (!s.diverged_realizations.empty()) aj["diverged_realizations"] = s.diverged_realizations;
    aj["steady_state"] = {{"nmsd", s.steady.nmsd},
                          {"nmsd_db", to_db(s.steady.nmsd)},
                          {"nmse", s.steady.nmse},
                          {"nmse_db", to_db(s.steady.nmse)},
                          {"v_s", s.steady.v_s},
                          {"v_t", s.steady.v_t},
                          {"mults", s.steady.mults},
                          {"sums", s.steady.sums},
                          {"divs", s.steady.divs},
                          {"comparisons", s.steady.comparisons}};
    if (uses_sampling_controller(s.kind)) {
      nlohmann::json tj = theory_report_json(sc, a);
      tj["measured_v_s_steady"] = s.steady.v_s;
      tj["measured_within_bounds"] = s.steady.v_s >= tj["sampled_nodes_lower"].get<double>() &&
                                     s.steady.v_s <= tj["sampled_nodes_upper"].get<double>();
      aj["theory"] = std::move(tj);
    }
    if (write) {
      write_series_csv((dir / (s.name + ".csv")).string(), s, cfg.metrics.ma_window);
      aj["series_csv"] = s.name + ".csv";  // relative to the summary's directory
    }
    summary["algorithms"].push_back(std::move(aj));
    result.algorithms.push_back(std::move(s));
  }

  if (write) {
    std::ofstream out(dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  return result;
}

inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
  CompiledScenario sc = compile_scenario(cfg);
  return run_scenario(sc, opt);
}

enum class SweepParameter { kBetaR, kMuS, kSampledNodes, kTraceQ };

inline SweepParameter parse_sweep_parameter(const std::string& s) {
  if (s == "beta_r") return SweepParameter::kBetaR;
  if (s == "mu_s") return SweepParameter::kMuS;
  if (s == "v_s") return SweepParameter::kSampledNodes;
  if (s == "trq") return SweepParameter::kTraceQ;
  throw std::invalid_argument("sweep: parameter must be one of beta_r | mu_s | v_s | trq");
}

inline ScenarioConfig apply_sweep_value(ScenarioConfig cfg, SweepParameter param, double value) {
  switch (param) {
    case SweepParameter::kBetaR:
      for (auto& a : cfg.algorithms) {
        if (uses_sampling_controller(a.kind)) {
          a.beta_relative = true;
          a.beta = value;
        }
      }
      break;
    case SweepParameter::kMuS:
      for (auto& a : cfg.algorithms) {
        if (uses_sampling_controller(a.kind)) {
          a.mu_s.from_theory = false;
          a.mu_s.value = value;
        }
      }
      break;
    case SweepParameter::kSampledNodes:
      for (auto& a : cfg.algorithms) {
        if (a.kind == AlgorithmKind::kDnlmsRandom)
          a.sampled_nodes = static_cast<int>(std::lround(value));
      }
      break;
    case SweepParameter::kTraceQ:
      cfg.trajectory.kind = TrajectorySpec::Kind::kRandomWalk;
      cfg.trajectory.trace_q = value;
      break;
  }
  return cfg;
}

struct SweepResult {
  // one scenario result per value, in order
  std::vector<double> values;
  std::vector<ScenarioResult> runs;
  std::string table_csv;
};

inline std::string sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::kBetaR: return "beta_r";
    case SweepParameter::kMuS: return "mu_s";
    case SweepParameter::kSampledNodes: return "v_s";
    case SweepParameter::kTraceQ: return "trq";
  }
  return "?";
}

inline SweepResult sweep(const ScenarioConfig& base, SweepParameter param,
                         const std::vector<double>& values, const RunOptions& opt = {}) {
  if (values.empty()) throw std::invalid_argument("sweep: empty value list");
  SweepResult out;
  out.values = values;

  const std::string pname = sweep_parameter_name(param);
  for (double value : values) {
    ScenarioConfig cfg = apply_sweep_value(base, param, value);
    cfg.name = base.name + "/" + pname + "=" + detail::format_double(value);
    RunOptions sub = opt;
    out.runs.push_back(run_scenario(cfg, sub));
  }

  if (!opt.out_dir.empty()) {
    std::filesystem::path dir = std::filesystem::path(opt.out_dir) / base.name;
    std::filesystem::create_directories(dir);
    std::string path = (dir / ("sweep_" + pname + ".csv")).string();
    std::ofstream t(path);
    if (!t) throw std::runtime_error("cannot write " + path);
    t << pname
      << ",algorithm,nmsd_ss_db,nmse_ss_db,v_s_ss,v_t_ss,mults_ss,vs_bound_lower,vs_bound_upper\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto& run = out.runs[i];
      for (const auto& aj : run.summary["algorithms"]) {
        t << detail::format_double(values[i]) << ',' << aj["name"].get<std::string>() << ','
          << detail::format_double(aj["steady_state"]["nmsd_db"].get<double>()) << ','
          << detail::format_double(aj["steady_state"]["nmse_db"].get<double>()) << ','
          << detail::format_double(aj["steady_state"]["v_s"].get<double>()) << ','
          << detail::format_double(aj["steady_state"]["v_t"].get<double>()) << ','
          << detail::format_double(aj["steady_state"]["mults"].get<double>()) << ',';
        if (aj.contains("theory")) {
          t << detail::format_double(aj["theory"]["sampled_nodes_lower"].get<double>()) << ','
            << detail::format_double(aj["theory"]["sampled_nodes_upper"].get<double>());
        } else {
          t << ',';
        }
        t << '\n';
      }
    }
    out.table_csv = path;
  }
  return out;
}

}  // namespace diffnet
