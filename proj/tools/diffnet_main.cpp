#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diffnet/diffnet.hpp"

namespace {

diffnet::ScenarioConfig load_with_overrides(const std::string& config_path, int realizations,
                                            long iterations, long long seed) {
  diffnet::ScenarioConfig cfg = diffnet::load_scenario(config_path);
  if (realizations > 0) cfg.realizations = realizations;
  if (iterations > 0) cfg.iterations = iterations;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  return cfg;
}

void print_algorithm_lines(const nlohmann::json& summary) {
  for (const auto& aj : summary["algorithms"]) {
    std::printf("  %-12s nmsd_ss %8.2f dB   nmse_ss %8.2f dB   v_s %6.2f   v_t %6.2f\n",
                aj["name"].get<std::string>().c_str(),
                aj["steady_state"]["nmsd_db"].get<double>(),
                aj["steady_state"]["nmse_db"].get<double>(),
                aj["steady_state"]["v_s"].get<double>(),
                aj["steady_state"]["v_t"].get<double>());
    if (aj.contains("theory")) {
      const auto& t = aj["theory"];
      std::printf("  %-12s bounds [%.2f, %.2f]  within: %s\n", "",
                  t["sampled_nodes_lower"].get<double>(),
                  t["sampled_nodes_upper"].get<double>(),
                  t["measured_within_bounds"].get<bool>() ? "yes" : "no");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-sampling diffusion NLMS network simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  int realizations = 0;
  long iterations = 0;
  long long seed = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "scenario config JSON")->required();
    cmd->add_option("--out", out_dir, "output directory (default: out)");
    cmd->add_option("--realizations", realizations, "override realization count");
    cmd->add_option("--iterations", iterations, "override iteration count");
    cmd->add_option("--seed", seed, "override master seed");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run one scenario and write CSV/JSON");
  add_common(simulate);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a scenario over a parameter grid");
  add_common(sweep_cmd);
  std::string param;
  std::vector<double> values;
  sweep_cmd->add_option("--param", param, "one of beta_r | mu_s | v_s | trq")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values")
      ->required()
      ->delimiter(',');

  CLI::App* theory_cmd =
      app.add_subcommand("theory", "print the closed-form predictions for a scenario");
  theory_cmd->add_option("config", config_path, "scenario config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      auto cfg = load_with_overrides(config_path, realizations, iterations, seed);
      diffnet::RunOptions opt;
      opt.out_dir = out_dir;
      auto res = diffnet::run_scenario(cfg, opt);
      std::printf("scenario %s: %d realizations x %ld iterations\n", cfg.name.c_str(),
                  cfg.realizations, cfg.iterations);
      print_algorithm_lines(res.summary);
      std::printf("artifacts under %s/%s\n", out_dir.c_str(), cfg.name.c_str());
    } else if (sweep_cmd->parsed()) {
      auto cfg = load_with_overrides(config_path, realizations, iterations, seed);
      diffnet::RunOptions opt;
      opt.out_dir = out_dir;
      auto p = diffnet::parse_sweep_parameter(param);
      auto res = diffnet::sweep(cfg, p, values, opt);
      for (std::size_t i = 0; i < res.values.size(); ++i) {
        std::printf("%s = %g\n", param.c_str(), res.values[i]);
        print_algorithm_lines(res.runs[i].summary);
      }
      if (!res.table_csv.empty()) std::printf("sweep table: %s\n", res.table_csv.c_str());
    } else if (theory_cmd->parsed()) {
      auto cfg = diffnet::load_scenario(config_path);
      auto sc = diffnet::compile_scenario(cfg);
      nlohmann::json out;
      out["scenario"] = cfg.name;
      out["sigma_min_sq"] = sc.noise.min_sq();
      out["sigma_max_sq"] = sc.noise.max_sq();
      out["neighborhood_mass"] = sc.topology.neighborhood_mass();
      out["reports"] = nlohmann::json::array();
      for (int a = 0; a < static_cast<int>(sc.algorithms.size()); ++a) {
        if (diffnet::uses_sampling_controller(sc.algorithms[a].spec.kind))
          out["reports"].push_back(diffnet::theory_report_json(sc, a));
      }
      std::cout << out.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
