#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

namespace benford::cli {

namespace {

std::size_t replicate_count(double b) {
  if (!(b >= 0.0) || b != std::floor(b) || b > 1e12) {
    throw UsageError("--B must be a non-negative integer");
  }
  return static_cast<std::size_t>(b);
}

std::vector<Statistic> parse_stats(const std::vector<std::string>& names) {
  std::vector<Statistic> out;
  for (const auto& n : names) {
    try {
      out.push_back(statistic_from_string(n));
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tests of the Benford hypothesis on significand data"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::vector<std::string> stat_names;
  double b_flag = 1e5;
  double gamma = 0.01;
  std::uint64_t seed = 0;
  std::string null_name = "auto";
  std::string jitter = "off";
  std::string cache_dir;
  unsigned workers = 0;

  auto add_common = [&](CLI::App* sub, bool with_null) {
    sub->add_option("--B", b_flag, "Monte Carlo replicates (0: asymptotic)")->capture_default_str();
    sub->add_option("--seed", seed, "64-bit random seed")->required();
    sub->add_option("--workers", workers, "worker threads (0: all cores)");
    if (with_null) {
      sub->add_option("--null", null_name, "null model")
          ->check(CLI::IsMember({"auto", "plain", "truncated", "rounded"}))
          ->capture_default_str();
    }
  };

  // test
  TestArgs test;
  auto* test_cmd = app.add_subcommand("test", "test one significand file");
  test_cmd->add_option("input", test.input, "file with one value per line")->required();
  test_cmd->add_option("--stat", stat_names, "statistic (repeatable; default all)");
  test_cmd->add_option("--gamma", gamma, "nominal size")->capture_default_str();
  add_common(test_cmd, true);
  test_cmd->add_option("--jitter", jitter, "spread discretized values over their digit cell")
      ->check(CLI::IsMember({"off", "on"}))
      ->capture_default_str();
  test_cmd->add_option("--cache-dir", cache_dir, "directory for cached null replicates");
  test_cmd->add_option("--json", test.json_path, "write the JSON report here ('-' for stdout)");
  test_cmd->add_flag("--independent-pool", test.options.independent_pool,
                     "evaluate combined tests on a second replicate pool");

  // nulltab
  NulltabArgs tab;
  std::vector<std::size_t> ns;
  std::vector<double> gammas;
  auto* tab_cmd = app.add_subcommand("nulltab", "table of null quantiles");
  tab_cmd->add_option("--stat", stat_names, "statistic (repeatable)")->required();
  tab_cmd->add_option("--n", ns, "sample sizes")->required();
  tab_cmd->add_option("--gamma", gammas, "nominal sizes")->required();
  add_common(tab_cmd, false);
  tab_cmd->add_option("--cache-dir", cache_dir, "directory for cached null replicates");

  // simulate
  SimulateArgs sim;
  std::string model_text = "benford";
  std::string out_path;
  std::string mode_name = "truncate";
  int digits = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "write simulated significands");
  sim_cmd->add_option("--model", model_text,
                      "benford | manipulated:<family>:<alpha> | mixture:<lambda>:<family>:<alpha>")
      ->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "number of values")->required();
  sim_cmd->add_option("--seed", seed, "64-bit random seed")->required();
  sim_cmd->add_option("--digits", digits, "discretize to this many significant digits");
  sim_cmd->add_option("--mode", mode_name, "discretization")
      ->check(CLI::IsMember({"truncate", "round"}))
      ->capture_default_str();
  sim_cmd->add_option("--out", out_path, "output file (default stdout)");

  // qq
  QqArgs qq;
  auto* qq_cmd = app.add_subcommand("qq", "QQ pairs of fractional significands");
  qq_cmd->add_option("input", qq.input, "file with one value per line")->required();
  add_common(qq_cmd, true);

  // density
  DensityArgs dens;
  auto* dens_cmd = app.add_subcommand("density", "grid of the limit density of (Q1, Q2)");
  dens_cmd->add_option("--x1-max", dens.x1_max)->capture_default_str();
  dens_cmd->add_option("--x2-max", dens.x2_max)->capture_default_str();
  dens_cmd->add_option("--steps", dens.steps)->capture_default_str();

  // power
  PowerArgs power;
  auto* power_cmd = app.add_subcommand("power", "power or size study from a JSON config");
  power_cmd->add_option("config", power.config_path, "study configuration")->required();
  power_cmd->add_option("--csv", power.csv_path, "CSV output (default stdout)");
  power_cmd->add_option("--json", power.json_path, "JSON report");
  power_cmd->add_flag("--full-scale", power.full_scale, "5000 runs and B = 10^6");
  power_cmd->add_option("--workers", workers, "worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (test_cmd->parsed()) {
      test.stats = parse_stats(stat_names);
      test.options.B = replicate_count(b_flag);
      test.options.gamma = gamma;
      test.options.seed = seed;
      test.options.null = null_choice_from_string(null_name);
      test.options.jitter = jitter == "on";
      test.options.engine.workers = workers;
      test.cache_dir = cache_dir;
      return cmd_test(test, out);
    }
    if (tab_cmd->parsed()) {
      tab.stats = parse_stats(stat_names);
      tab.ns = ns;
      tab.gammas = gammas;
      tab.B = replicate_count(b_flag);
      tab.seed = seed;
      tab.cache_dir = cache_dir;
      tab.engine.workers = workers;
      return cmd_nulltab(tab, out);
    }
    if (sim_cmd->parsed()) {
      sim.model = DataModel::parse(model_text);
      sim.seed = seed;
      if (digits != 0) sim.digits = digits;
      sim.mode = mode_name == "round" ? DiscretizeMode::round : DiscretizeMode::truncate;
      if (out_path.empty()) return cmd_simulate(sim, out);
      std::ofstream f(out_path);
      if (!f) throw Error("cannot write '" + out_path + "'");
      return cmd_simulate(sim, f);
    }
    if (qq_cmd->parsed()) {
      qq.B = replicate_count(b_flag);
      qq.seed = seed;
      qq.null = null_choice_from_string(null_name);
      qq.engine.workers = workers;
      return cmd_qq(qq, out);
    }
    if (dens_cmd->parsed()) return cmd_density(dens, out);
    if (power_cmd->parsed()) {
      if (workers) power.workers = workers;
      return cmd_power(power, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const EmptySampleError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const ZeroOrNonFiniteError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const ModelError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const BudgetError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace benford::cli
