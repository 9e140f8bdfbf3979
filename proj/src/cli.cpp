#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "specclip/accountant.hpp"
#include "specclip/harness.hpp"

namespace specclip {

namespace {

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out_override) {
  FullConfig cfg = config_path.empty() ? default_desk_config() : load_config_file(config_path);
  if (seed) {
    cfg.train.seeds = SeedPack{*seed, *seed, *seed, *seed};  // streams stay independent by label
  }
  const std::string out_dir = out_override.empty() ? cfg.out_dir : out_override;

  const DataSplit data = load_dataset(cfg.dataset, cfg.train.seeds.data);
  auto [params, log] = train(cfg.train, data.train, data.test);
  (void)params;

  std::filesystem::create_directories(out_dir);
  const std::string stem = out_dir + "/" + cfg.train.label;
  write_run_csv(log, stem + ".csv");
  write_run_sidecar_json(log, stem + ".json");

  std::printf("run %s: steps=%zu eps=%.4f (delta=%g) acc=%.4f final_c=%.4f%s\n",
              cfg.train.label.c_str(), log.steps.size(), log.epsilon, log.delta,
              log.final_accuracy, log.final_c, log.aborted ? " [ABORTED]" : "");
  std::printf("wrote %s.csv and %s.json\n", stem.c_str(), stem.c_str());
  return log.aborted ? 2 : 0;
}

int cmd_sweep(const std::string& preset_name, const std::string& config_path, std::size_t repeats,
              const std::string& out_override) {
  const std::optional<PresetName> preset = preset_from_string(preset_name);
  if (!preset) {
    std::cerr << "unknown preset '" << preset_name << "'; available:";
    for (const std::string& n : preset_names()) std::cerr << ' ' << n;
    std::cerr << "\n";
    return 1;
  }
  FullConfig base = config_path.empty() ? default_desk_config() : load_config_file(config_path);
  const std::string out_dir = out_override.empty() ? base.out_dir : out_override;

  const SweepResult result = run_preset(*preset, base, repeats, out_dir);
  std::printf("%-24s %-8s %-18s %-14s %-10s\n", "label", "eps", "acc (mean+/-std)", "median(C)",
              "C_final");
  for (const SweepRow& row : result.rows) {
    std::printf("%-24s %-8.4g %.4f +/- %.4f%s  %-14.4g %-10.4g\n", row.label.c_str(), row.epsilon,
                row.acc_mean, row.acc_std, row.single_sample ? "*" : " ", row.c_median_mean,
                row.c_final_mean);
  }
  std::printf("wrote per-run logs, aggregate.csv and summary.json under %s\n", out_dir.c_str());
  for (const SweepRow& row : result.rows) {
    if (row.aborted_runs > 0) {
      std::cerr << "warning: " << row.aborted_runs << " aborted run(s) in " << row.label << "\n";
      return 2;
    }
  }
  return 0;
}

int cmd_accountant(double q, double sigma, std::size_t steps, double delta,
                   std::optional<double> target_eps) {
  if (target_eps) {
    const double required = sigma_for_epsilon(q, steps, delta, *target_eps);
    const double achieved = epsilon_of(PrivacyParams{q, required, steps, delta});
    std::printf("target eps=%.6g: sigma=%.6g (achieves eps=%.6g at delta=%g)\n", *target_eps,
                required, achieved, delta);
    return 0;
  }
  PrivacyParams p{q, sigma, steps, delta};
  p.validate();
  const RdpCurve composed = compose(rdp_curve(q, sigma), steps);
  const DpConversion conv = rdp_to_dp(composed, delta);
  std::printf("%-8s %-14s %-14s\n", "order", "rdp(T steps)", "eps candidate");
  const double log_inv_delta = std::log(1.0 / delta);
  for (std::size_t i = 0; i < composed.orders.size(); ++i) {
    const double a = composed.orders[i];
    std::printf("%-8g %-14.6g %-14.6g\n", a, composed.values[i],
                composed.values[i] + log_inv_delta / (a - 1.0));
  }
  std::printf("epsilon = %.6f at delta = %g (best order %g)\n", conv.epsilon, delta,
              conv.best_order);
  return 0;
}

int cmd_inspect(const std::string& log_path) {
  const std::vector<StepRecord> steps = read_run_csv(log_path);
  if (steps.empty()) {
    std::cerr << log_path << ": no step records\n";
    return 2;
  }
  Vec cs;
  std::size_t skipped = 0, probes = 0, clamp_min = 0, clamp_max = 0;
  for (const StepRecord& r : steps) {
    cs.push_back(r.c);
    if (r.skipped) ++skipped;
    if (r.zeta_raw) ++probes;
    if (r.clamp_min_hit) ++clamp_min;
    if (r.clamp_max_hit) ++clamp_max;
  }
  std::sort(cs.begin(), cs.end());
  const double c_median =
      cs.size() % 2 == 1 ? cs[cs.size() / 2] : 0.5 * (cs[cs.size() / 2 - 1] + cs[cs.size() / 2]);
  std::printf("%s: %zu steps, %zu skipped, %zu probes, clamp hits %zu/%zu\n", log_path.c_str(),
              steps.size(), skipped, probes, clamp_min, clamp_max);
  std::printf("C: first=%.6g last=%.6g median=%.6g min=%.6g max=%.6g\n", steps.front().c,
              steps.back().c, c_median, cs.front(), cs.back());

  const std::string sidecar = log_path.size() > 4
                                  ? log_path.substr(0, log_path.size() - 4) + ".json"
                                  : log_path + ".json";
  if (std::filesystem::exists(sidecar)) {
    const RunSidecar s = read_run_sidecar_json(sidecar);
    std::printf("eps=%.6f acc=%.4f final_c=%.6g probe_s=%.4f train_s=%.4f%s\n", s.epsilon,
                s.final_accuracy, s.final_c, s.timings.probe_s, s.timings.train_s,
                s.aborted ? " [ABORTED]" : "");
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"spectral-feedback adaptive clipping for differentially private SGD"};
  app.require_subcommand(1);

  std::string config_path, out_dir, preset_name, log_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> target_eps;
  std::size_t repeats = 3;
  double q = 0.0, sigma = 1.0, delta = 1e-5;
  std::size_t steps = 1;

  CLI::App* train_cmd = app.add_subcommand("train", "single run from a JSON config");
  train_cmd->add_option("--config", config_path, "JSON config path");
  train_cmd->add_option("--seed", seed, "override all four seeds");
  train_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run an experiment preset");
  sweep_cmd->add_option("--preset", preset_name, "preset name")->required();
  sweep_cmd->add_option("--config", config_path, "base JSON config path");
  sweep_cmd->add_option("--repeats", repeats, "seeds per config (default 3)");
  sweep_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* acct_cmd = app.add_subcommand("accountant", "(q, sigma, T, delta) -> epsilon");
  acct_cmd->add_option("--q", q, "Poisson sampling rate")->required();
  acct_cmd->add_option("--sigma", sigma, "noise multiplier");
  acct_cmd->add_option("--steps", steps, "total steps T")->required();
  acct_cmd->add_option("--delta", delta, "target delta")->required();
  acct_cmd->add_option("--target-eps", target_eps, "invert: find sigma for this epsilon");

  CLI::App* inspect_cmd = app.add_subcommand("inspect-log", "summarize a run-log CSV");
  inspect_cmd->add_option("--log", log_path, "run CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints usage/help
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(config_path, seed, out_dir);
    if (sweep_cmd->parsed()) return cmd_sweep(preset_name, config_path, repeats, out_dir);
    if (acct_cmd->parsed()) return cmd_accountant(q, sigma, steps, delta, target_eps);
    if (inspect_cmd->parsed()) return cmd_inspect(log_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace specclip
