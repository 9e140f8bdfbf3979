#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "specclip/harness.hpp"

namespace specclip {

namespace {

std::string num_label(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

// Desk-budget controller for the initialization sweep: a short probe
// period, lighter smoothing and a stronger gain let the loop move the
// threshold within a short run, and the narrow clamp pins every
// trajectory into the same operating band regardless of where it starts.
ControllerConfig desk_sweep_controller() {
  ControllerConfig cc;
  cc.probe_period = 10;
  cc.beta = 0.9;
  cc.kappa = 0.3;
  cc.c_min = 1.0;
  cc.c_max = 3.0;
  cc.clamp_enabled = true;
  return cc;
}

}  // namespace

std::optional<PresetName> preset_from_string(const std::string& name) {
  static const std::map<std::string, PresetName> table = {
      {"fixed_c_sweep", PresetName::fixed_c_sweep},
      {"c0_sweep", PresetName::c0_sweep},
      {"beta_ablation", PresetName::beta_ablation},
      {"zone_ablation", PresetName::zone_ablation},
      {"probe_period_ablation", PresetName::probe_period_ablation},
      {"component_ablation", PresetName::component_ablation},
      {"dirichlet_robustness", PresetName::dirichlet_robustness},
      {"runtime_overhead", PresetName::runtime_overhead},
  };
  const auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> preset_names() {
  return {"fixed_c_sweep",      "c0_sweep",           "beta_ablation",
          "zone_ablation",      "probe_period_ablation", "component_ablation",
          "dirichlet_robustness", "runtime_overhead"};
}

std::vector<PresetRun> expand_preset(PresetName preset, const FullConfig& base) {
  const std::vector<double> c_grid = {0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<PresetRun> runs;
  auto add = [&](TrainConfig cfg, const std::string& label) {
    cfg.label = label;
    runs.push_back(PresetRun{std::move(cfg), base.dataset});
  };

  switch (preset) {
    case PresetName::fixed_c_sweep:
      for (double c : c_grid) {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = false;
        cfg.c0 = c;
        add(cfg, "fixed_c_" + num_label(c));
      }
      break;

    case PresetName::c0_sweep:
      for (double c : c_grid) {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = true;
        cfg.controller = desk_sweep_controller();
        cfg.c0 = c;
        add(cfg, "ww_c0_" + num_label(c));
      }
      break;

    case PresetName::beta_ablation:
      for (double beta : {0.0, 0.9, 0.95, 0.98, 0.99}) {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = true;
        cfg.controller.beta = beta;
        add(cfg, "beta_" + num_label(beta));
      }
      break;

    case PresetName::zone_ablation:
      for (double zeta_star : {3.0, 4.0, 5.0}) {
        for (double r : {1.0, 2.0, 3.0}) {
          TrainConfig cfg = base.train;
          cfg.controller_enabled = true;
          cfg.controller.zeta_star = zeta_star;
          cfg.controller.r = r;
          add(cfg, "zone_" + num_label(zeta_star) + "_" + num_label(r));
        }
      }
      break;

    case PresetName::probe_period_ablation:
      for (std::size_t k : {std::size_t{10}, std::size_t{25}, std::size_t{50}, std::size_t{100}}) {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = true;
        cfg.controller.probe_period = k;
        add(cfg, "probe_period_" + std::to_string(k));
      }
      break;

    case PresetName::component_ablation: {
      {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = false;
        add(cfg, "fixed_c");
      }
      {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = true;
        add(cfg, "full");
      }
      {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = true;
        cfg.controller.beta = 0.0;
        add(cfg, "no_ema");
      }
      for (std::size_t k : {std::size_t{25}, std::size_t{100}}) {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = true;
        cfg.controller.probe_period = k;
        add(cfg, "probe_period_" + std::to_string(k));
      }
      {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = true;
        cfg.probe = ProbeSpec{{"fc1"}};
        add(cfg, "probe_fc1");
      }
      for (double kappa : {0.05, 0.30}) {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = true;
        cfg.controller.kappa = kappa;
        add(cfg, "kappa_" + num_label(kappa));
      }
      {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = true;
        cfg.controller.clamp_enabled = false;
        add(cfg, "no_clamp");
      }
      {
        TrainConfig cfg = base.train;
        cfg.controller_enabled = true;
        cfg.controller.c_min = 1.0;
        cfg.controller.c_max = 3.0;
        add(cfg, "clamp_1_3");
      }
      break;
    }

    case PresetName::dirichlet_robustness: {
      std::size_t i = 0;
      for (double alpha : {1.0, 0.5, 0.3, 0.1}) {
        for (bool ww : {false, true}) {
          TrainConfig cfg = base.train;
          cfg.controller_enabled = ww;
          DatasetSpec data = base.dataset;
          data.skew = SkewSpec{alpha, base.train.seeds.data + 100 + i};
          cfg.label = std::string(ww ? "ww" : "fixed_c") + "_alpha_" + num_label(alpha);
          runs.push_back(PresetRun{std::move(cfg), std::move(data)});
        }
        ++i;
      }
      break;
    }

    case PresetName::runtime_overhead: {
      TrainConfig fixed = base.train;
      fixed.controller_enabled = false;
      add(fixed, "fixed_c_baseline");
      TrainConfig ww = base.train;
      ww.controller_enabled = true;
      ww.controller.probe_period = 50;
      add(ww, "ww_k50");
      break;
    }
  }
  return runs;
}

SweepResult run_preset(PresetName preset, const FullConfig& base, std::size_t repeats,
                       const std::string& out_dir) {
  const std::vector<PresetRun> plan = expand_preset(preset, base);
  std::map<std::string, DatasetSpec> data_by_label;
  std::vector<TrainConfig> cfgs;
  cfgs.reserve(plan.size());
  for (const PresetRun& r : plan) {
    data_by_label[r.cfg.label] = r.dataset;
    cfgs.push_back(r.cfg);
  }

  const DataProvider provider = [&data_by_label](const TrainConfig& cfg, std::size_t repeat) {
    DatasetSpec spec = data_by_label.at(cfg.label);
    if (spec.skew) spec.skew->seed += repeat;
    return load_dataset(spec, cfg.seeds.data);
  };

  SweepResult result = sweep(cfgs, repeats, provider, /*matched_privacy=*/true);

  std::filesystem::create_directories(out_dir);
  for (const RunSummary& run : result.runs) {
    const std::string stem = out_dir + "/" + run.label + "__seed" + std::to_string(run.repeat);
    write_run_csv(run.log, stem + ".csv");
    write_run_sidecar_json(run.log, stem + ".json");
  }

  std::ostringstream agg;
  agg << "label,epsilon,acc_mean,acc_std,single_sample,c_median_mean,c_final_mean,"
         "clamp_min_total,clamp_max_total,aborted_runs\n";
  for (const SweepRow& row : result.rows) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%llu,%llu,%zu\n",
                  row.label.c_str(), row.epsilon, row.acc_mean, row.acc_std,
                  row.single_sample ? 1 : 0, row.c_median_mean, row.c_final_mean,
                  static_cast<unsigned long long>(row.clamp_min_total),
                  static_cast<unsigned long long>(row.clamp_max_total), row.aborted_runs);
    agg << buf;
  }
  {
    std::ofstream out(out_dir + "/aggregate.csv", std::ios::trunc);
    out << agg.str();
  }

  nlohmann::json summary;
  summary["repeats"] = repeats;
  summary["rows"] = nlohmann::json::array();
  for (const SweepRow& row : result.rows) {
    summary["rows"].push_back({{"label", row.label},
                               {"epsilon", row.epsilon},
                               {"acc_mean", row.acc_mean},
                               {"acc_std", row.acc_std},
                               {"single_sample", row.single_sample},
                               {"c_median_mean", row.c_median_mean},
                               {"c_final_mean", row.c_final_mean},
                               {"clamp_min_total", row.clamp_min_total},
                               {"clamp_max_total", row.clamp_max_total},
                               {"aborted_runs", row.aborted_runs}});
  }
  if (preset == PresetName::runtime_overhead && result.runs.size() >= 2) {
    const RunLog* baseline = nullptr;
    const RunLog* ww = nullptr;
    for (const RunSummary& run : result.runs) {
      if (run.label == "fixed_c_baseline" && run.repeat == 0) baseline = &run.log;
      if (run.label == "ww_k50" && run.repeat == 0) ww = &run.log;
    }
    if (baseline && ww) {
      const TimingReport rep = timing_report(*ww, baseline);
      summary["timing"] = {{"probe_share_pct", rep.probe_share_pct},
                           {"overhead_pct", rep.overhead_pct ? *rep.overhead_pct : 0.0},
                           {"ww_total_s", rep.total_s},
                           {"baseline_total_s",
                            baseline->timings.train_s + baseline->timings.eval_s}};
    }
  }
  {
    std::ofstream out(out_dir + "/summary.json", std::ios::trunc);
    out << summary.dump(2) << "\n";
  }
  return result;
}

}  // namespace specclip
