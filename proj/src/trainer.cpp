#include "specclip/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <cmath>
#include <thread>

#include "specclip/accountant.hpp"
#include "specclip/parallel.hpp"

namespace specclip {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Batch gather(const Batch& data, const std::vector<std::size_t>& idx) {
  Batch b;
  b.input_dim = data.input_dim;
  b.inputs.reserve(idx.size() * data.input_dim);
  b.labels.reserve(idx.size());
  for (std::size_t i : idx) b.push_example(data.example(i), data.labels[i]);
  return b;
}

}  // namespace

double LrSchedule::at(std::size_t t) const {
  if (kind == Kind::constant || every == 0) return base;
  const std::size_t drops = t / every;
  return base * std::pow(decay, static_cast<double>(drops));
}

void LrSchedule::validate() const {
  if (!(base > 0.0)) throw ConfigError("lr: base rate must be positive");
  if (kind == Kind::step_decay) {
    if (every == 0) throw ConfigError("lr: step_decay needs a positive period");
    if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("lr: decay must be in (0,1]");
  }
}

void TrainConfig::validate() const {
  privacy.validate();
  controller.validate();
  lr.validate();
  model.validate();
  if (!(c0 > 0.0)) throw ConfigError("c0 must be positive");
  if (probe.layer_refs.empty()) throw ConfigError("probe set must not be empty");
  const std::size_t n_layers = model.layer_sizes.size() - 1;
  for (const std::string& ref : probe.layer_refs) {
    if (ref.size() <= 2 || ref.compare(0, 2, "fc") != 0) {
      throw ConfigError("unknown probe layer ref '" + ref + "'");
    }
    std::size_t idx = 0;
    try {
      idx = std::stoul(ref.substr(2));
    } catch (const std::exception&) {
      throw ConfigError("unknown probe layer ref '" + ref + "'");
    }
    if (idx < 1 || idx > n_layers) throw ConfigError("probe layer ref '" + ref + "' out of range");
  }
  if (tail_rule) tail_rule->validate();
}

double RunLog::c_median() const {
  if (steps.empty()) return 0.0;
  Vec cs;
  cs.reserve(steps.size());
  for (const StepRecord& r : steps) cs.push_back(r.c);
  std::sort(cs.begin(), cs.end());
  const std::size_t n = cs.size();
  return n % 2 == 1 ? cs[n / 2] : 0.5 * (cs[n / 2 - 1] + cs[n / 2]);
}

std::pair<MlpParams, RunLog> train(const TrainConfig& cfg, const Batch& train_data,
                                   const Batch& test_data, const TrainHooks& hooks) {
  cfg.validate();
  if (train_data.size() == 0) throw ConfigError("training set must not be empty");
  if (train_data.input_dim != cfg.model.input_dim()) {
    throw ConfigError("training data dimension does not match the model");
  }
  if (test_data.size() > 0 && test_data.input_dim != cfg.model.input_dim()) {
    throw ConfigError("test data dimension does not match the model");
  }

  RngStream init_rng(cfg.seeds.init, "init");
  RngStream subsample_rng(cfg.seeds.subsample, "subsample");
  RngStream noise_rng(cfg.seeds.noise, "noise");

  MlpParams params = init_params(cfg.model, init_rng);
  ClipControllerState state = init_state(cfg.controller, cfg.c0);

  RunLog log;
  log.q = cfg.privacy.q;
  log.sigma = cfg.privacy.sigma;
  log.delta = cfg.privacy.delta;
  log.total_steps = cfg.privacy.steps;
  log.steps.reserve(cfg.privacy.steps);

  const std::size_t T = cfg.privacy.steps;
  const std::size_t K = cfg.controller.probe_period;
  const double sigma = cfg.privacy.sigma;

  const auto train_start = Clock::now();
  for (std::size_t t = 0; t < T; ++t) {
    StepRecord rec;
    rec.step = t;
    rec.c = state.c;
    rec.zeta_hat = state.zeta_hat;

    const std::vector<std::size_t> idx =
        poisson_subsample(train_data.size(), cfg.privacy.q, subsample_rng);
    rec.batch_size = idx.size();

    if (idx.empty()) {
      // Full carry-over: parameters, threshold and proxy unchanged, no
      // noise drawn, no probe even if this is a probe step.
      rec.skipped = true;
      rec.loss = std::numeric_limits<double>::quiet_NaN();
      log.steps.push_back(rec);
      continue;
    }

    const Batch minibatch = gather(train_data, idx);
    auto [grads, losses] = per_example_grads(params, minibatch);
    double loss_sum = 0.0;
    for (double l : losses) loss_sum += l;
    rec.loss = loss_sum / static_cast<double>(losses.size());

    if (!std::isfinite(rec.loss)) {
      log.steps.push_back(rec);
      log.aborted = true;
      log.abort_reason =
          "non-finite train loss at step " + std::to_string(t) + "; run aborted";
      log.diagnostics.push_back(log.abort_reason);
      break;
    }

    if (hooks.on_mechanism_step) {
      hooks.on_mechanism_step(t, state.c, sigma * state.c, idx.size());
    }
    const NoisyUpdate update = noisy_average(grads, state.c, sigma, noise_rng);
    params = apply_update(params, update.g_tilde, cfg.lr.at(t));

    if (cfg.controller_enabled && (t + 1) % K == 0) {
      const auto probe_start = Clock::now();
      const std::optional<double> zeta = ww_probe(params, cfg.probe, cfg.tail_rule);
      if (zeta) {
        rec.zeta_raw = *zeta;
        const std::uint64_t prev_min = state.clamp_hits_min;
        const std::uint64_t prev_max = state.clamp_hits_max;
        state = control_step(state, *zeta, cfg.controller);
        rec.clamp_min_hit = state.clamp_hits_min > prev_min;
        rec.clamp_max_hit = state.clamp_hits_max > prev_max;
        rec.zeta_hat = state.zeta_hat;
      } else {
        log.diagnostics.push_back("degenerate spectrum at step " + std::to_string(t) +
                                  "; probe skipped, state carried");
      }
      log.timings.probe_s += seconds_since(probe_start);
    }

    log.steps.push_back(rec);
  }
  log.timings.train_s = seconds_since(train_start);

  if (test_data.size() > 0) {
    const auto eval_start = Clock::now();
    const EvalResult ev = evaluate(params, test_data);
    log.timings.eval_s = seconds_since(eval_start);
    log.final_accuracy = ev.accuracy;
    log.final_loss = ev.mean_loss;
  }

  // The accountant sees (q, sigma, T, delta) and nothing else.
  const DpConversion conv = rdp_to_dp(compose(rdp_curve(cfg.privacy.q, cfg.privacy.sigma),
                                              cfg.privacy.steps),
                                      cfg.privacy.delta);
  log.epsilon = conv.epsilon;
  log.best_order = conv.best_order;
  log.final_c = state.c;
  log.noise_draws = noise_rng.draws();
  log.clamp_hits_min = state.clamp_hits_min;
  log.clamp_hits_max = state.clamp_hits_max;
  return {std::move(params), std::move(log)};
}

SweepResult sweep(const std::vector<TrainConfig>& cfgs, std::size_t repeats,
                  const DataProvider& data_for, bool matched_privacy) {
  if (cfgs.empty()) throw ConfigError("sweep: no configs");
  if (repeats == 0) throw ConfigError("sweep: repeats must be positive");
  for (const TrainConfig& cfg : cfgs) cfg.validate();

  if (matched_privacy) {
    const PrivacyParams& ref = cfgs.front().privacy;
    for (const TrainConfig& cfg : cfgs) {
      if (cfg.privacy.q != ref.q || cfg.privacy.sigma != ref.sigma ||
          cfg.privacy.steps != ref.steps || cfg.privacy.delta != ref.delta) {
        throw ConfigError("sweep: matched-privacy block disagrees on (q, sigma, T, delta)");
      }
    }
  }

  const std::size_t n_jobs = cfgs.size() * repeats;
  std::vector<RunSummary> runs(n_jobs);
  std::atomic<std::size_t> next_job{0};

  auto run_job = [&](std::size_t job) {
    const std::size_t ci = job / repeats;
    const std::size_t rep = job % repeats;
    TrainConfig cfg = cfgs[ci];
    cfg.seeds.init += rep;
    cfg.seeds.subsample += rep;
    cfg.seeds.noise += rep;
    cfg.seeds.data += rep;
    const DataSplit data = data_for(cfg, rep);
    auto [params, log] = train(cfg, data.train, data.test);
    (void)params;
    RunSummary& s = runs[job];
    s.label = cfgs[ci].label;
    s.repeat = rep;
    s.accuracy = log.final_accuracy;
    s.loss = log.final_loss;
    s.epsilon = log.epsilon;
    s.c_median = log.c_median();
    s.c_final = log.final_c;
    s.clamp_min = log.clamp_hits_min;
    s.clamp_max = log.clamp_hits_max;
    s.aborted = log.aborted;
    s.log = std::move(log);
  };

  const std::size_t workers = std::min(worker_count(), n_jobs);
  if (workers <= 1) {
    for (std::size_t j = 0; j < n_jobs; ++j) run_job(j);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next_job.fetch_add(1); j < n_jobs; j = next_job.fetch_add(1)) {
          run_job(j);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  SweepResult result;
  result.runs = std::move(runs);
  result.rows.reserve(cfgs.size());
  for (std::size_t ci = 0; ci < cfgs.size(); ++ci) {
    SweepRow row;
    row.label = cfgs[ci].label;
    std::size_t n_ok = 0;
    double acc_sum = 0.0, cm_sum = 0.0, cf_sum = 0.0;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      const RunSummary& s = result.runs[ci * repeats + rep];
      row.epsilon = s.epsilon;
      row.clamp_min_total += s.clamp_min;
      row.clamp_max_total += s.clamp_max;
      if (s.aborted) {
        ++row.aborted_runs;
        continue;
      }
      ++n_ok;
      acc_sum += s.accuracy;
      cm_sum += s.c_median;
      cf_sum += s.c_final;
    }
    if (n_ok > 0) {
      row.acc_mean = acc_sum / static_cast<double>(n_ok);
      row.c_median_mean = cm_sum / static_cast<double>(n_ok);
      row.c_final_mean = cf_sum / static_cast<double>(n_ok);
      if (n_ok == 1) {
        row.single_sample = true;
        row.acc_std = 0.0;
      } else {
        double ss = 0.0;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
          const RunSummary& s = result.runs[ci * repeats + rep];
          if (s.aborted) continue;
          const double d = s.accuracy - row.acc_mean;
          ss += d * d;
        }
        row.acc_std = std::sqrt(ss / static_cast<double>(n_ok - 1));
      }
    }
    result.rows.push_back(row);
  }
  return result;
}

TimingReport timing_report(const RunLog& log, const RunLog* baseline) {
  TimingReport rep;
  rep.train_s = log.timings.train_s;
  rep.eval_s = log.timings.eval_s;
  rep.probe_s = log.timings.probe_s;
  rep.total_s = rep.train_s + rep.eval_s;
  rep.probe_share_pct = rep.train_s > 0.0 ? 100.0 * rep.probe_s / rep.train_s : 0.0;
  if (baseline != nullptr) {
    const double base_total = baseline->timings.train_s + baseline->timings.eval_s;
    if (base_total > 0.0) rep.overhead_pct = 100.0 * (rep.total_s / base_total - 1.0);
  }
  return rep;
}

}  // namespace specclip
