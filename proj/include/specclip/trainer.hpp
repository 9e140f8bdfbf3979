#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "specclip/controller.hpp"
#include "specclip/dp.hpp"
#include "specclip/model.hpp"
#include "specclip/spectral.hpp"

namespace specclip {

/// Raised for invalid configurations before any training starts.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One 64-bit seed per independent randomness source.
struct SeedPack {
  std::uint64_t init = 1;
  std::uint64_t subsample = 2;
  std::uint64_t noise = 3;
  std::uint64_t data = 4;
};

struct LrSchedule {
  enum class Kind { constant, step_decay };
  Kind kind = Kind::constant;
  double base = 0.5;
  double decay = 1.0;      // factor applied every `every` steps (step_decay)
  std::size_t every = 0;

  double at(std::size_t t) const;
  void validate() const;
};

struct TrainConfig {
  std::string label = "run";
  PrivacyParams privacy;
  ControllerConfig controller;
  bool controller_enabled = true;
  double c0 = 1.0;
  LrSchedule lr;
  MlpConfig model;
  ProbeSpec probe{{"fc2"}};
  std::optional<TailFitRule> tail_rule;  // nullopt: default rule per spectrum
  SeedPack seeds;

  void validate() const;
};

struct StepRecord {
  std::size_t step = 0;
  double c = 0.0;                   // threshold that clipped this step
  std::optional<double> zeta_raw;   // present only when a probe ran here
  double zeta_hat = 0.0;            // smoothed proxy after this step
  std::size_t batch_size = 0;
  double loss = 0.0;                // mean per-example loss; NaN when skipped
  bool skipped = false;
  bool clamp_min_hit = false;
  bool clamp_max_hit = false;
};

struct RunTimings {
  double train_s = 0.0;  // whole step loop, probes included
  double probe_s = 0.0;  // spectral estimation + controller updates
  double eval_s = 0.0;   // final test-set evaluation
};

struct RunLog {
  std::vector<StepRecord> steps;
  RunTimings timings;
  double epsilon = 0.0;
  double best_order = 0.0;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
  double final_c = 0.0;  // controller threshold after the last step
  std::uint64_t noise_draws = 0;
  std::uint64_t clamp_hits_min = 0;
  std::uint64_t clamp_hits_max = 0;
  bool aborted = false;
  std::string abort_reason;
  std::vector<std::string> diagnostics;
  // Mechanism parameters the run was accounted under.
  double q = 0.0;
  double sigma = 0.0;
  double delta = 0.0;
  std::size_t total_steps = 0;

  double c_median() const;
};

/// Instrumentation point: fires once per non-skipped step with the clip
/// threshold and the noise standard deviation the mechanism is about to use.
struct TrainHooks {
  std::function<void(std::size_t step, double clip_threshold, double noise_std,
                     std::size_t batch_size)>
      on_mechanism_step;
};

/// The full closed loop: Poisson subsample, clip at the current threshold,
/// noisy-average with std sigma*C_t, update, and every probe_period steps a
/// spectral probe of the post-update parameters followed by one controller
/// step. Empty minibatches skip everything for that step (parameters,
/// threshold and smoothed proxy carry over; the noise stream is untouched).
/// With the controller disabled the run is plain fixed-threshold DP-SGD at
/// C = c0, bit for bit.
std::pair<MlpParams, RunLog> train(const TrainConfig& cfg, const Batch& train_data,
                                   const Batch& test_data, const TrainHooks& hooks = {});

struct DataSplit {
  Batch train;
  Batch test;
};

struct RunSummary {
  std::string label;
  std::size_t repeat = 0;
  double accuracy = 0.0;
  double loss = 0.0;
  double epsilon = 0.0;
  double c_median = 0.0;
  double c_final = 0.0;
  std::uint64_t clamp_min = 0;
  std::uint64_t clamp_max = 0;
  bool aborted = false;
  RunLog log;
};

struct SweepRow {
  std::string label;
  double epsilon = 0.0;
  double acc_mean = 0.0;
  double acc_std = 0.0;       // sample std; 0 with single_sample set when repeats == 1
  bool single_sample = false;
  double c_median_mean = 0.0;
  double c_final_mean = 0.0;
  std::uint64_t clamp_min_total = 0;
  std::uint64_t clamp_max_total = 0;
  std::size_t aborted_runs = 0;
};

struct SweepResult {
  std::vector<RunSummary> runs;  // cfg-major, repeat-minor order
  std::vector<SweepRow> rows;
};

using DataProvider = std::function<DataSplit(const TrainConfig& cfg, std::size_t repeat)>;

/// Runs each config x repeat (seeds shifted by the repeat index) and
/// aggregates mean +/- sample std of final accuracy plus threshold and clamp
/// statistics. With matched_privacy set, configs disagreeing on
/// (q, sigma, T, delta) raise ConfigError before any run starts. Runs may
/// execute on several worker threads; results are deterministic either way.
SweepResult sweep(const std::vector<TrainConfig>& cfgs, std::size_t repeats,
                  const DataProvider& data_for, bool matched_privacy = true);

struct TimingReport {
  double total_s = 0.0;  // train + eval
  double train_s = 0.0;
  double eval_s = 0.0;
  double probe_s = 0.0;
  double probe_share_pct = 0.0;          // 100 * probe / train
  std::optional<double> overhead_pct;    // 100 * (total/baseline_total - 1)
};

TimingReport timing_report(const RunLog& log, const RunLog* baseline = nullptr);

}  // namespace specclip
