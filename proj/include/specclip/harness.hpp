#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "specclip/trainer.hpp"

namespace specclip {

enum class DataSource { synthetic_blobs, csv_tabular, mnist_idx };
enum class Normalization { none, zscore };

struct SkewSpec {
  double alpha = 1.0;  // Dirichlet concentration; smaller = more label skew
  std::uint64_t seed = 0;
};

struct DatasetSpec {
  DataSource source = DataSource::synthetic_blobs;
  std::string path;  // file or directory for file-backed sources
  std::size_t n_train = 8000;
  std::size_t n_test = 2000;
  std::size_t n_classes = 4;
  std::size_t feature_dim = 20;
  double separation = 3.0;  // blob mean separation along class axes
  Normalization normalization = Normalization::none;
  std::optional<SkewSpec> skew;
  std::optional<std::size_t> subset;  // cap on loaded train examples

  void validate() const;
};

/// Class-conditional unit-covariance Gaussians with axis-aligned means of
/// magnitude `separation`; labels balanced round-robin, so the split is
/// stratified by construction. Fully determined by the rng stream.
DataSplit make_synthetic_blobs(const DatasetSpec& spec, RngStream& rng);

/// Subsample indices so class frequencies match pi ~ Dirichlet(alpha * 1),
/// largest-remainder rounding, keeping the original total where class
/// availability permits (otherwise the maximum feasible, with a warning on
/// stderr). Returned indices are ascending.
std::vector<std::size_t> dirichlet_skew(const std::vector<std::size_t>& labels, double alpha,
                                        RngStream& rng);

/// Raised by file loaders on malformed input; the message names the byte
/// offset of the problem.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IdxImages {
  std::size_t count = 0, rows = 0, cols = 0;
  Vec pixels;  // scaled to [0,1], row-major per image
};

IdxImages load_idx_images(const std::string& path);
std::vector<std::size_t> load_idx_labels(const std::string& path);

/// Directory with the four standard files (train-images-idx3-ubyte, ...).
/// Pixels scaled to [0,1] and flattened; subset caps apply per split.
DataSplit load_mnist_idx(const std::string& dir, std::optional<std::size_t> subset_train,
                         std::optional<std::size_t> subset_test);

/// Headerless numeric CSV, label in the last column; first n_train rows
/// train, next n_test rows test. Optional z-scoring fitted on train.
DataSplit load_csv_tabular(const DatasetSpec& spec);

/// Materializes any dataset spec (applies skew and normalization).
DataSplit load_dataset(const DatasetSpec& spec, std::uint64_t data_seed);

// --- Run log files -------------------------------------------------------

extern const char* const kRunCsvHeader;  // step,c,zeta_raw,... (fixed)

void write_run_csv(const RunLog& log, const std::string& path);

/// Re-ingests a CSV written by write_run_csv; numeric fields round-trip
/// exactly (%.17g both ways).
std::vector<StepRecord> read_run_csv(const std::string& path);

void write_run_sidecar_json(const RunLog& log, const std::string& path);

struct RunSidecar {
  double epsilon = 0.0, best_order = 0.0;
  double final_accuracy = 0.0, final_loss = 0.0, final_c = 0.0;
  RunTimings timings;
  std::uint64_t noise_draws = 0;
  bool aborted = false;
};

RunSidecar read_run_sidecar_json(const std::string& path);

// --- Configs -------------------------------------------------------------

struct FullConfig {
  DatasetSpec dataset;
  TrainConfig train;
  std::string out_dir = "out";
};

FullConfig parse_config_json(const std::string& text);
FullConfig load_config_file(const std::string& path);
std::string serialize_config(const FullConfig& cfg);  // canonical form
FullConfig default_desk_config();

// --- Experiment presets --------------------------------------------------

enum class PresetName {
  fixed_c_sweep,
  c0_sweep,
  beta_ablation,
  zone_ablation,
  probe_period_ablation,
  component_ablation,
  dirichlet_robustness,
  runtime_overhead,
};

std::optional<PresetName> preset_from_string(const std::string& name);
std::vector<std::string> preset_names();

struct PresetRun {
  TrainConfig cfg;
  DatasetSpec dataset;
};

/// Expands a preset over the base config into one matched-privacy block.
std::vector<PresetRun> expand_preset(PresetName preset, const FullConfig& base);

/// Runs a preset block: per-run CSV/JSON files plus aggregate.csv and
/// summary.json under out_dir. Returns the sweep aggregate.
SweepResult run_preset(PresetName preset, const FullConfig& base, std::size_t repeats,
                       const std::string& out_dir);

// --- CLI -----------------------------------------------------------------

/// Subcommands: train, sweep, accountant, inspect-log.
/// Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.
int run_cli(int argc, const char* const* argv);

}  // namespace specclip
