#pragma once

#include <optional>
#include <string>
#include <vector>

#include "specclip/linalg.hpp"
#include "specclip/model.hpp"

namespace specclip {

enum class TailFitMode { top_k, xmin_threshold };

/// Which upper-tail slice the power-law fit uses: a fixed count of the
/// largest eigenvalues, or everything above a threshold.
struct TailFitRule {
  TailFitMode mode = TailFitMode::top_k;
  std::size_t k = 8;            // top_k mode
  double lambda_min = 0.0;      // xmin_threshold mode
  std::size_t min_tail_size = 8;

  void validate() const;
};

/// Default slice for a spectrum with the given effective rank:
/// quarter-spectrum, never fewer than 8 values.
TailFitRule default_tail_rule(std::size_t effective_rank);

struct SpectralReading {
  double zeta = 0.0;          // fitted density exponent; always > 1
  std::size_t tail_size = 0;  // eigenvalue count the fit used
  std::string layer_ref;
};

/// Squares of singular values, descending.
Vec eigenvalues(const Matrix& w);

/// Count of eigenvalues at or above 1e-12 * lambda_max; smaller values are
/// treated as numerical rank noise.
std::size_t effective_rank(const Vec& lambdas_desc);

/// Hill estimate over the tail: zeta = 1 + k / sum_{i<=k} ln(lambda_i /
/// lambda_{k+1}). Returns nullopt for degenerate spectra: tail too small,
/// non-positive values in or at the cut, or an all-equal tail.
std::optional<SpectralReading> fit_tail_exponent(const Vec& lambdas_desc,
                                                 const TailFitRule& rule);

/// Per-layer fit over the probe set; single layer passes through, several
/// layers aggregate by median (mean of the middle two when even). Layers
/// whose fit degenerates are dropped; nullopt when every layer fails.
/// Omitting the rule picks default_tail_rule per layer.
std::optional<double> ww_probe(const MlpParams& p, const ProbeSpec& spec,
                               const std::optional<TailFitRule>& rule = std::nullopt);

}  // namespace specclip
