#pragma once

#include <vector>

#include "specclip/linalg.hpp"
#include "specclip/model.hpp"

namespace specclip {

/// Everything the accountant may see. Deliberately excludes any clipping
/// threshold: per-step privacy of the mechanism depends only on (q, sigma),
/// and keeping C out of this type enforces that at the API level.
struct PrivacyParams {
  double q = 0.0;            // Poisson sampling rate, (0, 1]
  double sigma = 0.0;        // noise multiplier, > 0
  std::size_t steps = 0;     // total optimizer steps T
  double delta = 0.0;        // target delta, (0, 1)

  void validate() const;
};

/// Released noisy mean, or the empty-minibatch skip marker.
struct NoisyUpdate {
  Vec g_tilde;
  bool skipped = false;
};

/// Each index in [0, n) included independently with probability q.
/// Ascending order; may be empty. Consumes exactly n uniform draws.
std::vector<std::size_t> poisson_subsample(std::size_t n, double q, RngStream& rng);

/// g / max(1, ||g||/c). Output norm = min(||g||, c); direction preserved.
Vec clip_gradient(const Vec& g, double c);

/// Mechanism core: sum of per-row clipped gradients (accumulated in batch
/// order) plus one N(0, sigma^2 c^2 I) vector drawn from the noise stream.
Vec clipped_sum_plus_noise(const PerExampleGrads& grads, double c, double sigma,
                           RngStream& noise_rng);

/// Clips internally (raw per-example grads in), adds noise to the SUM and
/// only then divides by |L|. An empty gradient set returns the skip marker
/// without advancing the noise stream at all.
NoisyUpdate noisy_average(const PerExampleGrads& grads, double c, double sigma,
                          RngStream& noise_rng);

/// ||sum of clipped rows (with) - sum of clipped rows (without)|| for two
/// gradient sets differing in exactly one row; always <= c. Test utility
/// for the clipped-sum sensitivity bound.
double sensitivity_probe(const PerExampleGrads& grads_with,
                         const PerExampleGrads& grads_without, double c);

}  // namespace specclip
