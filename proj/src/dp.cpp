#include "specclip/dp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace specclip {

void PrivacyParams::validate() const {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("privacy: q must be in (0,1]");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("privacy: sigma must be positive");
  }
  if (steps == 0) throw std::invalid_argument("privacy: steps must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("privacy: delta must be in (0,1)");
}

std::vector<std::size_t> poisson_subsample(std::size_t n, double q, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("poisson_subsample: n must be >= 1");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("poisson_subsample: q must be in [0,1]");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i) {
    // next_uniform() is in (0,1], so q=0 never includes and q=1 always does.
    if (rng.next_uniform() <= q) idx.push_back(i);
  }
  return idx;
}

Vec clip_gradient(const Vec& g, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("clip_gradient: c must be positive");
  const double norm = l2_norm(g);
  const double scale = 1.0 / std::max(1.0, norm / c);
  Vec out(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] * scale;
  return out;
}

Vec clipped_sum_plus_noise(const PerExampleGrads& grads, double c, double sigma,
                           RngStream& noise_rng) {
  if (!(c > 0.0)) throw std::invalid_argument("clipped_sum_plus_noise: c must be positive");
  if (sigma < 0.0) throw std::invalid_argument("clipped_sum_plus_noise: sigma must be >= 0");
  Vec sum(grads.dim, 0.0);
  for (std::size_t r = 0; r < grads.rows; ++r) {
    const double* row = grads.row(r);
    const double norm = l2_norm(row, grads.dim);
    const double scale = 1.0 / std::max(1.0, norm / c);
    for (std::size_t k = 0; k < grads.dim; ++k) sum[k] += row[k] * scale;
  }
  const Vec noise = gaussian_vector(grads.dim, sigma * c, noise_rng);
  for (std::size_t k = 0; k < grads.dim; ++k) sum[k] += noise[k];
  return sum;
}

NoisyUpdate noisy_average(const PerExampleGrads& grads, double c, double sigma,
                          RngStream& noise_rng) {
  if (grads.rows == 0) return NoisyUpdate{{}, true};
  Vec v = clipped_sum_plus_noise(grads, c, sigma, noise_rng);
  const double inv = 1.0 / static_cast<double>(grads.rows);
  for (double& x : v) x *= inv;
  return NoisyUpdate{std::move(v), false};
}

namespace {

bool rows_equal(const double* a, const double* b, std::size_t dim) {
  for (std::size_t k = 0; k < dim; ++k) {
    if (a[k] != b[k]) return false;
  }
  return true;
}

Vec clipped_sum(const PerExampleGrads& grads, double c) {
  Vec sum(grads.dim, 0.0);
  for (std::size_t r = 0; r < grads.rows; ++r) {
    const double* row = grads.row(r);
    const double norm = l2_norm(row, grads.dim);
    const double scale = 1.0 / std::max(1.0, norm / c);
    for (std::size_t k = 0; k < grads.dim; ++k) sum[k] += row[k] * scale;
  }
  return sum;
}

}  // namespace

double sensitivity_probe(const PerExampleGrads& grads_with,
                         const PerExampleGrads& grads_without, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("sensitivity_probe: c must be positive");
  const PerExampleGrads& big = grads_with.rows >= grads_without.rows ? grads_with : grads_without;
  const PerExampleGrads& small = grads_with.rows >= grads_without.rows ? grads_without : grads_with;
  if (big.rows != small.rows + 1 || (small.rows > 0 && big.dim != small.dim)) {
    throw std::invalid_argument("sensitivity_probe: sets must differ by exactly one row");
  }
  // The smaller set must appear as an in-order subsequence of the larger.
  std::size_t si = 0;
  std::size_t skips = 0;
  for (std::size_t bi = 0; bi < big.rows; ++bi) {
    if (si < small.rows && rows_equal(big.row(bi), small.row(si), big.dim)) {
      ++si;
    } else {
      ++skips;
    }
  }
  if (si != small.rows || skips != 1) {
    throw std::invalid_argument("sensitivity_probe: sets must differ by exactly one row");
  }

  Vec sum_with = clipped_sum(grads_with, c);
  Vec sum_without = clipped_sum(grads_without, c);
  const std::size_t dim = std::max(sum_with.size(), sum_without.size());
  sum_with.resize(dim, 0.0);
  sum_without.resize(dim, 0.0);
  Vec diff(dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) diff[k] = sum_with[k] - sum_without[k];
  return l2_norm(diff);
}

}  // namespace specclip
