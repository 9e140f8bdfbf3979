#include "specclip/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace specclip {

void TailFitRule::validate() const {
  if (min_tail_size < 5) throw std::invalid_argument("tail rule: min_tail_size must be >= 5");
  if (mode == TailFitMode::top_k && k == 0) {
    throw std::invalid_argument("tail rule: k must be positive in top_k mode");
  }
  if (mode == TailFitMode::xmin_threshold && !(lambda_min > 0.0)) {
    throw std::invalid_argument("tail rule: lambda_min must be positive in threshold mode");
  }
}

TailFitRule default_tail_rule(std::size_t effective_rank) {
  TailFitRule rule;
  rule.mode = TailFitMode::top_k;
  rule.min_tail_size = 8;
  rule.k = std::max<std::size_t>(rule.min_tail_size, (effective_rank + 3) / 4);
  return rule;
}

Vec eigenvalues(const Matrix& w) {
  Vec sigma = singular_values(w);
  for (double& s : sigma) s = s * s;
  return sigma;
}

std::size_t effective_rank(const Vec& lambdas_desc) {
  if (lambdas_desc.empty() || lambdas_desc.front() <= 0.0) return 0;
  const double cutoff = 1e-12 * lambdas_desc.front();
  std::size_t r = 0;
  for (double l : lambdas_desc) {
    if (l >= cutoff) ++r;
  }
  return r;
}

std::optional<SpectralReading> fit_tail_exponent(const Vec& lambdas_desc,
                                                 const TailFitRule& rule) {
  rule.validate();

  std::size_t k = 0;
  if (rule.mode == TailFitMode::top_k) {
    k = rule.k;
  } else {
    for (double l : lambdas_desc) {
      if (l > rule.lambda_min) ++k;
    }
  }
  // The Hill denominator needs the (k+1)-th order statistic.
  if (k < rule.min_tail_size || lambdas_desc.size() < k + 1) return std::nullopt;

  const double cut = lambdas_desc[k];
  if (!(cut > 0.0)) return std::nullopt;

  double log_ratio_sum = 0.0;
  std::size_t strictly_above = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double l = lambdas_desc[i];
    if (!(l > 0.0)) return std::nullopt;
    if (l > cut) ++strictly_above;
    log_ratio_sum += std::log(l / cut);
  }
  if (strictly_above < rule.min_tail_size || log_ratio_sum <= 0.0) return std::nullopt;

  SpectralReading reading;
  reading.zeta = 1.0 + static_cast<double>(k) / log_ratio_sum;
  reading.tail_size = k;
  return reading;
}

std::optional<double> ww_probe(const MlpParams& p, const ProbeSpec& spec,
                               const std::optional<TailFitRule>& rule) {
  if (spec.layer_refs.empty()) throw std::invalid_argument("ww_probe: empty probe set");
  std::vector<double> zetas;
  zetas.reserve(spec.layer_refs.size());
  for (const std::string& ref : spec.layer_refs) {
    const Matrix w = probe_matrix(p, ref);
    const Vec lam = eigenvalues(w);
    const TailFitRule layer_rule = rule ? *rule : default_tail_rule(effective_rank(lam));
    if (auto fit = fit_tail_exponent(lam, layer_rule)) zetas.push_back(fit->zeta);
  }
  if (zetas.empty()) return std::nullopt;
  std::sort(zetas.begin(), zetas.end());
  const std::size_t n = zetas.size();
  if (n % 2 == 1) return zetas[n / 2];
  return 0.5 * (zetas[n / 2 - 1] + zetas[n / 2]);
}

}  // namespace specclip
