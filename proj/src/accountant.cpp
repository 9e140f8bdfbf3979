#include "specclip/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace specclip {

namespace {

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_binomial(unsigned n, unsigned j) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(j) + 1.0) -
         std::lgamma(static_cast<double>(n - j) + 1.0);
}

// log A(alpha) = log E_{x~N(0,s^2)}[((1-q) + q e^{(2x-1)/(2s^2)})^alpha]
// for integer alpha >= 1 and q in (0,1), via the binomial expansion.
double log_a_integer(double q, double sigma, unsigned alpha) {
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  double log_a = -std::numeric_limits<double>::infinity();
  for (unsigned j = 0; j <= alpha; ++j) {
    const double jd = static_cast<double>(j);
    const double term = log_binomial(alpha, j) + (alpha - j) * log_1mq + jd * log_q +
                        (jd * jd - jd) * inv2s2;
    log_a = log_add_exp(log_a, term);
  }
  return log_a;
}

}  // namespace

const std::vector<double>& default_rdp_orders() {
  static const std::vector<double> orders = {1.25, 1.5, 1.75, 2,  2.5, 3,  4,   5,   6,   8,  10,
                                             12,   16,  20,   24, 32,  48, 64,  128, 256, 512};
  return orders;
}

double rdp_subsampled_gaussian(double q, double sigma, double order) {
  if (!(order > 1.0)) throw std::invalid_argument("rdp: order must be > 1");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("rdp: q must be in [0,1]");
  if (!(sigma > 0.0)) throw std::invalid_argument("rdp: sigma must be positive");

  if (q == 0.0) return 0.0;
  const double gaussian_bound = order / (2.0 * sigma * sigma);
  if (q == 1.0) return gaussian_bound;

  const double floor_order = std::floor(order);
  if (floor_order == order) {
    const unsigned alpha = static_cast<unsigned>(order);
    return log_a_integer(q, sigma, alpha) / (order - 1.0);
  }

  // Linear interpolation of log A between neighboring integers; log A(1) = 0.
  // The chord is an upper bound (log A is convex in the order) but can be
  // loose between 1 and 2, so cap it with the always-valid unsubsampled
  // Gaussian value.
  const unsigned a0 = static_cast<unsigned>(floor_order);
  const unsigned a1 = a0 + 1;
  const double w = order - floor_order;
  const double log_a0 = (a0 == 1) ? 0.0 : log_a_integer(q, sigma, a0);
  const double log_a1 = log_a_integer(q, sigma, a1);
  const double log_a = (1.0 - w) * log_a0 + w * log_a1;
  return std::min(log_a / (order - 1.0), gaussian_bound);
}

RdpCurve rdp_curve(double q, double sigma, const std::vector<double>& orders) {
  RdpCurve curve;
  curve.orders = orders;
  curve.values.reserve(orders.size());
  for (double a : orders) curve.values.push_back(rdp_subsampled_gaussian(q, sigma, a));
  return curve;
}

RdpCurve compose(RdpCurve curve, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("compose: steps must be positive");
  for (double& v : curve.values) v *= static_cast<double>(steps);
  return curve;
}

DpConversion rdp_to_dp(const RdpCurve& curve, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("rdp_to_dp: delta must be in (0,1)");
  if (curve.orders.empty() || curve.orders.size() != curve.values.size()) {
    throw std::invalid_argument("rdp_to_dp: malformed curve");
  }
  const double log_inv_delta = std::log(1.0 / delta);
  DpConversion best;
  best.epsilon = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.orders.size(); ++i) {
    const double a = curve.orders[i];
    if (!(a > 1.0)) throw std::invalid_argument("rdp_to_dp: orders must be > 1");
    const double eps = curve.values[i] + log_inv_delta / (a - 1.0);
    if (eps < best.epsilon) {
      best.epsilon = eps;
      best.best_order = a;
    }
  }
  return best;
}

double epsilon_of(const PrivacyParams& p) {
  p.validate();
  return rdp_to_dp(compose(rdp_curve(p.q, p.sigma), p.steps), p.delta).epsilon;
}

double sigma_for_epsilon(double q, std::size_t steps, double delta, double target_epsilon,
                         double tol_eps) {
  if (!(target_epsilon > 0.0)) throw std::invalid_argument("target epsilon must be positive");
  auto eps_at = [&](double sigma) {
    return epsilon_of(PrivacyParams{q, sigma, steps, delta});
  };

  double lo = 1e-2, hi = 1.0;
  while (eps_at(hi) > target_epsilon) {
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("sigma_for_epsilon: target too small to bracket");
  }
  while (eps_at(lo) < target_epsilon) {
    lo *= 0.5;
    if (lo < 1e-6) break;  // epsilon already above target for any larger sigma
  }

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double eps = eps_at(mid);
    if (std::abs(eps - target_epsilon) <= tol_eps) return mid;
    if (eps > target_epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace specclip
