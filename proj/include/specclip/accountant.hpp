#pragma once

#include <vector>

#include "specclip/dp.hpp"

namespace specclip {

/// Per-step RDP values on a grid of orders. Composition over T steps
/// multiplies every value by T.
struct RdpCurve {
  std::vector<double> orders;  // all > 1
  std::vector<double> values;  // matching, non-negative
};

/// Practitioner grid spanning both small- and large-epsilon regimes.
const std::vector<double>& default_rdp_orders();

/// Per-step RDP of the Poisson-subsampled Gaussian mechanism at one order.
/// q = 0 gives 0; q = 1 gives the pure Gaussian closed form alpha/(2 sigma^2).
/// Integer orders use the exact binomial expansion accumulated with
/// log-sum-exp; non-integer orders interpolate log A(alpha) linearly between
/// the neighboring integers (an upper bound, by convexity of log A).
double rdp_subsampled_gaussian(double q, double sigma, double order);

/// rdp_subsampled_gaussian over a full grid of orders.
RdpCurve rdp_curve(double q, double sigma, const std::vector<double>& orders = default_rdp_orders());

/// Additive composition: every value multiplied by steps.
RdpCurve compose(RdpCurve curve, std::size_t steps);

struct DpConversion {
  double epsilon = 0.0;
  double best_order = 0.0;
};

/// epsilon = min over orders of [ rdp(order) + ln(1/delta)/(order-1) ];
/// ties break to the smallest order.
DpConversion rdp_to_dp(const RdpCurve& curve, double delta);

/// Full pipeline over the default grid: per-step curve, compose T, convert.
double epsilon_of(const PrivacyParams& p);

/// Smallest noise multiplier whose epsilon_of is within tol_eps of the
/// target (bisection; epsilon is monotone decreasing in sigma).
double sigma_for_epsilon(double q, std::size_t steps, double delta, double target_epsilon,
                         double tol_eps = 1e-3);

}  // namespace specclip
