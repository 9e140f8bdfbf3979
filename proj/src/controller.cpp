#include "specclip/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace specclip {

void ControllerConfig::validate() const {
  if (!(r > 0.0)) throw std::invalid_argument("controller: r must be positive");
  if (!(kappa >= 0.0)) throw std::invalid_argument("controller: kappa must be >= 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("controller: beta must be in [0,1)");
  if (probe_period == 0) throw std::invalid_argument("controller: probe_period must be positive");
  if (!(c_min > 0.0 && c_min <= c_max)) {
    throw std::invalid_argument("controller: need 0 < c_min <= c_max");
  }
}

ClipControllerState init_state(const ControllerConfig& cfg, double c0) {
  cfg.validate();
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    throw std::invalid_argument("init_state: c0 must be positive and finite");
  }
  ClipControllerState s;
  s.u = std::log(c0);
  s.c = c0;
  s.zeta_hat = cfg.zeta_star;
  return s;
}

double sat(double x) { return std::max(-1.0, std::min(1.0, x)); }

double clamp_threshold(double c, double lo, double hi) {
  return std::min(hi, std::max(lo, c));
}

ClipControllerState ema_update(ClipControllerState state, double zeta_new, double beta) {
  state.zeta_hat = beta * state.zeta_hat + (1.0 - beta) * zeta_new;
  return state;
}

ClipControllerState control_step(const ClipControllerState& state, double zeta_new,
                                 const ControllerConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(zeta_new)) throw std::invalid_argument("control_step: zeta must be finite");

  ClipControllerState s = ema_update(state, zeta_new, cfg.beta);
  const double e = s.zeta_hat - cfg.zeta_star;
  const double phi = sat(e / cfg.r);
  const double step = cfg.kappa * phi;
  if (step != 0.0) {
    s.u += step;
    s.c = std::exp(s.u);
  }
  if (cfg.clamp_enabled) {
    const double clamped = clamp_threshold(s.c, cfg.c_min, cfg.c_max);
    if (clamped != s.c) {
      if (clamped == cfg.c_min) {
        ++s.clamp_hits_min;
      } else {
        ++s.clamp_hits_max;
      }
      s.c = clamped;
      s.u = std::log(clamped);
    }
  }
  return s;
}

}  // namespace specclip
