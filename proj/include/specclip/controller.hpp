#pragma once

#include <cstdint>

namespace specclip {

/// Saturated log-domain clip regulator settings. The health zone is the
/// interval (zeta_star - r, zeta_star + r); defaults target (2, 6).
struct ControllerConfig {
  double zeta_star = 4.0;
  double r = 2.0;
  double kappa = 0.1;       // gain; 0 turns the controller into a recorder
  double beta = 0.98;       // EMA factor in [0, 1)
  std::size_t probe_period = 50;
  double c_min = 0.3;
  double c_max = 5.0;
  bool clamp_enabled = true;

  void validate() const;
};

/// The controller's entire memory: the log-clip state u = log C and the
/// smoothed spectral proxy. c is carried alongside u so that no-op control
/// steps leave the threshold bit-identical (exp(log C) does not round-trip).
struct ClipControllerState {
  double u = 0.0;
  double c = 1.0;
  double zeta_hat = 0.0;
  std::uint64_t clamp_hits_min = 0;
  std::uint64_t clamp_hits_max = 0;
};

/// u = ln(c0), zeta_hat = zeta_star (so the first update before any probe
/// is a no-op), zero clamp hits.
ClipControllerState init_state(const ControllerConfig& cfg, double c0);

/// max(-1, min(1, x)).
double sat(double x);

/// min(hi, max(lo, c)).
double clamp_threshold(double c, double lo, double hi);

/// zeta_hat' = beta * zeta_hat + (1 - beta) * zeta_new.
ClipControllerState ema_update(ClipControllerState state, double zeta_new, double beta);

/// One probe-and-control update: EMA, centered saturated error, log-domain
/// gain step, optional clamp. After a binding clamp, u is resynchronized to
/// ln(C) so the state never winds up outside the clamp interval. The new
/// threshold is state.c of the result.
ClipControllerState control_step(const ClipControllerState& state, double zeta_new,
                                 const ControllerConfig& cfg);

}  // namespace specclip
