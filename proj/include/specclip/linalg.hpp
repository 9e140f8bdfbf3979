#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace specclip {

using Vec = std::vector<double>;

/// Dense row-major matrix. Construction rejects empty shapes and
/// non-finite entries.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c);
  Matrix(std::size_t r, std::size_t c, Vec values);

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Counter-based deterministic RNG (SplitMix64 over an affine counter).
/// A stream is identified by (seed, stream_id); distinct ids derived from
/// the same seed behave as independent streams. The same (seed, id) replays
/// the identical bit sequence on every platform. Streams are single-owner:
/// never share one instance across concurrent callers.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view stream_id);

  std::uint64_t next_u64();

  /// Uniform on (0, 1]; consumes exactly one 64-bit draw.
  double next_uniform();

  /// Number of raw 64-bit outputs consumed so far.
  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t draws_ = 0;
};

/// Singular values of m, descending. One-sided Jacobi on columns;
/// iteration stops when every off-diagonal dot product satisfies
/// |b_i . b_j| <= 1e-12 * ||b_i|| ||b_j||.
Vec singular_values(const Matrix& m);

double l2_norm(const double* v, std::size_t n);
double l2_norm(const Vec& v);

/// len i.i.d. draws from N(0, std^2) via Box-Muller. Fixed draw order:
/// each output pair consumes uniforms (u1, u2) in that order and yields
/// (r cos, r sin) with r = sqrt(-2 ln u1). std == 0 returns the zero
/// vector without consuming any draws.
Vec gaussian_vector(std::size_t len, double std, RngStream& rng);

}  // namespace specclip
