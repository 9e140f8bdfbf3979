#include "specclip/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace specclip {

namespace {

void check_finite(const Vec& values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("matrix entries must be finite");
    }
  }
}

constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Matrix::Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {
  if (r == 0 || c == 0) throw std::invalid_argument("matrix dimensions must be positive");
}

Matrix::Matrix(std::size_t r, std::size_t c, Vec values)
    : rows(r), cols(c), data(std::move(values)) {
  if (r == 0 || c == 0) throw std::invalid_argument("matrix dimensions must be positive");
  if (data.size() != r * c) throw std::invalid_argument("matrix data length must equal rows*cols");
  check_finite(data);
}

RngStream::RngStream(std::uint64_t seed, std::string_view stream_id)
    : state_(mix64(mix64(seed + kSplitMixGamma) ^ fnv1a64(stream_id))) {}

std::uint64_t RngStream::next_u64() {
  state_ += kSplitMixGamma;
  ++draws_;
  return mix64(state_);
}

double RngStream::next_uniform() {
  // 53-bit mantissa grid shifted off zero, so log() of a draw is finite.
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

Vec singular_values(const Matrix& m) {
  // Work column-major on the tall orientation; singular values are
  // unaffected by transposition.
  const bool transpose = m.rows < m.cols;
  const std::size_t rows = transpose ? m.cols : m.rows;
  const std::size_t cols = transpose ? m.rows : m.cols;
  std::vector<Vec> col(cols, Vec(rows, 0.0));
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      const double v = m.at(i, j);
      if (transpose) {
        col[i][j] = v;
      } else {
        col[j][i] = v;
      }
    }
  }

  const double tol = 1e-12;
  const int max_sweeps = 128;
  bool rotated = true;
  for (int sweep = 0; sweep < max_sweeps && rotated; ++sweep) {
    rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          app += col[p][i] * col[p][i];
          aqq += col[q][i] * col[q][i];
          apq += col[p][i] * col[q][i];
        }
        if (apq == 0.0 || apq * apq <= tol * tol * app * aqq) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double x = col[p][i];
          const double y = col[q][i];
          col[p][i] = c * x - s * y;
          col[q][i] = s * x + c * y;
        }
      }
    }
  }

  Vec sigma(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) sigma[j] = l2_norm(col[j]);
  std::sort(sigma.begin(), sigma.end(), std::greater<double>());
  return sigma;
}

double l2_norm(const double* v, std::size_t n) {
  // Neumaier-compensated sum of squares.
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sq = v[i] * v[i];
    const double t = sum + sq;
    if (std::abs(sum) >= std::abs(sq)) {
      comp += (sum - t) + sq;
    } else {
      comp += (sq - t) + sum;
    }
    sum = t;
  }
  return std::sqrt(sum + comp);
}

double l2_norm(const Vec& v) { return l2_norm(v.data(), v.size()); }

Vec gaussian_vector(std::size_t len, double std, RngStream& rng) {
  if (std < 0.0 || !std::isfinite(std)) {
    throw std::invalid_argument("gaussian_vector: std must be finite and >= 0");
  }
  Vec out(len, 0.0);
  if (std == 0.0 || len == 0) return out;
  for (std::size_t i = 0; i < len; i += 2) {
    const double u1 = rng.next_uniform();
    const double u2 = rng.next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[i] = std * (r * std::cos(angle));
    if (i + 1 < len) out[i + 1] = std * (r * std::sin(angle));
  }
  return out;
}

}  // namespace specclip
