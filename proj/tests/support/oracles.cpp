#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace specclip::oracles {

Matrix gram(const Matrix& a) {
  Matrix g(a.cols, a.cols);
  for (std::size_t i = 0; i < a.cols; ++i) {
    for (std::size_t j = i; j < a.cols; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < a.rows; ++r) s += a.at(r, i) * a.at(r, j);
      g.at(i, j) = s;
      g.at(j, i) = s;
    }
  }
  return g;
}

Vec sym_eigenvalues(const Matrix& a_in) {
  if (a_in.rows != a_in.cols) throw std::invalid_argument("sym_eigenvalues: square input only");
  Matrix a = a_in;
  const std::size_t n = a.rows;
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      diag += std::abs(a.at(p, p));
      for (std::size_t q = p + 1; q < n; ++q) off += std::abs(a.at(p, q));
    }
    if (off <= 1e-14 * std::max(diag, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) continue;
        const double tau = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p);
          const double akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k);
          const double aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vec eig(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a.at(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

long double l2_extended(const Vec& v) {
  long double s = 0.0L;
  for (double x : v) s += static_cast<long double>(x) * static_cast<long double>(x);
  return std::sqrt(s);
}

double fd_loss_grad(const MlpConfig& cfg, const Vec& flat, const double* example,
                    std::size_t input_dim, std::size_t label, std::size_t k, double h) {
  Batch single;
  single.input_dim = input_dim;
  single.push_example(example, label);
  auto loss_at = [&](double delta) {
    Vec shifted = flat;
    shifted[k] += delta;
    const MlpParams p = unflatten(cfg, shifted);
    return evaluate(p, single).mean_loss;
  };
  return (loss_at(h) - loss_at(-h)) / (2.0 * h);
}

Vec full_batch_gradient(const MlpParams& p, const Batch& b) {
  const std::size_t n_layers = p.layers.size();
  const std::size_t n = b.size();

  // Forward for the whole batch at once: act[l] is n x width.
  std::vector<std::vector<Vec>> act(n_layers + 1);
  std::vector<std::vector<Vec>> pre(n_layers);
  act[0].resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    act[0][i].assign(b.example(i), b.example(i) + b.input_dim);
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Matrix& w = p.layers[l].weights;
    pre[l].resize(n);
    act[l + 1].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      Vec z(w.rows, 0.0);
      for (std::size_t o = 0; o < w.rows; ++o) {
        double s = p.layers[l].bias[o];
        for (std::size_t c = 0; c < w.cols; ++c) s += w.at(o, c) * act[l][i][c];
        z[o] = s;
      }
      pre[l][i] = z;
      Vec a(w.rows, 0.0);
      if (l + 1 < n_layers) {
        for (std::size_t o = 0; o < w.rows; ++o) {
          a[o] = p.activation == Activation::relu ? (z[o] > 0.0 ? z[o] : 0.0) : std::tanh(z[o]);
        }
      }
      act[l + 1][i] = a;
    }
  }

  // delta[l][i]: dL_mean/dz_l for example i (mean folds in as 1/n at the top).
  std::vector<std::vector<Vec>> delta(n_layers);
  delta[n_layers - 1].resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& z = pre[n_layers - 1][i];
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    double se = 0.0;
    Vec d(z.size(), 0.0);
    for (std::size_t j = 0; j < z.size(); ++j) {
      d[j] = std::exp(z[j] - zmax);
      se += d[j];
    }
    for (double& v : d) v /= se;
    d[b.labels[i]] -= 1.0;
    for (double& v : d) v *= inv_n;
    delta[n_layers - 1][i] = d;
  }
  for (std::size_t l = n_layers - 1; l-- > 0;) {
    const Matrix& w_up = p.layers[l + 1].weights;
    delta[l].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      Vec d(w_up.cols, 0.0);
      for (std::size_t o = 0; o < w_up.rows; ++o) {
        for (std::size_t c = 0; c < w_up.cols; ++c) d[c] += w_up.at(o, c) * delta[l + 1][i][o];
      }
      const Vec& z = pre[l][i];
      const Vec& a = act[l + 1][i];
      for (std::size_t c = 0; c < w_up.cols; ++c) {
        const double g =
            p.activation == Activation::relu ? (z[c] > 0.0 ? 1.0 : 0.0) : 1.0 - a[c] * a[c];
        d[c] *= g;
      }
      delta[l][i] = d;
    }
  }

  Vec grad;
  grad.reserve(p.flat_dim());
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Matrix& w = p.layers[l].weights;
    for (std::size_t o = 0; o < w.rows; ++o) {
      for (std::size_t c = 0; c < w.cols; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += delta[l][i][o] * act[l][i][c];
        grad.push_back(s);
      }
    }
    for (std::size_t o = 0; o < w.rows; ++o) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += delta[l][i][o];
      grad.push_back(s);
    }
  }
  return grad;
}

double rdp_quadrature(double q, double sigma, double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("rdp_quadrature: alpha must be > 1");
  if (q == 0.0) return 0.0;
  const double s2 = sigma * sigma;
  const double log_q = std::log(q);
  const double log_1mq = q < 1.0 ? std::log1p(-q) : -std::numeric_limits<double>::infinity();
  const double log_norm = -0.5 * std::log(2.0 * M_PI * s2);

  auto log_integrand = [&](double x) {
    const double log_ratio_term = (2.0 * x - 1.0) / (2.0 * s2) + log_q;
    double log_mix;
    if (q >= 1.0) {
      log_mix = log_ratio_term;
    } else if (log_1mq >= log_ratio_term) {
      log_mix = log_1mq + std::log1p(std::exp(log_ratio_term - log_1mq));
    } else {
      log_mix = log_ratio_term + std::log1p(std::exp(log_1mq - log_ratio_term));
    }
    return log_norm - x * x / (2.0 * s2) + alpha * log_mix;
  };

  const double lo = -60.0 * sigma;
  const double hi = alpha + 60.0 * sigma;
  const std::size_t n = 1u << 17;  // even
  const double dx = (hi - lo) / static_cast<double>(n);

  // Composite Simpson accumulated in log space.
  std::vector<double> logs(n + 1);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= n; ++i) {
    logs[i] = log_integrand(lo + dx * static_cast<double>(i));
    max_log = std::max(max_log, logs[i]);
  }
  long double acc = 0.0L;
  for (std::size_t i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += static_cast<long double>(w) * std::exp(static_cast<long double>(logs[i] - max_log));
  }
  const double log_integral =
      max_log + static_cast<double>(std::log(acc)) + std::log(dx / 3.0);
  return log_integral / (alpha - 1.0);
}

double reference_epsilon(double q, double sigma, std::size_t steps, double delta) {
  std::vector<double> orders;
  for (int a = 2; a <= 64; ++a) orders.push_back(a);
  orders.push_back(128.0);
  orders.push_back(256.0);
  orders.push_back(512.0);
  double best = std::numeric_limits<double>::infinity();
  for (double a : orders) {
    const double per_step = q >= 1.0 ? a / (2.0 * sigma * sigma) : rdp_quadrature(q, sigma, a);
    const double eps = per_step * static_cast<double>(steps) + std::log(1.0 / delta) / (a - 1.0);
    best = std::min(best, eps);
  }
  return best;
}

double ks_statistic_std_normal(Vec sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-sample[i] / std::sqrt(2.0));
    const double hi = (static_cast<double>(i) + 1.0) / n - cdf;
    const double lo = cdf - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  return d;
}

Matrix random_orthogonal(std::size_t n, RngStream& rng) {
  Matrix m(n, n, gaussian_vector(n * n, 1.0, rng));
  // Modified Gram-Schmidt on columns.
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += m.at(i, j) * m.at(i, k);
      for (std::size_t i = 0; i < n; ++i) m.at(i, j) -= dot * m.at(i, k);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += m.at(i, j) * m.at(i, j);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) m.at(i, j) /= norm;
  }
  return m;
}

Vec pareto_grid(std::size_t n, double zeta_true) {
  Vec lambdas(n, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    lambdas[i - 1] = std::pow(static_cast<double>(i) / static_cast<double>(n + 1),
                              -1.0 / (zeta_true - 1.0));
  }
  return lambdas;
}

double hill_exponent(const Vec& lambdas_desc, std::size_t k) {
  if (lambdas_desc.size() < k + 1) throw std::invalid_argument("hill_exponent: need k+1 values");
  long double s = 0.0L;
  const long double cut = std::log(static_cast<long double>(lambdas_desc[k]));
  for (std::size_t i = 0; i < k; ++i) {
    s += std::log(static_cast<long double>(lambdas_desc[i])) - cut;
  }
  return 1.0 + static_cast<double>(static_cast<long double>(k) / s);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) out.at(i, j) += aik * b.at(k, j);
    }
  }
  return out;
}

}  // namespace specclip::oracles
