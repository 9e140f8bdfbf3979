#include "specclip/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "specclip/parallel.hpp"

namespace specclip {

namespace {

double activate(double z, Activation a) {
  switch (a) {
    case Activation::relu:
      return z > 0.0 ? z : 0.0;  // subgradient at 0 is 0
    case Activation::tanh:
      return std::tanh(z);
  }
  return 0.0;
}

// Derivative expressed through the activation value so tanh reuses the
// forward result.
double activate_grad(double z, double a_val, Activation a) {
  switch (a) {
    case Activation::relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::tanh:
      return 1.0 - a_val * a_val;
  }
  return 0.0;
}

struct ForwardScratch {
  std::vector<Vec> pre;  // pre[l]: layer l pre-activation (logits for the last)
  std::vector<Vec> act;  // act[l]: input fed to layer l (act[0] = x)
};

void forward_example(const MlpParams& p, const double* x, std::size_t input_dim,
                     ForwardScratch& s) {
  const std::size_t n_layers = p.layers.size();
  s.pre.resize(n_layers);
  s.act.resize(n_layers);
  s.act[0].assign(x, x + input_dim);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Matrix& w = p.layers[l].weights;
    const Vec& b = p.layers[l].bias;
    const Vec& in = s.act[l];
    Vec& z = s.pre[l];
    z.assign(w.rows, 0.0);
    for (std::size_t o = 0; o < w.rows; ++o) {
      const double* wrow = w.data.data() + o * w.cols;
      double acc = b[o];
      for (std::size_t i = 0; i < w.cols; ++i) acc += wrow[i] * in[i];
      z[o] = acc;
    }
    if (l + 1 < n_layers) {
      Vec& out = s.act[l + 1];
      out.assign(z.size(), 0.0);
      for (std::size_t o = 0; o < z.size(); ++o) out[o] = activate(z[o], p.activation);
    }
  }
}

// Max-shifted softmax cross-entropy; returns loss and writes dL/dlogits.
double softmax_ce(const Vec& logits, std::size_t label, Vec& dlogits) {
  double zmax = logits[0];
  for (double z : logits) zmax = std::max(zmax, z);
  double se = 0.0;
  dlogits.assign(logits.size(), 0.0);
  for (std::size_t j = 0; j < logits.size(); ++j) {
    dlogits[j] = std::exp(logits[j] - zmax);
    se += dlogits[j];
  }
  for (double& d : dlogits) d /= se;
  const double loss = std::log(se) - (logits[label] - zmax);
  dlogits[label] -= 1.0;
  return loss;
}

void backward_example(const MlpParams& p, const std::vector<std::size_t>& flat_offsets,
                      const double* x, std::size_t input_dim, std::size_t label,
                      double* grad_row, double* loss_out, ForwardScratch& s, Vec& dlogits,
                      Vec& dz, Vec& din) {
  forward_example(p, x, input_dim, s);
  const std::size_t n_layers = p.layers.size();
  *loss_out = softmax_ce(s.pre[n_layers - 1], label, dlogits);

  dz = dlogits;
  for (std::size_t li = n_layers; li-- > 0;) {
    const Matrix& w = p.layers[li].weights;
    const std::size_t offset = flat_offsets[li];
    const Vec& in = s.act[li];
    for (std::size_t o = 0; o < w.rows; ++o) {
      double* wgrad = grad_row + offset + o * w.cols;
      const double g = dz[o];
      for (std::size_t i = 0; i < w.cols; ++i) wgrad[i] = g * in[i];
    }
    double* bgrad = grad_row + offset + w.rows * w.cols;
    for (std::size_t o = 0; o < w.rows; ++o) bgrad[o] = dz[o];

    if (li > 0) {
      din.assign(w.cols, 0.0);
      for (std::size_t o = 0; o < w.rows; ++o) {
        const double* wrow = w.data.data() + o * w.cols;
        const double g = dz[o];
        for (std::size_t i = 0; i < w.cols; ++i) din[i] += wrow[i] * g;
      }
      const Vec& z_prev = s.pre[li - 1];
      const Vec& a_prev = s.act[li];
      dz.assign(w.cols, 0.0);
      for (std::size_t i = 0; i < w.cols; ++i) {
        dz[i] = din[i] * activate_grad(z_prev[i], a_prev[i], p.activation);
      }
    }
  }
}

}  // namespace

void MlpConfig::validate() const {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("layer_sizes needs at least input and output dims");
  }
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw std::invalid_argument("layer sizes must be positive");
  }
}

std::size_t MlpParams::flat_dim() const {
  std::size_t d = 0;
  for (const Layer& l : layers) d += l.weights.data.size() + l.bias.size();
  return d;
}

void Batch::push_example(const double* x, std::size_t label) {
  inputs.insert(inputs.end(), x, x + input_dim);
  labels.push_back(label);
}

MlpParams init_params(const MlpConfig& cfg, RngStream& rng) {
  cfg.validate();
  MlpParams p;
  p.activation = cfg.activation;
  p.layers.reserve(cfg.layer_sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < cfg.layer_sizes.size(); ++l) {
    const std::size_t fan_in = cfg.layer_sizes[l];
    const std::size_t fan_out = cfg.layer_sizes[l + 1];
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Vec w = gaussian_vector(fan_out * fan_in, std_dev, rng);
    p.layers.push_back({Matrix(fan_out, fan_in, std::move(w)), Vec(fan_out, 0.0)});
  }
  return p;
}

Vec flatten(const MlpParams& p) {
  Vec flat;
  flat.reserve(p.flat_dim());
  for (const auto& l : p.layers) {
    flat.insert(flat.end(), l.weights.data.begin(), l.weights.data.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

MlpParams unflatten(const MlpConfig& cfg, const Vec& flat) {
  cfg.validate();
  MlpParams p;
  p.activation = cfg.activation;
  std::size_t pos = 0;
  for (std::size_t l = 0; l + 1 < cfg.layer_sizes.size(); ++l) {
    const std::size_t in = cfg.layer_sizes[l];
    const std::size_t out = cfg.layer_sizes[l + 1];
    if (pos + out * in + out > flat.size()) {
      throw std::invalid_argument("flat vector too short for config");
    }
    Vec w(flat.begin() + pos, flat.begin() + pos + out * in);
    pos += out * in;
    Vec b(flat.begin() + pos, flat.begin() + pos + out);
    pos += out;
    p.layers.push_back({Matrix(out, in, std::move(w)), std::move(b)});
  }
  if (pos != flat.size()) throw std::invalid_argument("flat vector too long for config");
  return p;
}

std::pair<PerExampleGrads, Vec> per_example_grads(const MlpParams& p, const Batch& b) {
  if (b.size() == 0) throw std::invalid_argument("per_example_grads: empty batch");
  if (p.layers.empty() || b.input_dim != p.layers.front().weights.cols) {
    throw std::invalid_argument("per_example_grads: input dimension mismatch");
  }
  const std::size_t classes = p.layers.back().weights.rows;
  for (std::size_t label : b.labels) {
    if (label >= classes) throw std::invalid_argument("per_example_grads: label out of range");
  }

  std::vector<std::size_t> flat_offsets(p.layers.size(), 0);
  for (std::size_t l = 1; l < p.layers.size(); ++l) {
    flat_offsets[l] = flat_offsets[l - 1] + p.layers[l - 1].weights.data.size() +
                      p.layers[l - 1].bias.size();
  }

  const std::size_t d = p.flat_dim();
  PerExampleGrads grads;
  grads.rows = b.size();
  grads.dim = d;
  grads.data.assign(b.size() * d, 0.0);
  Vec losses(b.size(), 0.0);

  parallel_for(b.size(), [&](std::size_t begin, std::size_t end) {
    ForwardScratch scratch;
    Vec dlogits, dz, din;
    for (std::size_t i = begin; i < end; ++i) {
      backward_example(p, flat_offsets, b.example(i), b.input_dim, b.labels[i],
                       grads.row(i), &losses[i], scratch, dlogits, dz, din);
    }
  });
  return {std::move(grads), std::move(losses)};
}

MlpParams apply_update(const MlpParams& p, const Vec& direction, double lr) {
  if (direction.size() != p.flat_dim()) {
    throw std::invalid_argument("apply_update: direction length must equal flat dim");
  }
  MlpParams out = p;
  std::size_t pos = 0;
  for (auto& l : out.layers) {
    for (double& w : l.weights.data) {
      w = w - lr * direction[pos];
      ++pos;
    }
    for (double& bv : l.bias) {
      bv = bv - lr * direction[pos];
      ++pos;
    }
  }
  return out;
}

Matrix probe_matrix(const MlpParams& p, const std::string& layer_ref) {
  if (layer_ref.size() > 2 && layer_ref.compare(0, 2, "fc") == 0) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(layer_ref.substr(2));
    } catch (const std::exception&) {
      idx = 0;
    }
    if (idx >= 1 && idx <= p.layers.size()) return p.layers[idx - 1].weights;
  }
  throw std::out_of_range("probe_matrix: unknown layer ref '" + layer_ref + "'");
}

EvalResult evaluate(const MlpParams& p, const Batch& test) {
  if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
  if (p.layers.empty() || test.input_dim != p.layers.front().weights.cols) {
    throw std::invalid_argument("evaluate: input dimension mismatch");
  }
  const std::size_t classes = p.layers.back().weights.rows;
  for (std::size_t label : test.labels) {
    if (label >= classes) throw std::invalid_argument("evaluate: label out of range");
  }
  ForwardScratch s;
  Vec dlogits;
  std::size_t correct = 0;
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    forward_example(p, test.example(i), test.input_dim, s);
    const Vec& logits = s.pre.back();
    std::size_t argmax = 0;
    for (std::size_t j = 1; j < logits.size(); ++j) {
      if (logits[j] > logits[argmax]) argmax = j;
    }
    if (argmax == test.labels[i]) ++correct;
    loss_sum += softmax_ce(logits, test.labels[i], dlogits);
  }
  return {static_cast<double>(correct) / static_cast<double>(test.size()),
          loss_sum / static_cast<double>(test.size())};
}

Matrix probe_matrix(const ConvKernel& k) {
  if (k.c_out == 0 || k.c_in == 0 || k.kh == 0 || k.kw == 0 ||
      k.data.size() != k.c_out * k.c_in * k.kh * k.kw) {
    throw std::invalid_argument("probe_matrix: malformed conv kernel");
  }
  // [out][in][ky][kx] is already row-major with row = out filter.
  return Matrix(k.c_out, k.c_in * k.kh * k.kw, k.data);
}

ConvKernel refold_conv(const Matrix& m, std::size_t c_in, std::size_t kh, std::size_t kw) {
  if (c_in * kh * kw != m.cols) {
    throw std::invalid_argument("refold_conv: cols must equal c_in*kh*kw");
  }
  return ConvKernel{m.rows, c_in, kh, kw, m.data};
}

}  // namespace specclip
