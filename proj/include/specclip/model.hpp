#pragma once

#include <string>
#include <utility>
#include <vector>

#include "specclip/linalg.hpp"

namespace specclip {

enum class Activation { relu, tanh };

/// Loss is always softmax cross-entropy (natural log); the enum exists so
/// configs can state it explicitly.
enum class Loss { softmax_cross_entropy };

struct MlpConfig {
  std::vector<std::size_t> layer_sizes;  // input dim, hidden dims..., class count
  Activation activation = Activation::relu;
  Loss loss = Loss::softmax_cross_entropy;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t class_count() const { return layer_sizes.back(); }
  void validate() const;
};

/// Layered weights/biases. The canonical flat order is: layers in forward
/// order; within a layer, weights row-major then biases. Clipping and
/// noise act on this vector, so the order is load-bearing.
struct MlpParams {
  struct Layer {
    Matrix weights;  // out x in
    Vec bias;        // out
  };
  std::vector<Layer> layers;
  Activation activation = Activation::relu;

  std::size_t flat_dim() const;
};

/// A labeled set of examples. Row-major inputs; empty batches are legal.
struct Batch {
  std::size_t input_dim = 0;
  Vec inputs;  // size() * input_dim values
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  const double* example(std::size_t i) const { return inputs.data() + i * input_dim; }
  void push_example(const double* x, std::size_t label);
};

/// |L| x d matrix of per-example gradients in canonical flat order.
/// Kept separate from Matrix so diverged (non-finite) gradients can be
/// inspected by the caller instead of failing construction.
struct PerExampleGrads {
  std::size_t rows = 0;
  std::size_t dim = 0;
  Vec data;

  const double* row(std::size_t i) const { return data.data() + i * dim; }
  double* row(std::size_t i) { return data.data() + i * dim; }
};

/// Layer identifiers for spectral probing: "fc1".."fcN" in forward order.
struct ProbeSpec {
  std::vector<std::string> layer_refs;
};

/// Weights ~ N(0, 1/fan_in), biases zero. Draw order: layers in forward
/// order, each layer's weights as one row-major Gaussian block.
MlpParams init_params(const MlpConfig& cfg, RngStream& rng);

Vec flatten(const MlpParams& p);
MlpParams unflatten(const MlpConfig& cfg, const Vec& flat);

/// Row i is the gradient of example i's loss at p, flattened canonically;
/// second element holds the per-example cross-entropy losses. Rows may be
/// computed in parallel; row order is always the batch order.
std::pair<PerExampleGrads, Vec> per_example_grads(const MlpParams& p, const Batch& b);

/// flat(result) = flat(p) - lr * direction, elementwise exact.
MlpParams apply_update(const MlpParams& p, const Vec& direction, double lr);

/// Dense layer weights as-is (out x in). Unknown refs throw.
Matrix probe_matrix(const MlpParams& p, const std::string& layer_ref);

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

/// Argmax accuracy (first index wins ties) and mean cross-entropy.
EvalResult evaluate(const MlpParams& p, const Batch& test);

/// 4-axis convolution kernel, index order [out][in][ky][kx]. The desk
/// model is dense; this exists so the probe path also accepts conv
/// tensors from external checkpoints.
struct ConvKernel {
  std::size_t c_out = 0, c_in = 0, kh = 0, kw = 0;
  Vec data;
};

/// Reshape to c_out x (c_in*kh*kw); row = one output filter.
Matrix probe_matrix(const ConvKernel& k);

/// Inverse of the reshape; bit-exact round trip.
ConvKernel refold_conv(const Matrix& m, std::size_t c_in, std::size_t kh, std::size_t kw);

}  // namespace specclip
