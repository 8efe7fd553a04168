#include "pourlab/mlp.hpp"

#include <cmath>
#include <string>

#include "pourlab/error.hpp"

namespace pourlab::rl {

std::size_t MlpShape::param_count() const {
  std::size_t n = 0;
  for (int l = 0; l < layer_count(); ++l) {
    n += static_cast<std::size_t>(sizes[l + 1]) * (sizes[l] + 1);
  }
  return n;
}

std::span<const double> mlp_forward(const MlpShape& shape, std::span<const double> params,
                                    std::span<const double> input, MlpCache& cache,
                                    std::uint64_t generation) {
  if (shape.sizes.size() < 2) throw UsageError("mlp_forward: shape needs >= 2 layers");
  if (static_cast<int>(input.size()) != shape.input_size()) {
    throw UsageError("mlp_forward: input size " + std::to_string(input.size()) +
                     " != " + std::to_string(shape.input_size()));
  }
  if (params.size() != shape.param_count()) throw UsageError("mlp_forward: param size mismatch");

  const int layers = shape.layer_count();
  cache.activations.resize(layers + 1);
  cache.activations[0].assign(input.begin(), input.end());
  const double* p = params.data();
  for (int l = 0; l < layers; ++l) {
    const int in = shape.sizes[l];
    const int out = shape.sizes[l + 1];
    const std::vector<double>& x = cache.activations[l];
    std::vector<double>& y = cache.activations[l + 1];
    y.resize(out);
    const double* w = p;
    const double* b = p + static_cast<std::size_t>(out) * in;
    const bool hidden = l + 1 < layers;
    for (int o = 0; o < out; ++o) {
      const double* row = w + static_cast<std::size_t>(o) * in;
      double acc = b[o];
      for (int i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = hidden ? std::tanh(acc) : acc;
    }
    p = b + out;
  }
  cache.params = params.data();
  cache.generation = generation;
  cache.filled = true;
  return cache.output();
}

void mlp_backward(const MlpShape& shape, std::span<const double> params, const MlpCache& cache,
                  std::span<const double> output_grad, std::span<double> grad,
                  std::span<double> input_grad, std::uint64_t generation) {
  const int layers = shape.layer_count();
  if (!cache.filled || cache.params != params.data() || cache.generation != generation ||
      static_cast<int>(cache.activations.size()) != layers + 1) {
    throw UsageError("mlp_backward: stale or foreign cache");
  }
  if (static_cast<int>(output_grad.size()) != shape.output_size()) {
    throw UsageError("mlp_backward: output gradient size mismatch");
  }
  if (grad.size() != params.size() || params.size() != shape.param_count()) {
    throw UsageError("mlp_backward: gradient buffer size mismatch");
  }

  // Walk layers backwards; `delta` is d(loss)/d(pre-activation) of layer l.
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  std::vector<double> upstream;
  std::size_t offset = params.size();
  for (int l = layers - 1; l >= 0; --l) {
    const int in = shape.sizes[l];
    const int out = shape.sizes[l + 1];
    offset -= static_cast<std::size_t>(out) * (in + 1);
    const double* w = params.data() + offset;
    double* gw = grad.data() + offset;
    double* gb = gw + static_cast<std::size_t>(out) * in;
    const std::vector<double>& x = cache.activations[l];

    upstream.assign(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      gb[o] += d;
      double* grow = gw + static_cast<std::size_t>(o) * in;
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) {
        grow[i] += d * x[i];
        upstream[i] += d * row[i];
      }
    }
    if (l > 0) {
      // x is tanh output of the previous layer: d tanh = 1 - y^2.
      for (int i = 0; i < in; ++i) upstream[i] *= 1.0 - x[i] * x[i];
    }
    delta.swap(upstream);
  }
  if (!input_grad.empty()) {
    if (static_cast<int>(input_grad.size()) != shape.input_size()) {
      throw UsageError("mlp_backward: input gradient size mismatch");
    }
    for (std::size_t i = 0; i < input_grad.size(); ++i) input_grad[i] = delta[i];
  }
}

void mlp_init(const MlpShape& shape, std::span<double> params, std::mt19937_64& rng,
              double hidden_gain, double output_gain) {
  if (params.size() != shape.param_count()) throw UsageError("mlp_init: param size mismatch");
  std::normal_distribution<double> normal(0.0, 1.0);
  double* p = params.data();
  for (int l = 0; l < shape.layer_count(); ++l) {
    const int in = shape.sizes[l];
    const int out = shape.sizes[l + 1];
    const double gain = (l + 1 == shape.layer_count()) ? output_gain : hidden_gain;
    const double scale = gain / std::sqrt(static_cast<double>(in));
    for (int k = 0; k < out * in; ++k) *p++ = scale * normal(rng);
    for (int k = 0; k < out; ++k) *p++ = 0.0;
  }
}

}  // namespace pourlab::rl
