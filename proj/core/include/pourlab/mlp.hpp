#ifndef POURLAB_MLP_HPP_
#define POURLAB_MLP_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pourlab::rl {

// Fully connected network: tanh on hidden layers, linear output head.
// Parameters live in a caller-owned flat buffer, layer by layer:
// W (out x in, row-major) followed by b (out).
struct MlpShape {
  std::vector<int> sizes;  // input, hidden..., output

  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }
  int layer_count() const { return static_cast<int>(sizes.size()) - 1; }
  std::size_t param_count() const;
  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

// Activations recorded by mlp_forward for the matching backward pass.
struct MlpCache {
  std::vector<std::vector<double>> activations;  // [0] = input, back() = output
  const double* params = nullptr;
  std::uint64_t generation = 0;
  bool filled = false;

  std::span<const double> output() const { return activations.back(); }
};

// Evaluates the network and fills `cache`. `generation` tags the parameter
// version so that a later backward with updated parameters is rejected.
// Throws UsageError on dimension mismatch.
std::span<const double> mlp_forward(const MlpShape& shape, std::span<const double> params,
                                    std::span<const double> input, MlpCache& cache,
                                    std::uint64_t generation = 0);

// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
// Optionally writes d(loss)/d(input). Throws UsageError on a stale cache.
void mlp_backward(const MlpShape& shape, std::span<const double> params, const MlpCache& cache,
                  std::span<const double> output_grad, std::span<double> grad,
                  std::span<double> input_grad = {}, std::uint64_t generation = 0);

// Gaussian init with std = gain / sqrt(fan_in); the output layer uses
// `output_gain` instead. Biases start at zero.
void mlp_init(const MlpShape& shape, std::span<double> params, std::mt19937_64& rng,
              double hidden_gain, double output_gain);

}  // namespace pourlab::rl

#endif  // POURLAB_MLP_HPP_
