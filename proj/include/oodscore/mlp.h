//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_MLP_H_
#define OODSCORE_MLP_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "oodscore/rng.h"

namespace oodscore {

enum class Activation { kRelu, kGelu };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view text);

// Row-major dense matrix of feature vectors.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const {
    return { data.data() + i * cols, cols };
  }
  std::span<double> row(std::size_t i) { return { data.data() + i * cols, cols }; }
};

// Fully connected regressor with a single linear output unit.
//
// Parameters are stored flat, layer by layer: the weight matrix
// (fan_out x fan_in, row-major) followed by the bias vector. Hidden layers
// apply the activation and then (in training) inverted dropout.
class Mlp {
public:
  Mlp() = default;
  Mlp(std::size_t input_dim, std::vector<std::size_t> hidden_sizes,
      Activation activation);

  std::size_t input_dimension() const { return sizes_.front(); }
  const std::vector<std::size_t> &layer_sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  double &output_bias() { return params_.back(); }
  double output_bias() const { return params_.back(); }

  // He-uniform weights, zero biases.
  void initialize(Rng &rng);

  double predict(std::span<const double> x) const;

  // Mean squared error over `batch` (row indices of `x`) with its gradient
  // written to `grad` (overwritten, size parameter_count()). Dropout is
  // applied to hidden activations when dropout_rate > 0, drawing masks
  // from `rng`.
  double loss_and_gradient(const FeatureMatrix &x, std::span<const double> y,
                           std::span<const std::size_t> batch,
                           std::span<double> grad, double dropout_rate = 0.0,
                           Rng *rng = nullptr) const;

  // Same loss without computing gradients, using explicit parameters.
  double loss(const FeatureMatrix &x, std::span<const double> y,
              std::span<const std::size_t> batch) const;

private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + sizes_[layer + 1] * sizes_[layer];
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  Activation activation_ = Activation::kRelu;
  std::vector<double> params_;
};

// Adam with bias correction.
class Adam {
public:
  Adam(std::size_t n, double learning_rate, double beta1 = 0.9,
       double beta2 = 0.999, double epsilon = 1e-8);

  void step(std::span<double> params, std::span<const double> grad);

private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace oodscore

#endif  // OODSCORE_MLP_H_
