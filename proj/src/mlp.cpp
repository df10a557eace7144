//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/mlp.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oodscore/errors.h"

namespace oodscore {

std::string_view to_string(Activation act) {
  return act == Activation::kRelu ? "relu" : "gelu";
}

Activation parse_activation(std::string_view text) {
  if (text == "relu")
    return Activation::kRelu;
  if (text == "gelu")
    return Activation::kGelu;
  throw ValidationError("unknown activation '" + std::string(text)
                        + "' (expected relu or gelu)");
}

namespace {
double activate(Activation act, double z) {
  if (act == Activation::kRelu)
    return z > 0 ? z : 0.0;
  return 0.5 * z * (1.0 + std::erf(z * std::numbers::sqrt2 / 2.0));
}

double activate_derivative(Activation act, double z) {
  if (act == Activation::kRelu)
    return z > 0 ? 1.0 : 0.0;
  const double cdf = 0.5 * (1.0 + std::erf(z * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * z * z) * std::numbers::inv_sqrtpi
                     / std::numbers::sqrt2;
  return cdf + z * pdf;
}
}  // namespace

Mlp::Mlp(std::size_t input_dim, std::vector<std::size_t> hidden_sizes,
         Activation activation)
    : activation_(activation) {
  if (input_dim == 0)
    throw ValidationError("mlp: input dimension must be positive");
  sizes_.push_back(input_dim);
  for (auto h: hidden_sizes) {
    if (h == 0)
      throw ValidationError("mlp: hidden sizes must be positive");
    sizes_.push_back(h);
  }
  sizes_.push_back(1);

  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(offset);
    offset += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_.assign(offset, 0.0);
}

void Mlp::initialize(Rng &rng) {
  std::fill(params_.begin(), params_.end(), 0.0);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(sizes_[l]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    const std::size_t n = sizes_[l + 1] * sizes_[l];
    double *w = params_.data() + weight_offset(l);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = dist(rng);
  }
}

double Mlp::predict(std::span<const double> x) const {
  if (x.size() != input_dimension())
    throw ValidationError("mlp: input has dimension " + std::to_string(x.size())
                          + ", expected " + std::to_string(input_dimension()));
  std::vector<double> cur(x.begin(), x.end()), next;
  const std::size_t n_layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const double *w = params_.data() + weight_offset(l);
    const double *b = params_.data() + bias_offset(l);
    next.assign(out, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      double z = b[j];
      const double *wr = w + j * in;
      for (std::size_t i = 0; i < in; ++i)
        z += wr[i] * cur[i];
      next[j] = (l + 1 < n_layers) ? activate(activation_, z) : z;
    }
    cur.swap(next);
  }
  return cur[0];
}

double Mlp::loss(const FeatureMatrix &x, std::span<const double> y,
                 std::span<const std::size_t> batch) const {
  double total = 0;
  for (auto idx: batch) {
    const double d = predict(x.row(idx)) - y[idx];
    total += d * d;
  }
  return total / static_cast<double>(batch.size());
}

double Mlp::loss_and_gradient(const FeatureMatrix &x, std::span<const double> y,
                              std::span<const std::size_t> batch,
                              std::span<double> grad, double dropout_rate,
                              Rng *rng) const {
  if (grad.size() != params_.size())
    throw ValidationError("mlp: gradient buffer has the wrong size");
  if (batch.empty())
    throw ValidationError("mlp: empty batch");
  if (x.cols != input_dimension())
    throw ValidationError("mlp: feature matrix has the wrong dimension");
  const bool dropout = dropout_rate > 0.0;
  if (dropout && rng == nullptr)
    throw ValidationError("mlp: dropout requires a random generator");

  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t n_layers = sizes_.size() - 1;
  const double keep_scale = dropout ? 1.0 / (1.0 - dropout_rate) : 1.0;
  std::bernoulli_distribution drop(dropout ? dropout_rate : 0.0);

  // acts[0] is the input, acts[l] the (post-dropout) output of layer l.
  std::vector<std::vector<double>> pre(n_layers), acts(n_layers + 1),
      masks(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    pre[l].resize(sizes_[l + 1]);
    acts[l + 1].resize(sizes_[l + 1]);
    masks[l].assign(sizes_[l + 1], 1.0);
  }
  std::vector<double> delta, prev_delta;

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0;
  for (auto idx: batch) {
    const auto row = x.row(idx);
    acts[0].assign(row.begin(), row.end());

    for (std::size_t l = 0; l < n_layers; ++l) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const double *w = params_.data() + weight_offset(l);
      const double *b = params_.data() + bias_offset(l);
      const bool hidden = l + 1 < n_layers;
      for (std::size_t j = 0; j < out; ++j) {
        double z = b[j];
        const double *wr = w + j * in;
        for (std::size_t i = 0; i < in; ++i)
          z += wr[i] * acts[l][i];
        pre[l][j] = z;
        if (hidden) {
          double a = activate(activation_, z);
          if (dropout) {
            masks[l][j] = drop(*rng) ? 0.0 : keep_scale;
            a *= masks[l][j];
          }
          acts[l + 1][j] = a;
        } else {
          acts[l + 1][j] = z;
        }
      }
    }

    const double err = acts[n_layers][0] - y[idx];
    total += err * err;

    delta.assign(1, 2.0 * err * inv_b);
    for (std::size_t l = n_layers; l-- > 0;) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const double *w = params_.data() + weight_offset(l);
      double *gw = grad.data() + weight_offset(l);
      double *gb = grad.data() + bias_offset(l);
      for (std::size_t j = 0; j < out; ++j) {
        const double d = delta[j];
        if (d == 0.0)
          continue;
        gb[j] += d;
        double *gr = gw + j * in;
        for (std::size_t i = 0; i < in; ++i)
          gr[i] += d * acts[l][i];
      }
      if (l == 0)
        break;
      prev_delta.assign(in, 0.0);
      for (std::size_t j = 0; j < out; ++j) {
        const double d = delta[j];
        if (d == 0.0)
          continue;
        const double *wr = w + j * in;
        for (std::size_t i = 0; i < in; ++i)
          prev_delta[i] += wr[i] * d;
      }
      for (std::size_t i = 0; i < in; ++i) {
        prev_delta[i] *= activate_derivative(activation_, pre[l - 1][i])
                         * masks[l - 1][i];
      }
      delta.swap(prev_delta);
    }
  }
  return total * inv_b;
}

Adam::Adam(std::size_t n, double learning_rate, double beta1, double beta2,
           double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon),
      m_(n, 0.0), v_(n, 0.0) {
  if (!(learning_rate >= 0))
    throw ValidationError("adam: learning rate must be >= 0");
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1 - beta2_) * grad[i] * grad[i];
    const double mhat = m_[i] / c1, vhat = v_[i] / c2;
    params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

}  // namespace oodscore
