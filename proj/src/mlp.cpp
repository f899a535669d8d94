#include "weaknas/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "weaknas/kernels.hpp"
#include "weaknas/rng.hpp"

namespace weaknas {

Mlp::Mlp(std::size_t inputs, std::vector<std::size_t> hidden, Activation activation, std::uint64_t seed,
         double init_scale)
    : activation_(activation) {
  if (inputs == 0) throw std::invalid_argument("MLP needs at least one input");
  for (std::size_t h : hidden) {
    if (h == 0) throw std::invalid_argument("MLP hidden widths must be positive");
  }
  layer_sizes_.push_back(inputs);
  layer_sizes_.insert(layer_sizes_.end(), hidden.begin(), hidden.end());
  layer_sizes_.push_back(1);

  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    Layer layer{layer_sizes_[l], layer_sizes_[l + 1], offset, offset + layer_sizes_[l] * layer_sizes_[l + 1]};
    offset = layer.bias_offset + layer.out;
    layers_.push_back(layer);
  }
  params_.assign(offset, 0.0);

  Rng rng(seed);
  for (const Layer& layer : layers_) {
    const double limit = init_scale * std::sqrt(6.0 / static_cast<double>(layer.in));
    for (std::size_t k = 0; k < layer.in * layer.out; ++k) {
      params_[layer.weight_offset + k] = rng.uniform(-limit, limit);
    }
  }
}

void Mlp::forward_store(std::span<const double> x, std::vector<std::vector<double>>& pre,
                        std::vector<std::vector<double>>& post) const {
  pre.resize(layers_.size());
  post.resize(layers_.size() + 1);
  post[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    auto& z = pre[l];
    z.resize(layer.out);
    for (std::size_t i = 0; i < layer.out; ++i) {
      const std::span<const double> w(params_.data() + layer.weight_offset + i * layer.in, layer.in);
      z[i] = kernels::dot(w, post[l]) + params_[layer.bias_offset + i];
    }
    auto& a = post[l + 1];
    a.resize(layer.out);
    const bool hidden = l + 1 < layers_.size();
    if (hidden && activation_ == Activation::Relu) {
      kernels::relu(z, a);
    } else {
      std::copy(z.begin(), z.end(), a.begin());
    }
  }
}

double Mlp::forward(std::span<const double> x) const {
  if (x.size() != inputs()) throw std::invalid_argument("MLP input length mismatch");
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  forward_store(x, pre, post);
  return post.back()[0];
}

double Mlp::loss(const FeatureMatrix& features, std::span<const double> targets,
                 std::span<const std::uint32_t> rows) const {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  double total = 0.0;
  for (std::uint32_t r : rows) {
    forward_store(features.row(r), pre, post);
    const double err = post.back()[0] - targets[r];
    total += err * err;
  }
  return total / static_cast<double>(rows.size());
}

double Mlp::loss_and_gradient(const FeatureMatrix& features, std::span<const double> targets,
                              std::span<const std::uint32_t> rows, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer size mismatch");
  if (features.cols() != inputs()) throw std::invalid_argument("MLP input length mismatch");
  if (rows.empty()) throw std::invalid_argument("loss over an empty batch");
  std::fill(grad.begin(), grad.end(), 0.0);

  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  std::vector<double> delta;
  std::vector<double> delta_prev;
  const double scale = 2.0 / static_cast<double>(rows.size());
  double total = 0.0;
  for (std::uint32_t r : rows) {
    forward_store(features.row(r), pre, post);
    const double err = post.back()[0] - targets[r];
    total += err * err;
    delta.assign(1, scale * err);
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const Layer& layer = layers_[l];
      for (std::size_t i = 0; i < layer.out; ++i) {
        kernels::axpy(delta[i], post[l], grad.subspan(layer.weight_offset + i * layer.in, layer.in));
        grad[layer.bias_offset + i] += delta[i];
      }
      if (l == 0) break;
      delta_prev.assign(layer.in, 0.0);
      for (std::size_t i = 0; i < layer.out; ++i) {
        const std::span<const double> w(params_.data() + layer.weight_offset + i * layer.in, layer.in);
        kernels::axpy(delta[i], w, delta_prev);
      }
      if (activation_ == Activation::Relu) {
        const auto& z = pre[l - 1];
        for (std::size_t k = 0; k < delta_prev.size(); ++k) {
          if (!(z[k] > 0.0)) delta_prev[k] = 0.0;
        }
      }
      delta.swap(delta_prev);
    }
  }
  return total / static_cast<double>(rows.size());
}

std::vector<double> Mlp::train(const FeatureMatrix& features, std::span<const double> targets,
                               const MlpConfig& config, std::uint64_t seed) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  const std::size_t n = features.rows();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), std::uint32_t{0});
  std::vector<double> grad(params_.size());
  std::vector<double> m(params_.size(), 0.0);
  std::vector<double> v(params_.size(), 0.0);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(config.epochs));
  Rng rng(seed);
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  const std::size_t batch = std::max<std::size_t>(config.batch_size, 1);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::uint32_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      const std::span<const std::uint32_t> rows(order.data() + start, count);
      epoch_loss += loss_and_gradient(features, targets, rows, grad) * static_cast<double>(count);
      beta1_pow *= kBeta1;
      beta2_pow *= kBeta2;
      const double lr = config.step_size * std::sqrt(1.0 - beta2_pow) / (1.0 - beta1_pow);
      for (std::size_t k = 0; k < params_.size(); ++k) {
        m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * grad[k];
        v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * grad[k] * grad[k];
        params_[k] -= lr * m[k] / (std::sqrt(v[k]) + kEps);
      }
    }
    trace.push_back(epoch_loss / static_cast<double>(n));
  }
  return trace;
}

}  // namespace weaknas
