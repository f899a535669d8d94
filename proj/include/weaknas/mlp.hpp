#pragma once
// Fully connected regressor: hidden layers with a configurable activation,
// a single linear output unit, squared-error loss.

#include <cstdint>
#include <span>
#include <vector>

#include "weaknas/encoding.hpp"

namespace weaknas {

enum class Activation { Relu, Linear };

struct MlpConfig {
  std::vector<std::size_t> hidden{1000, 1000, 1000, 1000};
  int epochs = 200;
  double step_size = 1e-3;
  std::size_t batch_size = 32;
  Activation activation = Activation::Relu;
  // Multiplies the He-uniform initialization range; 0 gives an all-zero net.
  double init_scale = 1.0;
};

class Mlp {
 public:
  Mlp(std::size_t inputs, std::vector<std::size_t> hidden, Activation activation, std::uint64_t seed,
      double init_scale = 1.0);

  std::size_t inputs() const { return layer_sizes_.front(); }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
  Activation activation() const { return activation_; }

  double forward(std::span<const double> x) const;

  /// Mean squared error over `rows` of (features, targets) and its gradient
  /// with respect to parameters(); `grad` is overwritten.
  double loss_and_gradient(const FeatureMatrix& features, std::span<const double> targets,
                           std::span<const std::uint32_t> rows, std::span<double> grad) const;

  double loss(const FeatureMatrix& features, std::span<const double> targets,
              std::span<const std::uint32_t> rows) const;

  /// Mini-batch training with Adam on the given targets. Returns the mean
  /// training loss of each epoch.
  std::vector<double> train(const FeatureMatrix& features, std::span<const double> targets, const MlpConfig& config,
                            std::uint64_t seed);

 private:
  struct Layer {
    std::size_t in;
    std::size_t out;
    std::size_t weight_offset;  // out x in, row-major
    std::size_t bias_offset;
  };

  void forward_store(std::span<const double> x, std::vector<std::vector<double>>& pre,
                     std::vector<std::vector<double>>& post) const;

  std::vector<std::size_t> layer_sizes_;
  std::vector<Layer> layers_;
  Activation activation_;
  std::vector<double> params_;
};

}  // namespace weaknas
