// Copyright 2026 The FedRE Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "fedre/rng.hpp"
#include "fedre/tensor.hpp"

// Minimal dense/convolutional network engine with exact backpropagation,
// sized for pixel-wise binary segmentation on desk-scale images. All
// operations are pure functions of their arguments (plus an explicit RNG
// for initialization), so distinct inputs can be processed from multiple
// threads without shared state.

namespace fedre {

// Loss attached to a model. The segmentation task uses per-pixel binary
// cross-entropy on a sigmoid head; half squared error (0.5 * sum((pred-y)^2),
// no averaging) exists for tiny closed-form oracle models.
enum class LossKind { kBinaryCrossEntropy, kHalfSquaredError };

struct DenseSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  bool has_bias = true;
};

struct Conv2DSpec {
  std::size_t in_ch = 0;
  std::size_t out_ch = 0;
  std::size_t kernel = 0;
  std::size_t pad = 0;
  bool has_bias = true;
};

struct ReluSpec {};
struct SigmoidHeadSpec {};

using LayerSpec = std::variant<DenseSpec, Conv2DSpec, ReluSpec, SigmoidHeadSpec>;

inline bool layer_has_params(const LayerSpec& s) {
  return std::holds_alternative<DenseSpec>(s) || std::holds_alternative<Conv2DSpec>(s);
}

// Weight and bias for one parameterized layer. bias is an empty tensor when
// the layer was built without one.
struct LayerParams {
  Tensor weight;
  Tensor bias;
  std::size_t count() const { return weight.numel() + bias.numel(); }
};

struct LayerGradient {
  Tensor weight;
  Tensor bias;
  std::size_t count() const { return weight.numel() + bias.numel(); }
};

// Per-layer parameter gradients for one client/sample batch. per_layer has
// one entry per parameterized layer, shape-matching that layer's parameters.
struct GradientSet {
  std::vector<LayerGradient> per_layer;
  std::size_t sample_count = 1;
};

// L2 norm over the layer's full parameter gradient (weight and bias jointly).
double layer_gradient_norm(const LayerGradient& g);

class Model {
 public:
  // Validates that consecutive layer shapes compose starting from
  // input_shape (rank 1 for dense stacks, rank 3 as channels x H x W for
  // convolutional ones) and that a cross-entropy model ends in a sigmoid
  // head. Parameters start at zero; call init_params for seeded Glorot
  // initialization.
  Model(std::vector<LayerSpec> layers, std::vector<std::size_t> input_shape,
        LossKind loss = LossKind::kBinaryCrossEntropy);

  // Draws every parameter from uniform(-s, s), s = sqrt(6/(fan_in+fan_out)).
  void init_params(CounterRng& rng);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<std::size_t>& input_shape() const { return input_shape_; }
  const std::vector<std::size_t>& output_shape() const { return output_shape_; }
  LossKind loss_kind() const { return loss_kind_; }

  // Number of parameterized layers; activations do not count.
  std::size_t layer_count() const { return params_.size(); }

  const LayerParams& params(std::size_t l) const { return params_[l]; }
  LayerParams& params(std::size_t l) { return params_[l]; }
  std::size_t param_count(std::size_t l) const { return params_[l].count(); }

  // Zero-shaped gradient matching this model's parameters.
  GradientSet zero_gradients() const;

 private:
  std::vector<LayerSpec> layers_;
  std::vector<LayerParams> params_;
  std::vector<std::size_t> input_shape_;
  std::vector<std::size_t> output_shape_;
  LossKind loss_kind_;
};

// Reusable buffers for forward/backward passes. Not thread-safe; use one
// workspace per thread. Bound to a model's shapes on first use.
class Workspace {
 public:
  Workspace() = default;
  const GradientSet& gradients() const { return grads_; }

 private:
  friend const Tensor& forward_into(const Model&, const Tensor&, Workspace&);
  friend const GradientSet& backward_into(const Model&, const Tensor&,
                                          const Tensor&, Workspace&);
  std::vector<Tensor> acts_;
  std::vector<Tensor> deltas_;  // same shapes as acts_
  std::vector<Tensor> padded_;  // one per conv layer (padded input image)
  std::vector<Tensor> dpad_;
  Tensor dinput_;
  GradientSet grads_;
  const Model* bound_ = nullptr;
};

// Runs the model on one input. Output of the sigmoid head lies in [0,1].
Tensor forward(const Model& model, const Tensor& input);
const Tensor& forward_into(const Model& model, const Tensor& input, Workspace& ws);

// Mean per-pixel binary cross-entropy. Predictions are clamped to
// [1e-7, 1-1e-7] before the logs; mask entries must be 0 or 1.
double loss(const Tensor& pred, const Tensor& mask);

// Loss under the model's own LossKind (the value backward differentiates).
double model_loss(const Model& model, const Tensor& input, const Tensor& mask);

// Exact analytic gradients of model_loss with respect to every parameter.
GradientSet backward(const Model& model, const Tensor& input, const Tensor& mask);
const GradientSet& backward_into(const Model& model, const Tensor& input,
                                 const Tensor& mask, Workspace& ws);

// Central finite difference of the layer-l parameter gradient with respect
// to each input coordinate. Result shape is (P_l, c, H, W) with the layer's
// parameters ordered weight-first, bias last; rank-1 inputs are reported as
// (P_l, 1, 1, D). Cost is two backward passes per input coordinate.
Tensor grad_input_jacobian(const Model& model, const Tensor& input,
                           const Tensor& mask, std::size_t layer, double h = 1e-4);

}  // namespace fedre
