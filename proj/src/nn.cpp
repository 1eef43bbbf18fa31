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

#include "fedre/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "fedre/kernels.hpp"

namespace fedre {

namespace {

constexpr double kClampLo = 1e-7;
constexpr double kClampHi = 1.0 - 1e-7;

double stable_sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::string shape_str(const std::vector<std::size_t>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

void check_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) {
    throw NumericError(std::string("non-finite value in ") + what);
  }
}

}  // namespace

double layer_gradient_norm(const LayerGradient& g) {
  double sq = kern::sum_squares(g.weight.ptr(), g.weight.numel());
  sq += kern::sum_squares(g.bias.ptr(), g.bias.numel());
  return std::sqrt(sq);
}

Model::Model(std::vector<LayerSpec> layers, std::vector<std::size_t> input_shape,
             LossKind loss)
    : layers_(std::move(layers)), input_shape_(std::move(input_shape)),
      loss_kind_(loss) {
  if (layers_.empty()) throw ValidationError("model needs at least one layer");
  std::vector<std::size_t> cur = input_shape_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& spec = layers_[i];
    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
      if (d->in == 0 || d->out == 0) throw ValidationError("dense layer sizes must be positive");
      if (cur.size() != 1 || cur[0] != d->in) {
        throw ValidationError("dense layer " + std::to_string(i) + " expects input (" +
                              std::to_string(d->in) + "), got " + shape_str(cur));
      }
      LayerParams p;
      p.weight = Tensor::zeros({d->out, d->in});
      if (d->has_bias) p.bias = Tensor::zeros({d->out});
      params_.push_back(std::move(p));
      cur = {d->out};
    } else if (const auto* c = std::get_if<Conv2DSpec>(&spec)) {
      if (c->in_ch == 0 || c->out_ch == 0 || c->kernel == 0) {
        throw ValidationError("conv layer sizes must be positive");
      }
      if (cur.size() != 3 || cur[0] != c->in_ch) {
        throw ValidationError("conv layer " + std::to_string(i) + " expects " +
                              std::to_string(c->in_ch) + " input channels, got " +
                              shape_str(cur));
      }
      const std::size_t h = cur[1] + 2 * c->pad;
      const std::size_t w = cur[2] + 2 * c->pad;
      if (h < c->kernel || w < c->kernel) {
        throw ValidationError("conv layer " + std::to_string(i) +
                              " kernel larger than padded input");
      }
      LayerParams p;
      p.weight = Tensor::zeros({c->out_ch, c->in_ch, c->kernel, c->kernel});
      if (c->has_bias) p.bias = Tensor::zeros({c->out_ch});
      params_.push_back(std::move(p));
      cur = {c->out_ch, h - c->kernel + 1, w - c->kernel + 1};
    } else if (std::holds_alternative<SigmoidHeadSpec>(spec)) {
      if (i + 1 != layers_.size()) {
        throw ValidationError("sigmoid head must be the final layer");
      }
    }
    // ReLU and the sigmoid head preserve shape.
  }
  output_shape_ = cur;
  if (loss_kind_ == LossKind::kBinaryCrossEntropy &&
      !std::holds_alternative<SigmoidHeadSpec>(layers_.back())) {
    throw ValidationError("cross-entropy model must end with a sigmoid head");
  }
}

void Model::init_params(CounterRng& rng) {
  std::size_t pidx = 0;
  for (const LayerSpec& spec : layers_) {
    if (!layer_has_params(spec)) continue;
    double fan_in = 0.0, fan_out = 0.0;
    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
      fan_in = static_cast<double>(d->in);
      fan_out = static_cast<double>(d->out);
    } else {
      const auto& c = std::get<Conv2DSpec>(spec);
      fan_in = static_cast<double>(c.in_ch * c.kernel * c.kernel);
      fan_out = static_cast<double>(c.out_ch * c.kernel * c.kernel);
    }
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    LayerParams& p = params_[pidx++];
    for (double& v : p.weight.data) v = rng.next_double(-s, s);
    for (double& v : p.bias.data) v = rng.next_double(-s, s);
  }
}

GradientSet Model::zero_gradients() const {
  GradientSet g;
  g.per_layer.reserve(params_.size());
  for (const LayerParams& p : params_) {
    LayerGradient lg;
    lg.weight = Tensor::zeros(p.weight.shape);
    lg.bias = p.bias.numel() ? Tensor::zeros(p.bias.shape) : Tensor{};
    g.per_layer.push_back(std::move(lg));
  }
  return g;
}

namespace {

// Copies (c, H, W) into a zero-bordered (c, H+2p, W+2p) buffer.
void pad_image(const Tensor& in, std::size_t pad, Tensor& out) {
  const std::size_t c = in.shape[0], h = in.shape[1], w = in.shape[2];
  const std::size_t ph = h + 2 * pad, pw = w + 2 * pad;
  std::fill(out.data.begin(), out.data.end(), 0.0);
  for (std::size_t ic = 0; ic < c; ++ic) {
    for (std::size_t y = 0; y < h; ++y) {
      const double* src = in.ptr() + (ic * h + y) * w;
      double* dst = out.ptr() + (ic * ph + y + pad) * pw + pad;
      std::memcpy(dst, src, w * sizeof(double));
    }
  }
}

void bind_workspace(const Model& model, Workspace& ws, std::vector<Tensor>& acts,
                    std::vector<Tensor>& deltas, std::vector<Tensor>& padded,
                    std::vector<Tensor>& dpad, Tensor& dinput, GradientSet& grads) {
  acts.clear();
  deltas.clear();
  padded.clear();
  dpad.clear();
  std::vector<std::size_t> cur = model.input_shape();
  for (const LayerSpec& spec : model.layers()) {
    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
      cur = {d->out};
    } else if (const auto* c = std::get_if<Conv2DSpec>(&spec)) {
      const std::size_t ph = cur[1] + 2 * c->pad, pw = cur[2] + 2 * c->pad;
      padded.push_back(Tensor::zeros({c->in_ch, ph, pw}));
      dpad.push_back(Tensor::zeros({c->in_ch, ph, pw}));
      cur = {c->out_ch, ph - c->kernel + 1, pw - c->kernel + 1};
    }
    acts.push_back(Tensor::zeros(cur));
    deltas.push_back(Tensor::zeros(cur));
  }
  dinput = Tensor::zeros(model.input_shape());
  grads = model.zero_gradients();
  (void)ws;
}

}  // namespace

const Tensor& forward_into(const Model& model, const Tensor& input, Workspace& ws) {
  if (input.shape != model.input_shape()) {
    throw ValidationError("input shape " + shape_str(input.shape) +
                          " does not match model input " +
                          shape_str(model.input_shape()));
  }
  if (ws.bound_ != &model) {
    bind_workspace(model, ws, ws.acts_, ws.deltas_, ws.padded_, ws.dpad_,
                   ws.dinput_, ws.grads_);
    ws.bound_ = &model;
  }
  const Tensor* cur = &input;
  std::size_t pidx = 0, cidx = 0;
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    const LayerSpec& spec = model.layers()[i];
    Tensor& out = ws.acts_[i];
    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
      const LayerParams& p = model.params(pidx++);
      for (std::size_t o = 0; o < d->out; ++o) {
        out.data[o] = kern::dot(p.weight.ptr() + o * d->in, cur->ptr(), d->in) +
                      (d->has_bias ? p.bias.data[o] : 0.0);
      }
    } else if (const auto* c = std::get_if<Conv2DSpec>(&spec)) {
      const LayerParams& p = model.params(pidx++);
      Tensor& padbuf = ws.padded_[cidx++];
      pad_image(*cur, c->pad, padbuf);
      const std::size_t k = c->kernel;
      const std::size_t pw = padbuf.shape[2];
      const std::size_t oh = out.shape[1], ow = out.shape[2];
      for (std::size_t oc = 0; oc < c->out_ch; ++oc) {
        const double b = c->has_bias ? p.bias.data[oc] : 0.0;
        double* orow0 = out.ptr() + oc * oh * ow;
        std::fill(orow0, orow0 + oh * ow, b);
        for (std::size_t ic = 0; ic < c->in_ch; ++ic) {
          const double* wbase = p.weight.ptr() + (oc * c->in_ch + ic) * k * k;
          for (std::size_t y = 0; y < oh; ++y) {
            double* orow = orow0 + y * ow;
            for (std::size_t ky = 0; ky < k; ++ky) {
              const double* prow = padbuf.ptr() + (ic * padbuf.shape[1] + y + ky) * pw;
              for (std::size_t kx = 0; kx < k; ++kx) {
                kern::axpy(wbase[ky * k + kx], prow + kx, orow, ow);
              }
            }
          }
        }
      }
    } else if (std::holds_alternative<ReluSpec>(spec)) {
      for (std::size_t j = 0; j < out.numel(); ++j) {
        out.data[j] = cur->data[j] > 0.0 ? cur->data[j] : 0.0;
      }
    } else {
      for (std::size_t j = 0; j < out.numel(); ++j) {
        out.data[j] = stable_sigmoid(cur->data[j]);
      }
    }
    cur = &out;
  }
  check_finite(*cur, "forward output");
  return *cur;
}

Tensor forward(const Model& model, const Tensor& input) {
  Workspace ws;
  return forward_into(model, input, ws);
}

double loss(const Tensor& pred, const Tensor& mask) {
  if (pred.shape != mask.shape) {
    throw ValidationError("loss: prediction and mask shapes differ");
  }
  const std::size_t n = pred.numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = mask.data[i];
    if (m != 0.0 && m != 1.0) {
      throw ValidationError("loss: mask entries must be 0 or 1");
    }
    const double p = std::clamp(pred.data[i], kClampLo, kClampHi);
    acc -= m * std::log(p) + (1.0 - m) * std::log(1.0 - p);
  }
  return acc / static_cast<double>(n);
}

double model_loss(const Model& model, const Tensor& input, const Tensor& mask) {
  Workspace ws;
  const Tensor& pred = forward_into(model, input, ws);
  if (model.loss_kind() == LossKind::kBinaryCrossEntropy) {
    return loss(pred, mask);
  }
  if (pred.shape != mask.shape) {
    throw ValidationError("loss: prediction and target shapes differ");
  }
  return 0.5 * kern::sum_sq_diff(pred.ptr(), mask.ptr(), pred.numel());
}

const GradientSet& backward_into(const Model& model, const Tensor& input,
                                 const Tensor& mask, Workspace& ws) {
  const Tensor& pred = forward_into(model, input, ws);
  if (pred.shape != mask.shape) {
    throw ValidationError("backward: mask shape does not match model output");
  }
  const auto& layers = model.layers();
  const std::size_t n_out = pred.numel();

  // Seed the delta chain at layer seed_idx (delta w.r.t. that layer's
  // output). For cross-entropy the sigmoid head is folded in:
  // d(loss)/d(pre-sigmoid z) = (p - m)/N, zero where the clamp is active.
  std::ptrdiff_t seed_idx;
  if (model.loss_kind() == LossKind::kBinaryCrossEntropy) {
    seed_idx = static_cast<std::ptrdiff_t>(layers.size()) - 2;
    const double inv_n = 1.0 / static_cast<double>(n_out);
    Tensor& dz = seed_idx >= 0 ? ws.deltas_[seed_idx] : ws.dinput_;
    for (std::size_t i = 0; i < n_out; ++i) {
      const double p = pred.data[i];
      dz.data[i] = (p > kClampLo && p < kClampHi) ? (p - mask.data[i]) * inv_n : 0.0;
    }
  } else {
    seed_idx = static_cast<std::ptrdiff_t>(layers.size()) - 1;
    Tensor& dp = ws.deltas_[seed_idx];
    for (std::size_t i = 0; i < n_out; ++i) {
      dp.data[i] = pred.data[i] - mask.data[i];
    }
  }

  std::size_t pidx = model.layer_count();
  std::size_t cidx = ws.padded_.size();
  // Walk back from seed_idx; for BCE the sigmoid head was already consumed.
  for (std::ptrdiff_t i = seed_idx; i >= 0; --i) {
    const LayerSpec& spec = layers[i];
    const Tensor& dout = ws.deltas_[i];
    const Tensor& lin = (i == 0) ? input : ws.acts_[i - 1];
    Tensor& din = (i == 0) ? ws.dinput_ : ws.deltas_[i - 1];
    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
      const LayerParams& p = model.params(--pidx);
      LayerGradient& g = ws.grads_.per_layer[pidx];
      std::fill(g.weight.data.begin(), g.weight.data.end(), 0.0);
      std::fill(din.data.begin(), din.data.end(), 0.0);
      for (std::size_t o = 0; o < d->out; ++o) {
        const double do_ = dout.data[o];
        kern::axpy(do_, lin.ptr(), g.weight.ptr() + o * d->in, d->in);
        kern::axpy(do_, p.weight.ptr() + o * d->in, din.ptr(), d->in);
      }
      if (d->has_bias) {
        std::copy(dout.data.begin(), dout.data.end(), g.bias.data.begin());
      }
    } else if (const auto* c = std::get_if<Conv2DSpec>(&spec)) {
      const LayerParams& p = model.params(--pidx);
      LayerGradient& g = ws.grads_.per_layer[pidx];
      Tensor& padbuf = ws.padded_[--cidx];  // from the forward pass
      Tensor& dpad = ws.dpad_[cidx];
      const std::size_t k = c->kernel;
      const std::size_t ph = padbuf.shape[1], pw = padbuf.shape[2];
      const std::size_t oh = dout.shape[1], ow = dout.shape[2];
      std::fill(g.weight.data.begin(), g.weight.data.end(), 0.0);
      std::fill(dpad.data.begin(), dpad.data.end(), 0.0);
      for (std::size_t oc = 0; oc < c->out_ch; ++oc) {
        const double* drow0 = dout.ptr() + oc * oh * ow;
        if (c->has_bias) {
          g.bias.data[oc] = kern::sum(drow0, oh * ow);
        }
        for (std::size_t ic = 0; ic < c->in_ch; ++ic) {
          double* gw = g.weight.ptr() + (oc * c->in_ch + ic) * k * k;
          const double* wbase = p.weight.ptr() + (oc * c->in_ch + ic) * k * k;
          for (std::size_t y = 0; y < oh; ++y) {
            const double* drow = drow0 + y * ow;
            for (std::size_t ky = 0; ky < k; ++ky) {
              const double* prow = padbuf.ptr() + (ic * ph + y + ky) * pw;
              double* dprow = dpad.ptr() + (ic * ph + y + ky) * pw;
              for (std::size_t kx = 0; kx < k; ++kx) {
                gw[ky * k + kx] += kern::dot(drow, prow + kx, ow);
                kern::axpy(wbase[ky * k + kx], drow, dprow + kx, ow);
              }
            }
          }
        }
      }
      // Strip the padding border back off.
      const std::size_t ih = lin.shape[1], iw = lin.shape[2];
      for (std::size_t ic = 0; ic < c->in_ch; ++ic) {
        for (std::size_t y = 0; y < ih; ++y) {
          const double* src = dpad.ptr() + (ic * ph + y + c->pad) * pw + c->pad;
          std::memcpy(din.ptr() + (ic * ih + y) * iw, src, iw * sizeof(double));
        }
      }
    } else if (std::holds_alternative<ReluSpec>(spec)) {
      for (std::size_t j = 0; j < dout.numel(); ++j) {
        din.data[j] = lin.data[j] > 0.0 ? dout.data[j] : 0.0;
      }
    } else {  // sigmoid in a squared-error stack
      const Tensor& p = ws.acts_[i];
      for (std::size_t j = 0; j < dout.numel(); ++j) {
        din.data[j] = dout.data[j] * p.data[j] * (1.0 - p.data[j]);
      }
    }
  }
  for (const LayerGradient& g : ws.grads_.per_layer) {
    check_finite(g.weight, "parameter gradient");
    check_finite(g.bias, "parameter gradient");
  }
  ws.grads_.sample_count = 1;
  return ws.grads_;
}

GradientSet backward(const Model& model, const Tensor& input, const Tensor& mask) {
  Workspace ws;
  backward_into(model, input, mask, ws);
  return ws.gradients();
}

Tensor grad_input_jacobian(const Model& model, const Tensor& input,
                           const Tensor& mask, std::size_t layer, double h) {
  if (layer >= model.layer_count()) {
    throw ValidationError("jacobian: layer index out of range");
  }
  if (!(h > 0.0)) throw ValidationError("jacobian: step h must be positive");
  const std::size_t d = input.numel();
  const std::size_t p_l = model.param_count(layer);

  std::vector<std::size_t> out_shape;
  if (input.rank() == 3) {
    out_shape = {p_l, input.shape[0], input.shape[1], input.shape[2]};
  } else {
    out_shape = {p_l, 1, 1, d};
  }

  Workspace ws;
  Tensor probe = input;
  std::vector<double> gplus(p_l);
  Tensor cols = Tensor::zeros({d, p_l});  // transposed scratch, rows contiguous
  const double inv2h = 1.0 / (2.0 * h);
  for (std::size_t i = 0; i < d; ++i) {
    const double orig = probe.data[i];
    probe.data[i] = orig + h;
    {
      const GradientSet& g = backward_into(model, probe, mask, ws);
      const LayerGradient& lg = g.per_layer[layer];
      std::copy(lg.weight.data.begin(), lg.weight.data.end(), gplus.begin());
      std::copy(lg.bias.data.begin(), lg.bias.data.end(),
                gplus.begin() + lg.weight.numel());
    }
    probe.data[i] = orig - h;
    {
      const GradientSet& g = backward_into(model, probe, mask, ws);
      const LayerGradient& lg = g.per_layer[layer];
      double* row = cols.ptr() + i * p_l;
      kern::scaled_diff(gplus.data(), lg.weight.ptr(), inv2h, row, lg.weight.numel());
      kern::scaled_diff(gplus.data() + lg.weight.numel(), lg.bias.ptr(), inv2h,
                        row + lg.weight.numel(), lg.bias.numel());
    }
    probe.data[i] = orig;
  }

  Tensor out = Tensor::zeros(out_shape);
  for (std::size_t p = 0; p < p_l; ++p) {
    for (std::size_t i = 0; i < d; ++i) {
      out.data[p * d + i] = cols.data[i * p_l + p];
    }
  }
  if (!out.all_finite()) {
    throw NumericError("jacobian: non-finite result (step h may be degenerate)");
  }
  return out;
}

}  // namespace fedre
