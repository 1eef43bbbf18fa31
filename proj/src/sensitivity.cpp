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

#include "fedre/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedre/kernels.hpp"

namespace fedre {

Tensor align_region(const Tensor& jacobian, const Rect& region) {
  if (jacobian.rank() != 4) {
    throw ValidationError("align_region: jacobian must be rank 4 (P, c, H, W)");
  }
  const std::size_t p_l = jacobian.shape[0], c = jacobian.shape[1];
  const std::size_t h = jacobian.shape[2], w = jacobian.shape[3];
  validate_rect(region, h, w);
  Tensor out = Tensor::zeros({region.w, region.h});
  for (std::size_t i = 0; i < region.w; ++i) {
    for (std::size_t j = 0; j < region.h; ++j) {
      double sq = 0.0;
      for (std::size_t p = 0; p < p_l; ++p) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double v = jacobian.at(p, ch, region.a + i, region.b + j);
          sq += v * v;
        }
      }
      out.at(i, j) = std::sqrt(sq);
    }
  }
  return out;
}

double psi_score(const Tensor& aligned) {
  if (aligned.numel() == 0) throw ValidationError("psi_score: empty region");
  return kern::sum(aligned.ptr(), aligned.numel()) /
         static_cast<double>(aligned.numel());
}

namespace {

std::vector<std::size_t> choose_subset(std::size_t n, std::size_t k, CounterRng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (k >= n) return idx;
  for (std::size_t j = 0; j < k; ++j) {
    std::swap(idx[j], idx[j + rng.next_below(n - j)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

PsiScores psi_scores_for_model(const Model& model, const std::vector<Sample>& samples,
                               std::size_t max_samples, double h, CounterRng rng) {
  if (samples.empty()) throw ValidationError("psi scores: no samples");
  if (max_samples < 1) throw ValidationError("psi scores: max_samples must be >= 1");
  if (!(h > 0.0)) throw ValidationError("psi scores: step h must be positive");
  const std::size_t n_layers = model.layer_count();

  const std::vector<std::size_t> picked = choose_subset(samples.size(), max_samples, rng);

  Workspace ws;
  GradientSet gplus = model.zero_gradients();
  std::vector<double> layer_acc(n_layers, 0.0);
  std::size_t contributing = 0;
  const double inv2h_sq = 1.0 / (4.0 * h * h);

  for (std::size_t si : picked) {
    const Sample& s = samples[si];
    if (s.psi_regions.empty()) continue;
    const std::size_t c = s.image.shape[0], ih = s.image.shape[1], iw = s.image.shape[2];
    for (const Rect& r : s.psi_regions) validate_rect(r, ih, iw);
    const Tensor target = reshape(s.tamper_mask, model.output_shape());

    // Index the union of region pixels once; overlapping regions share the
    // finite-difference passes.
    std::vector<std::size_t> slot_of(ih * iw, static_cast<std::size_t>(-1));
    std::vector<std::size_t> pixels;
    for (const Rect& r : s.psi_regions) {
      for (std::size_t y = r.a; y < r.a + r.w; ++y) {
        for (std::size_t x = r.b; x < r.b + r.h; ++x) {
          if (slot_of[y * iw + x] == static_cast<std::size_t>(-1)) {
            slot_of[y * iw + x] = pixels.size();
            pixels.push_back(y * iw + x);
          }
        }
      }
    }

    // pixel_sq[l][slot] = sum over channels and layer-l parameters of
    // (dg/dx)^2 at that pixel.
    std::vector<std::vector<double>> pixel_sq(n_layers,
                                              std::vector<double>(pixels.size(), 0.0));
    Tensor probe = s.image;
    for (std::size_t slot = 0; slot < pixels.size(); ++slot) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t ci = ch * ih * iw + pixels[slot];
        const double orig = probe.data[ci];
        probe.data[ci] = orig + h;
        {
          const GradientSet& g = backward_into(model, probe, target, ws);
          for (std::size_t l = 0; l < n_layers; ++l) {
            gplus.per_layer[l].weight.data = g.per_layer[l].weight.data;
            gplus.per_layer[l].bias.data = g.per_layer[l].bias.data;
          }
        }
        probe.data[ci] = orig - h;
        {
          const GradientSet& g = backward_into(model, probe, target, ws);
          for (std::size_t l = 0; l < n_layers; ++l) {
            const LayerGradient& gp = gplus.per_layer[l];
            const LayerGradient& gm = g.per_layer[l];
            double ssd = kern::sum_sq_diff(gp.weight.ptr(), gm.weight.ptr(),
                                           gp.weight.numel());
            ssd += kern::sum_sq_diff(gp.bias.ptr(), gm.bias.ptr(), gp.bias.numel());
            pixel_sq[l][slot] += ssd * inv2h_sq;
          }
        }
        probe.data[ci] = orig;
      }
    }

    for (std::size_t l = 0; l < n_layers; ++l) {
      double region_mean_sum = 0.0;
      for (const Rect& r : s.psi_regions) {
        double norm_sum = 0.0;
        for (std::size_t y = r.a; y < r.a + r.w; ++y) {
          for (std::size_t x = r.b; x < r.b + r.h; ++x) {
            norm_sum += std::sqrt(pixel_sq[l][slot_of[y * iw + x]]);
          }
        }
        region_mean_sum += norm_sum / static_cast<double>(r.area());
      }
      layer_acc[l] += region_mean_sum / static_cast<double>(s.psi_regions.size());
    }
    ++contributing;
  }

  if (contributing == 0) {
    throw ValidationError("psi scores: no sampled data carries psi regions");
  }
  PsiScores scores;
  scores.n_samples_used = contributing;
  scores.per_layer.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const double v = layer_acc[l] / static_cast<double>(contributing);
    if (!std::isfinite(v) || v < 0.0) {
      throw NumericError("psi scores: non-finite or negative score");
    }
    scores.per_layer[l] = v;
  }
  return scores;
}

}  // namespace fedre
