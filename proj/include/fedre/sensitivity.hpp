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

#include <vector>

#include "fedre/datagen.hpp"
#include "fedre/nn.hpp"
#include "fedre/rng.hpp"

// Per-layer PSI scores: how strongly each layer's parameter gradient reacts
// to the pixels inside a sample's privacy-sensitive regions. The score of a
// layer is the mean, over region pixels, of the Frobenius norm of the
// gradient-input Jacobian slice at that pixel (all parameter coordinates and
// channels), averaged over regions and sampled data.

namespace fedre {

struct PsiScores {
  std::vector<double> per_layer;  // S_l, one per parameterized layer, >= 0
  std::size_t n_samples_used = 0;
};

// Collapses the Jacobian (P_l, c, H, W) to per-pixel Frobenius norms over
// the region: entry (i, j) is the norm of the slice at pixel (a+i, b+j).
Tensor align_region(const Tensor& jacobian, const Rect& region);

// Mean of the aligned sensitivity entries.
double psi_score(const Tensor& aligned);

// Averages psi_score over each sample's regions (equal weight per region)
// and over min(max_samples, |samples|) samples chosen without replacement
// by rng. Samples without regions contribute nothing; if no sampled sample
// has a region there is no score and the call fails.
// Equivalent to psi_score(align_region(grad_input_jacobian(...), region))
// per layer, but shares the finite-difference passes across layers and
// touches only region pixels.
PsiScores psi_scores_for_model(const Model& model, const std::vector<Sample>& samples,
                               std::size_t max_samples, double h, CounterRng rng);

}  // namespace fedre
