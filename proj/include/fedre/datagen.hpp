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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fedre/rng.hpp"
#include "fedre/tensor.hpp"

// Synthetic annotated "document" generator: grayscale images with a tampered
// patch recorded in a pixel mask and 1-4 privacy-sensitive rectangles, in
// four document format classes. Replaces scanned-document corpora at desk
// scale. Generation is a pure function of (spec, seed); file I/O is
// single-writer.

namespace fedre {

// Axis-aligned pixel rectangle: rows [a, a+w), columns [b, b+h).
// w is the row extent and h the column extent.
struct Rect {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t w = 0;
  std::size_t h = 0;

  std::size_t area() const { return w * h; }
  bool operator==(const Rect&) const = default;
};

// Throws ValidationError unless r lies inside an image of the given size
// with positive extents.
void validate_rect(const Rect& r, std::size_t height, std::size_t width);

struct Sample {
  Tensor image;        // (c, H, W), values in [0, 1]
  Tensor tamper_mask;  // (H, W), entries 0 or 1
  std::vector<Rect> psi_regions;
  std::uint32_t format_id = 0;  // 0 contract, 1 invoice, 2 page, 3 receipt

  bool operator==(const Sample&) const = default;
};

constexpr std::uint32_t kFormatCount = 4;

struct DatasetSpec {
  std::size_t n_samples = 64;
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t channels = 1;
  std::size_t patch_min = 3;  // tamper patch edge, inclusive range
  std::size_t patch_max = 5;
  std::size_t region_count_min = 1;  // psi regions per sample
  std::size_t region_count_max = 4;
  std::uint64_t texture_seed = 7;  // background style of the four formats
  double noise_amplitude = 0.05;

  void validate() const;
};

// Deterministic under (spec, seed). Every sample gets a format-dependent
// background texture, one brighter tampered patch recorded in tamper_mask,
// and region_count psi rectangles that may overlap the tampered area.
// format_id cycles 0,1,2,3 so counts differ by at most one.
std::vector<Sample> generate(const DatasetSpec& spec, std::uint64_t seed);

// Selects per_format samples of each format into the public set; the rest
// stay private in their original order. Deterministic under seed.
std::pair<std::vector<Sample>, std::vector<Sample>> split_public(
    const std::vector<Sample>& samples, std::size_t per_format, std::uint64_t seed);

// Versioned little-endian binary dataset files (magic "FEDRE-D1"); save and
// load round-trip bit-exactly. Parse failures report the byte offset.
void save_dataset(const std::vector<Sample>& samples, const std::string& path);
std::vector<Sample> load_dataset(const std::string& path);

}  // namespace fedre
