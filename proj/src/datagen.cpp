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

#include "fedre/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "fedre/binio.hpp"

namespace fedre {

void validate_rect(const Rect& r, std::size_t height, std::size_t width) {
  if (r.w < 1 || r.h < 1 || r.a + r.w > height || r.b + r.h > width) {
    throw ValidationError("region (" + std::to_string(r.a) + "," + std::to_string(r.b) +
                          "," + std::to_string(r.w) + "," + std::to_string(r.h) +
                          ") outside " + std::to_string(height) + "x" +
                          std::to_string(width) + " image");
  }
}

void DatasetSpec::validate() const {
  if (n_samples == 0) throw ValidationError("dataset: n_samples must be positive");
  if (channels != 1) throw ValidationError("dataset: generator is single-channel");
  if (height < 4 || width < 4) throw ValidationError("dataset: image too small");
  if (patch_min < 1 || patch_min > patch_max) {
    throw ValidationError("dataset: bad tamper patch size range");
  }
  if (patch_max > height || patch_max > width) {
    throw ValidationError("dataset: tamper patch range exceeds image bounds");
  }
  if (region_count_min < 1 || region_count_min > region_count_max) {
    throw ValidationError("dataset: bad psi region count range");
  }
  if (!(noise_amplitude >= 0.0) || noise_amplitude > 0.5) {
    throw ValidationError("dataset: noise amplitude must be in [0, 0.5]");
  }
}

namespace {

Rect random_rect(CounterRng& rng, std::size_t height, std::size_t width,
                 std::size_t emin, std::size_t emax) {
  Rect r;
  r.w = emin + rng.next_below(emax - emin + 1);
  r.h = emin + rng.next_below(emax - emin + 1);
  r.a = rng.next_below(height - r.w + 1);
  r.b = rng.next_below(width - r.h + 1);
  return r;
}

}  // namespace

std::vector<Sample> generate(const DatasetSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t h = spec.height, w = spec.width;
  CounterRng root(seed);

  // Per-format background style: base brightness, line period and phase.
  CounterRng style(spec.texture_seed, 0xd0c5);
  double base[kFormatCount];
  std::size_t period[kFormatCount], phase[kFormatCount];
  for (std::uint32_t f = 0; f < kFormatCount; ++f) {
    base[f] = 0.25 + 0.25 * style.next_double();
    period[f] = 3 + style.next_below(3);
    phase[f] = style.next_below(period[f]);
  }

  std::vector<Sample> out;
  out.reserve(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    CounterRng rng = root.derive(i);
    Sample s;
    s.format_id = static_cast<std::uint32_t>(i % kFormatCount);
    s.image = Tensor::zeros({spec.channels, h, w});
    s.tamper_mask = Tensor::zeros({h, w});

    const std::uint32_t f = s.format_id;
    for (std::size_t y = 0; y < h; ++y) {
      const bool line = (y % period[f]) == phase[f];
      for (std::size_t x = 0; x < w; ++x) {
        double v = base[f] + (line ? -0.08 : 0.0);
        v += spec.noise_amplitude * (2.0 * rng.next_double() - 1.0);
        s.image.at(0, y, x) = std::clamp(v, 0.0, 1.0);
      }
    }

    // Privacy-sensitive rectangles with a dotted "text" fill. Placed before
    // the tamper patch so the two can overlap.
    const std::size_t n_regions =
        spec.region_count_min +
        rng.next_below(spec.region_count_max - spec.region_count_min + 1);
    for (std::size_t r = 0; r < n_regions; ++r) {
      Rect rect = random_rect(rng, h, w, spec.patch_min, spec.patch_max);
      for (std::size_t y = rect.a; y < rect.a + rect.w; ++y) {
        for (std::size_t x = rect.b; x < rect.b + rect.h; ++x) {
          if ((x + 2 * y) % 3 == 0) {
            s.image.at(0, y, x) = std::clamp(s.image.at(0, y, x) - 0.18, 0.0, 1.0);
          }
        }
      }
      s.psi_regions.push_back(rect);
    }

    Rect patch = random_rect(rng, h, w, spec.patch_min, spec.patch_max);
    for (std::size_t y = patch.a; y < patch.a + patch.w; ++y) {
      for (std::size_t x = patch.b; x < patch.b + patch.h; ++x) {
        s.image.at(0, y, x) = std::clamp(s.image.at(0, y, x) + 0.4, 0.0, 1.0);
        s.tamper_mask.at(y, x) = 1.0;
      }
    }

    out.push_back(std::move(s));
  }
  return out;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_public(
    const std::vector<Sample>& samples, std::size_t per_format, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_format(kFormatCount);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    by_format[samples[i].format_id % kFormatCount].push_back(i);
  }
  CounterRng rng(seed, 0x5911);
  std::vector<bool> taken(samples.size(), false);
  std::vector<std::size_t> public_idx;
  for (std::uint32_t f = 0; f < kFormatCount; ++f) {
    auto& idx = by_format[f];
    if (idx.size() < per_format) {
      throw ValidationError("split: format " + std::to_string(f) + " has " +
                            std::to_string(idx.size()) + " samples, need " +
                            std::to_string(per_format));
    }
    // Seeded partial Fisher-Yates.
    for (std::size_t j = 0; j < per_format; ++j) {
      const std::size_t pick = j + rng.next_below(idx.size() - j);
      std::swap(idx[j], idx[pick]);
      taken[idx[j]] = true;
      public_idx.push_back(idx[j]);
    }
  }
  std::sort(public_idx.begin(), public_idx.end());
  std::pair<std::vector<Sample>, std::vector<Sample>> result;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (taken[i] ? result.second : result.first).push_back(samples[i]);
  }
  return result;
}

namespace {
constexpr char kDatasetMagic[8] = {'F', 'E', 'D', 'R', 'E', '-', 'D', '1'};
}

void save_dataset(const std::vector<Sample>& samples, const std::string& path) {
  BinaryWriter wr(path);
  wr.magic(kDatasetMagic);
  wr.u64(samples.size());
  for (const Sample& s : samples) {
    const std::size_t c = s.image.shape[0], h = s.image.shape[1], w = s.image.shape[2];
    const std::uint64_t record_len = 4 + 12 + 8 * s.image.numel() +
                                     8 * s.tamper_mask.numel() + 4 +
                                     16 * s.psi_regions.size();
    wr.u64(record_len);
    wr.u32(s.format_id);
    wr.u32(static_cast<std::uint32_t>(c));
    wr.u32(static_cast<std::uint32_t>(h));
    wr.u32(static_cast<std::uint32_t>(w));
    wr.f64s(s.image.ptr(), s.image.numel());
    wr.f64s(s.tamper_mask.ptr(), s.tamper_mask.numel());
    wr.u32(static_cast<std::uint32_t>(s.psi_regions.size()));
    for (const Rect& r : s.psi_regions) {
      wr.u32(static_cast<std::uint32_t>(r.a));
      wr.u32(static_cast<std::uint32_t>(r.b));
      wr.u32(static_cast<std::uint32_t>(r.w));
      wr.u32(static_cast<std::uint32_t>(r.h));
    }
  }
  wr.close();
}

std::vector<Sample> load_dataset(const std::string& path) {
  BinaryReader rd(path);
  rd.expect_magic(kDatasetMagic);
  const std::uint64_t count = rd.u64();
  std::vector<Sample> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t record_len = rd.u64();
    const std::size_t record_start = rd.offset();
    Sample s;
    s.format_id = rd.u32();
    const std::size_t c = rd.u32(), h = rd.u32(), w = rd.u32();
    if (c == 0 || h == 0 || w == 0 || c * h * w > (1u << 26)) {
      rd.fail("implausible image dimensions in sample " + std::to_string(i));
    }
    s.image = Tensor::zeros({c, h, w});
    rd.f64s(s.image.ptr(), s.image.numel());
    s.tamper_mask = Tensor::zeros({h, w});
    rd.f64s(s.tamper_mask.ptr(), s.tamper_mask.numel());
    const std::uint32_t n_regions = rd.u32();
    for (std::uint32_t r = 0; r < n_regions; ++r) {
      Rect rect;
      rect.a = rd.u32();
      rect.b = rd.u32();
      rect.w = rd.u32();
      rect.h = rd.u32();
      validate_rect(rect, h, w);
      s.psi_regions.push_back(rect);
    }
    if (rd.offset() - record_start != record_len) {
      rd.fail("record length mismatch in sample " + std::to_string(i));
    }
    for (double m : s.tamper_mask.data) {
      if (m != 0.0 && m != 1.0) rd.fail("tamper mask is not binary");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fedre
