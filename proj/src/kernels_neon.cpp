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

// NEON kernel variants for aarch64. Same contract as the AVX2 unit:
// separate multiply and add (no fused ops) so element-wise kernels match
// the scalar reference bit for bit.

#if defined(__aarch64__) || defined(__ARM_NEON)

#include <arm_neon.h>

#include <cstddef>

namespace fedre::kern::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  for (; i + 2 <= n; i += 2) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const double* a, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
  double acc = vaddvq_f64(acc0);
  for (; i < n; ++i) acc += a[i];
  return acc;
}

double sum_squares(const double* a, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(a + i);
    acc0 = vaddq_f64(acc0, vmulq_f64(v, v));
  }
  double acc = vaddvq_f64(acc0);
  for (; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc0 = vaddq_f64(acc0, vmulq_f64(d, d));
  }
  double acc = vaddvq_f64(acc0);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t prod = vmulq_f64(va, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double* x, double alpha, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), va));
  for (; i < n; ++i) x[i] *= alpha;
}

void scaled_diff(const double* a, const double* b, double alpha, double* out,
                 std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    vst1q_f64(out + i, vmulq_f64(d, va));
  }
  for (; i < n; ++i) out[i] = (a[i] - b[i]) * alpha;
}

}  // namespace fedre::kern::neon

#endif  // aarch64
