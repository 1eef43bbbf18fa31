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

#include "fedre/kernels.hpp"

#include <atomic>
#include <string>

#include "fedre/errors.hpp"

namespace fedre::kern {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double sum_squares(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double* x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void scaled_diff(const double* a, const double* b, double alpha, double* out,
                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (a[i] - b[i]) * alpha;
}

}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define FEDRE_HAVE_AVX2_TU 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_squares(const double* a, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
void scaled_diff(const double* a, const double* b, double alpha, double* out,
                 std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
#define FEDRE_HAVE_NEON_TU 1
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_squares(const double* a, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
void scaled_diff(const double* a, const double* b, double alpha, double* out,
                 std::size_t n);
}  // namespace neon
#endif

namespace {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sum_squares)(const double*, std::size_t);
  double (*sum_sq_diff)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double*, double, std::size_t);
  void (*scaled_diff)(const double*, const double*, double, double*, std::size_t);
};

constexpr KernelTable kScalarTable = {
    scalar::dot,    scalar::sum,   scalar::sum_squares, scalar::sum_sq_diff,
    scalar::axpy,   scalar::scale, scalar::scaled_diff};

#ifdef FEDRE_HAVE_AVX2_TU
constexpr KernelTable kAvx2Table = {
    avx2::dot,  avx2::sum,   avx2::sum_squares, avx2::sum_sq_diff,
    avx2::axpy, avx2::scale, avx2::scaled_diff};
#endif

#ifdef FEDRE_HAVE_NEON_TU
constexpr KernelTable kNeonTable = {
    neon::dot,  neon::sum,   neon::sum_squares, neon::sum_sq_diff,
    neon::axpy, neon::scale, neon::scaled_diff};
#endif

Backend detect_backend() {
#ifdef FEDRE_HAVE_AVX2_TU
  if (__builtin_cpu_supports("avx2")) return Backend::kAvx2;
#endif
#ifdef FEDRE_HAVE_NEON_TU
  return Backend::kNeon;
#endif
  return Backend::kScalar;
}

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &kScalarTable;
    case Backend::kAvx2:
#ifdef FEDRE_HAVE_AVX2_TU
      return &kAvx2Table;
#else
      return nullptr;
#endif
    case Backend::kNeon:
#ifdef FEDRE_HAVE_NEON_TU
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::atomic<Backend> g_backend{detect_backend()};
std::atomic<const KernelTable*> g_table{table_for(detect_backend())};

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
    case Backend::kNeon: return "neon";
  }
  return "?";
}

bool backend_available(Backend b) {
  if (b == Backend::kScalar) return true;
#ifdef FEDRE_HAVE_AVX2_TU
  if (b == Backend::kAvx2) return __builtin_cpu_supports("avx2");
#endif
#ifdef FEDRE_HAVE_NEON_TU
  if (b == Backend::kNeon) return true;
#endif
  return false;
}

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void force_backend(Backend b) {
  if (!backend_available(b)) {
    throw ValidationError(std::string("kernel backend not available on this cpu: ") +
                          backend_name(b));
  }
  g_table.store(table_for(b), std::memory_order_relaxed);
  g_backend.store(b, std::memory_order_relaxed);
}

double dot(const double* a, const double* b, std::size_t n) {
  return g_table.load(std::memory_order_relaxed)->dot(a, b, n);
}
double sum(const double* a, std::size_t n) {
  return g_table.load(std::memory_order_relaxed)->sum(a, n);
}
double sum_squares(const double* a, std::size_t n) {
  return g_table.load(std::memory_order_relaxed)->sum_squares(a, n);
}
double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  return g_table.load(std::memory_order_relaxed)->sum_sq_diff(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  g_table.load(std::memory_order_relaxed)->axpy(alpha, x, y, n);
}
void scale(double* x, double alpha, std::size_t n) {
  g_table.load(std::memory_order_relaxed)->scale(x, alpha, n);
}
void scaled_diff(const double* a, const double* b, double alpha, double* out,
                 std::size_t n) {
  g_table.load(std::memory_order_relaxed)->scaled_diff(a, b, alpha, out, n);
}

}  // namespace fedre::kern
