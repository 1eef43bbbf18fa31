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

// Dense double-precision kernels behind the numeric hot paths (backprop,
// finite-difference Jacobians, clipping, region metrics).
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 or NEON variant. The variant is picked once at
// runtime from CPU capabilities; tests can pin a backend with
// force_backend(). Element-wise kernels (axpy, scale, scaled_diff) produce
// bit-identical results on every backend (the project builds with FP
// contraction off); reductions may differ in the last ulps because the
// vector variants sum in a different association order.

namespace fedre::kern {

enum class Backend { kScalar, kAvx2, kNeon };

const char* backend_name(Backend b);
bool backend_available(Backend b);

// The backend used by the dispatching entry points below. Defaults to the
// widest available vector backend.
Backend active_backend();

// Pins the dispatch to one backend (tests and benchmarking). Throws
// ValidationError if the CPU cannot run it.
void force_backend(Backend b);

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_squares(const double* a, std::size_t n);
// sum over i of (a[i] - b[i])^2
double sum_sq_diff(const double* a, const double* b, std::size_t n);
// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);
// x[i] *= alpha
void scale(double* x, double alpha, std::size_t n);
// out[i] = (a[i] - b[i]) * alpha
void scaled_diff(const double* a, const double* b, double alpha, double* out,
                 std::size_t n);

// Reference implementations, always available; the oracle side of the
// backend equivalence tests.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_squares(const double* a, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
void scaled_diff(const double* a, const double* b, double alpha, double* out,
                 std::size_t n);
}  // namespace scalar

}  // namespace fedre::kern
