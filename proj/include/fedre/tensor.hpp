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

#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <utility>
#include <vector>

#include "fedre/errors.hpp"

namespace fedre {

// Shape-tagged dense array of doubles, row-major. The universal numeric
// carrier for inputs, labels, parameters and gradients.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != shape_numel(shape)) {
      throw ValidationError("tensor data length does not match shape");
    }
  }

  static std::size_t shape_numel(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t e : s) {
      if (e == 0) throw ValidationError("tensor shape extent must be positive");
      n *= e;
    }
    return n;
  }

  static Tensor zeros(std::vector<std::size_t> s) {
    std::size_t n = shape_numel(s);
    return Tensor(std::move(s), std::vector<double>(n, 0.0));
  }

  static Tensor full(std::vector<std::size_t> s, double v) {
    std::size_t n = shape_numel(s);
    return Tensor(std::move(s), std::vector<double>(n, v));
  }

  std::size_t numel() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }

  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (double v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  double& at(std::size_t i) {
    assert(rank() == 1 && i < shape[0]);
    return data[i];
  }
  double at(std::size_t i) const {
    assert(rank() == 1 && i < shape[0]);
    return data[i];
  }
  double& at(std::size_t i, std::size_t j) {
    assert(rank() == 2 && i < shape[0] && j < shape[1]);
    return data[i * shape[1] + j];
  }
  double at(std::size_t i, std::size_t j) const {
    assert(rank() == 2 && i < shape[0] && j < shape[1]);
    return data[i * shape[1] + j];
  }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    assert(rank() == 3 && i < shape[0] && j < shape[1] && k < shape[2]);
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    assert(rank() == 3 && i < shape[0] && j < shape[1] && k < shape[2]);
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    assert(rank() == 4);
    return data[((i * shape[1] + j) * shape[2] + k) * shape[3] + l];
  }
  double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    assert(rank() == 4);
    return data[((i * shape[1] + j) * shape[2] + k) * shape[3] + l];
  }

  bool operator==(const Tensor& o) const = default;
};

// Same data, new shape; element count must be unchanged.
inline Tensor reshape(const Tensor& t, std::vector<std::size_t> new_shape) {
  if (Tensor::shape_numel(new_shape) != t.numel()) {
    throw ValidationError("reshape: element count mismatch");
  }
  return Tensor(std::move(new_shape), t.data);
}

}  // namespace fedre
