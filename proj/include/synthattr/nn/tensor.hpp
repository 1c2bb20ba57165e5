#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "synthattr/common/errors.hpp"

namespace synthattr::nn {

// Dense row-major n-d array. The optional grad slot, when engaged, always
// has the same element count as values (used by parameters).
template <class T>
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<T> values;
  std::optional<std::vector<T>> grad;

  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> s) : shape(std::move(s)) {
    values.assign(static_cast<std::size_t>(numel()), T(0));
  }

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }

  std::int64_t dim(std::size_t i) const { return shape.at(i); }

  void require_grad() {
    if (!grad) grad.emplace(values.size(), T(0));
  }

  void zero_grad() {
    if (grad) std::fill(grad->begin(), grad->end(), T(0));
  }

  T* data() { return values.data(); }
  const T* data() const { return values.data(); }
};

template <class T>
Tensor<T> zeros(std::vector<std::int64_t> shape) {
  return Tensor<T>(std::move(shape));
}

inline std::string shape_string(const std::vector<std::int64_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

template <class T>
void check_shape(const Tensor<T>& x, std::size_t rank, const char* what) {
  if (x.shape.size() != rank)
    throw ShapeMismatch(std::string(what) + ": expected rank " +
                        std::to_string(rank) + ", got " + shape_string(x.shape));
}

// Named trainable parameter; gradient lives in value.grad.
template <class T>
struct Param {
  std::string name;
  Tensor<T> value;

  Param() = default;
  Param(std::string n, std::vector<std::int64_t> shape)
      : name(std::move(n)), value(std::move(shape)) {
    value.require_grad();
  }
};

}  // namespace synthattr::nn
