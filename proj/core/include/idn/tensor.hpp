// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "idn/error.hpp"

namespace idn {

/// Extent of a 4-D tensor in batch, channel, height, width order.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  constexpr std::size_t numel() const { return n * c * h * w; }
  constexpr std::size_t plane() const { return h * w; }
  constexpr bool valid() const { return n >= 1 && c >= 1 && h >= 1 && w >= 1; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;

  std::string str() const;
};

/// Dense NCHW tensor, row-major with w fastest.
template <class T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  /// Throws ShapeError when any extent is zero.
  explicit BasicTensor(Shape shape, T fill = T(0));

  /// Throws ShapeError when values.size() != shape.numel().
  BasicTensor(Shape shape, std::vector<T> values);

  const Shape& shape() const { return shape_; }
  std::size_t n() const { return shape_.n; }
  std::size_t c() const { return shape_.c; }
  std::size_t h() const { return shape_.h; }
  std::size_t w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }

  std::size_t offset(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[offset(n, c, h, w)];
  }
  const T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[offset(n, c, h, w)];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Pointer to the h*w plane of (n, c).
  T* plane(std::size_t n, std::size_t c) { return data_.data() + offset(n, c, 0, 0); }
  const T* plane(std::size_t n, std::size_t c) const { return data_.data() + offset(n, c, 0, 0); }

  void fill(T value);

  template <class U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(shape_, std::move(out));
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  Shape shape_{};
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

template <class T>
BasicTensor<T> create(Shape shape, T fill) {
  return BasicTensor<T>(shape, fill);
}

template <class T>
BasicTensor<T> create(Shape shape, std::vector<T> values) {
  return BasicTensor<T>(shape, std::move(values));
}

/// out[i] = a[i] + b[i]; shapes must match exactly (no broadcasting).
template <class T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// In-place a += b with the same shape rule as add().
template <class T>
void add_inplace(BasicTensor<T>& a, const BasicTensor<T>& b);

/// Per-site mean over channels; result has shape (n, 1, h, w).
template <class T>
BasicTensor<T> channel_mean(const BasicTensor<T>& a);

template <class T>
T sum(const BasicTensor<T>& a);

/// Throws ShapeError naming `what` unless the tensor has a valid shape.
void require_valid(const Shape& shape, const char* what);

}  // namespace idn
