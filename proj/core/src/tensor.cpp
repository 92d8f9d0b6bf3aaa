// SPDX-License-Identifier: Apache-2.0
#include "idn/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace idn {

std::string Shape::str() const {
  std::ostringstream os;
  os << '(' << n << ',' << c << ',' << h << ',' << w << ')';
  return os.str();
}

void require_valid(const Shape& shape, const char* what) {
  if (!shape.valid()) {
    throw ShapeError(std::string(what) + ": every extent must be >= 1, got " + shape.str());
  }
}

template <class T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(shape) {
  require_valid(shape, "tensor");
  data_.assign(shape.numel(), fill);
}

template <class T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> values) : shape_(shape) {
  require_valid(shape, "tensor");
  if (values.size() != shape.numel()) {
    throw ShapeError("tensor: " + std::to_string(values.size()) + " values for shape " +
                     shape.str());
  }
  data_ = std::move(values);
}

template <class T>
void BasicTensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <class T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  BasicTensor<T> out = a;
  add_inplace(out, b);
  return out;
}

template <class T>
void add_inplace(BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add: shape " + a.shape().str() + " vs " + b.shape().str());
  }
  auto dst = a.data();
  auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <class T>
BasicTensor<T> channel_mean(const BasicTensor<T>& a) {
  require_valid(a.shape(), "channel_mean");
  BasicTensor<T> out({a.n(), 1, a.h(), a.w()});
  const std::size_t hw = a.shape().plane();
  const T count = static_cast<T>(a.c());
  for (std::size_t n = 0; n < a.n(); ++n) {
    T* dst = out.plane(n, 0);
    for (std::size_t c = 0; c < a.c(); ++c) {
      const T* src = a.plane(n, c);
      for (std::size_t i = 0; i < hw; ++i) dst[i] += src[i];
    }
    for (std::size_t i = 0; i < hw; ++i) dst[i] /= count;
  }
  return out;
}

template <class T>
T sum(const BasicTensor<T>& a) {
  double acc = 0.0;
  for (T v : a.data()) acc += static_cast<double>(v);
  return static_cast<T>(acc);
}

#define IDN_INSTANTIATE(T)                                                    \
  template class BasicTensor<T>;                                              \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);  \
  template void add_inplace(BasicTensor<T>&, const BasicTensor<T>&);          \
  template BasicTensor<T> channel_mean(const BasicTensor<T>&);                \
  template T sum(const BasicTensor<T>&);

IDN_INSTANTIATE(float)
IDN_INSTANTIATE(double)
#undef IDN_INSTANTIATE

}  // namespace idn
