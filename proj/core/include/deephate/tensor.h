#ifndef DEEPHATE_TENSOR_H_
#define DEEPHATE_TENSOR_H_

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "deephate/error.h"

namespace deephate {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array. Every dimension is at least 1; a scalar has shape
// {1}. Value semantics throughout.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() : shape_{1}, data_(1, T(0)) {}

  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(checked_size(shape_), fill) {}

  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != checked_size(shape_)) {
      throw Error("tensor: data length " + std::to_string(data_.size()) +
                  " does not match shape " + shape_string(shape_));
    }
  }

  static Tensor scalar(T value) { return Tensor(Shape{1}, {value}); }

  static Tensor vector(std::initializer_list<T> values) {
    return Tensor(Shape{values.size()}, std::vector<T>(values));
  }

  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<T> values) {
    return Tensor(Shape{rows, cols}, std::vector<T>(values));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Row-major 2-D access.
  T& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  bool operator==(const Tensor& other) const = default;

 private:
  static std::size_t checked_size(const Shape& shape) {
    if (shape.empty()) throw Error("tensor: empty shape");
    for (auto d : shape) {
      if (d == 0) throw Error("tensor: zero dimension in shape " + shape_string(shape));
    }
    return shape_size(shape);
  }

  Shape shape_;
  std::vector<T> data_;
};

}  // namespace deephate

#endif  // DEEPHATE_TENSOR_H_
