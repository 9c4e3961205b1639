#ifndef DEEPHATE_PARAMS_H_
#define DEEPHATE_PARAMS_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "deephate/tensor.h"

namespace deephate {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  // Frozen parameters take part in forward passes but are skipped by the
  // optimizer.
  bool trainable = true;
  std::size_t index = 0;
};

// Ordered registry of named parameters. Addresses are stable for the lifetime
// of the set, so tapes may hold pointers to entries.
template <typename T>
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const ParamSet& other);
  ParamSet& operator=(const ParamSet& other);
  ParamSet(ParamSet&&) noexcept = default;
  ParamSet& operator=(ParamSet&&) noexcept = default;

  Parameter<T>& add(std::string name, Tensor<T> value, bool trainable = true);

  Parameter<T>& get(const std::string& name);
  const Parameter<T>& get(const std::string& name) const;
  Parameter<T>* find(const std::string& name);
  const Parameter<T>* find(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  // Total scalar count across all parameters.
  std::size_t element_count() const;

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (const auto& p : params_) out.add(p->name, p->value.template cast<U>(), p->trainable);
    return out;
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::map<std::string, std::size_t> by_name_;
};

// Gradients aligned with a ParamSet by parameter index.
template <typename T>
class GradSet {
 public:
  GradSet() = default;
  explicit GradSet(const ParamSet<T>& params);

  Tensor<T>& operator[](std::size_t i) { return grads_[i]; }
  const Tensor<T>& operator[](std::size_t i) const { return grads_[i]; }
  std::size_t size() const { return grads_.size(); }

  void zero();
  void add(const GradSet& other, T scale = T(1));
  void scale(T factor);

 private:
  std::vector<Tensor<T>> grads_;
};

// Glorot-uniform fill: U(-r, r) with r = sqrt(6 / (fan_in + fan_out)).
// The stream is derived from (seed, name) so adding or removing unrelated
// parameters never shifts another parameter's initial values.
template <typename T>
Tensor<T> glorot_uniform(const Shape& shape, std::size_t fan_in,
                         std::size_t fan_out, std::uint64_t seed,
                         const std::string& name);

template <typename T>
Tensor<T> uniform_init(const Shape& shape, double lo, double hi,
                       std::uint64_t seed, const std::string& name);

}  // namespace deephate

#endif  // DEEPHATE_PARAMS_H_
