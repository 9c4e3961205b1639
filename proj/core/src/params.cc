#include "deephate/params.h"

#include <cmath>

#include "deephate/rng.h"

namespace deephate {

template <typename T>
ParamSet<T>::ParamSet(const ParamSet& other) {
  for (const auto& p : other.params_) add(p->name, p->value, p->trainable);
}

template <typename T>
ParamSet<T>& ParamSet<T>::operator=(const ParamSet& other) {
  if (this == &other) return *this;
  params_.clear();
  by_name_.clear();
  for (const auto& p : other.params_) add(p->name, p->value, p->trainable);
  return *this;
}

template <typename T>
Parameter<T>& ParamSet<T>::add(std::string name, Tensor<T> value, bool trainable) {
  if (by_name_.count(name)) throw Error("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter<T>>();
  p->name = name;
  p->value = std::move(value);
  p->trainable = trainable;
  p->index = params_.size();
  by_name_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

template <typename T>
Parameter<T>* ParamSet<T>::find(const std::string& name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : params_[it->second].get();
}

template <typename T>
const Parameter<T>* ParamSet<T>::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : params_[it->second].get();
}

template <typename T>
Parameter<T>& ParamSet<T>::get(const std::string& name) {
  auto* p = find(name);
  if (!p) throw Error("unknown parameter: " + name);
  return *p;
}

template <typename T>
const Parameter<T>& ParamSet<T>::get(const std::string& name) const {
  auto* p = find(name);
  if (!p) throw Error("unknown parameter: " + name);
  return *p;
}

template <typename T>
std::size_t ParamSet<T>::element_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

template <typename T>
GradSet<T>::GradSet(const ParamSet<T>& params) {
  grads_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    grads_.emplace_back(params[i].value.shape());
  }
}

template <typename T>
void GradSet<T>::zero() {
  for (auto& g : grads_) g.fill(T(0));
}

template <typename T>
void GradSet<T>::add(const GradSet& other, T scale) {
  if (other.grads_.size() != grads_.size()) throw Error("gradset: size mismatch");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto dst = grads_[i].data();
    auto src = other.grads_[i].data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
  }
}

template <typename T>
void GradSet<T>::scale(T factor) {
  for (auto& g : grads_) {
    for (auto& x : g.data()) x *= factor;
  }
}

template <typename T>
Tensor<T> uniform_init(const Shape& shape, double lo, double hi,
                       std::uint64_t seed, const std::string& name) {
  Rng rng(mix_seed(seed, name));
  Tensor<T> t(shape);
  for (auto& x : t.data()) x = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
Tensor<T> glorot_uniform(const Shape& shape, std::size_t fan_in,
                         std::size_t fan_out, std::uint64_t seed,
                         const std::string& name) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform_init<T>(shape, -r, r, seed, name);
}

template class ParamSet<float>;
template class ParamSet<double>;
template class GradSet<float>;
template class GradSet<double>;
template Tensor<float> glorot_uniform<float>(const Shape&, std::size_t, std::size_t,
                                             std::uint64_t, const std::string&);
template Tensor<double> glorot_uniform<double>(const Shape&, std::size_t, std::size_t,
                                               std::uint64_t, const std::string&);
template Tensor<float> uniform_init<float>(const Shape&, double, double,
                                           std::uint64_t, const std::string&);
template Tensor<double> uniform_init<double>(const Shape&, double, double,
                                             std::uint64_t, const std::string&);

}  // namespace deephate
