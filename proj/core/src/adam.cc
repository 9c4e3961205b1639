#include "deephate/adam.h"

#include <cmath>

namespace deephate {

template <typename T>
AdamState<T>::AdamState(const ParamSet<T>& params, AdamConfig cfg) : config(cfg) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m.emplace_back(params[i].value.shape());
    v.emplace_back(params[i].value.shape());
  }
}

template <typename T>
void adam_step(ParamSet<T>& params, const GradSet<T>& grads, AdamState<T>& state) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw Error("adam_step: parameter/gradient/state counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    if (grads[i].shape() != params[i].value.shape()) {
      throw Error("adam_step: gradient shape " + shape_string(grads[i].shape()) +
                  " does not match parameter " + params[i].name);
    }
    for (T g : grads[i].data()) {
      if (!std::isfinite(g)) throw Error("adam_step: non-finite gradient in parameter " + params[i].name);
    }
  }

  const AdamConfig& c = state.config;
  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(c.beta1), b2 = static_cast<T>(c.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    auto p = params[i].value.data();
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const double m_hat = static_cast<double>(m[j]) / bc1;
      const double v_hat = static_cast<double>(v[j]) / bc2;
      p[j] -= static_cast<T>(c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon));
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(ParamSet<float>&, const GradSet<float>&, AdamState<float>&);
template void adam_step<double>(ParamSet<double>&, const GradSet<double>&, AdamState<double>&);

}  // namespace deephate
