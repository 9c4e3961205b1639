#ifndef DEEPHATE_ADAM_H_
#define DEEPHATE_ADAM_H_

#include <cstdint>
#include <vector>

#include "deephate/params.h"

namespace deephate {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(const ParamSet<T>& params, AdamConfig config);
};

// One bias-corrected Adam update of every trainable parameter. Frozen
// parameters are left untouched. Throws before mutating anything if a
// gradient is non-finite.
template <typename T>
void adam_step(ParamSet<T>& params, const GradSet<T>& grads, AdamState<T>& state);

}  // namespace deephate

#endif  // DEEPHATE_ADAM_H_
