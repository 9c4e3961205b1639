#ifndef DEEPHATE_GRADCHECK_H_
#define DEEPHATE_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <string>

#include "deephate/params.h"

namespace deephate {

struct GradCheckOptions {
  double epsilon = 1e-5;
  // Above this many trainable entries a seeded sample is checked instead.
  std::size_t exhaustive_limit = 5000;
  std::size_t sample_size = 400;
  std::uint64_t seed = 0;
  // Denominator floor of the relative error. Central differences carry
  // round-off of about 1e-16 * |loss| / epsilon (~1e-11 here), so entries
  // whose gradients are much smaller than the floor are judged on an
  // absolute scale of floor * tolerance instead.
  double relative_floor = 1e-6;
};

// One evaluation of the loss. `relu_signature` identifies the linear piece
// the evaluation landed on (see Tape::relu_signature); perturbations that
// change it straddle a ReLU kink and are excluded.
struct LossEval {
  double loss = 0.0;
  std::uint64_t relu_signature = 0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_at_kink = 0;
  // Checked entries with |g_ad| + |g_fd| below relative_floor.
  std::size_t below_floor = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
};

// Compares `analytic` (reverse-mode gradients aligned with `params`) against
// central differences (f(x+e) - f(x-e)) / 2e. Relative error per entry is
// |g_ad - g_fd| / max(relative_floor, |g_ad| + |g_fd|). `loss` must read `params`,
// which are perturbed in place and restored.
GradCheckReport grad_check(const std::function<LossEval()>& loss,
                           const GradSet<double>& analytic, ParamSet<double>& params,
                           const GradCheckOptions& options = {});

}  // namespace deephate

#endif  // DEEPHATE_GRADCHECK_H_
