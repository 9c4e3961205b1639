#include "deephate/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "deephate/rng.h"

namespace deephate {

GradCheckReport grad_check(const std::function<LossEval()>& loss,
                           const GradSet<double>& analytic, ParamSet<double>& params,
                           const GradCheckOptions& options) {
  std::vector<std::pair<std::size_t, std::size_t>> entries;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params[p].trainable) continue;
    for (std::size_t j = 0; j < params[p].value.size(); ++j) entries.emplace_back(p, j);
  }
  if (entries.size() > options.exhaustive_limit) {
    Rng rng(mix_seed(options.seed, "grad_check"));
    rng.shuffle(entries.begin(), entries.end());
    entries.resize(std::min(entries.size(), std::max<std::size_t>(options.sample_size, 200)));
    std::sort(entries.begin(), entries.end());
  }

  const LossEval base = loss();
  if (!std::isfinite(base.loss)) throw Error("grad_check: non-finite loss at base point");

  GradCheckReport report;
  const double eps = options.epsilon;
  for (auto [p, j] : entries) {
    double& x = params[p].value[j];
    const double saved = x;
    x = saved + eps;
    const LossEval plus = loss();
    x = saved - eps;
    const LossEval minus = loss();
    x = saved;
    if (!std::isfinite(plus.loss) || !std::isfinite(minus.loss)) {
      throw Error("grad_check: non-finite loss perturbing " + params[p].name);
    }
    if (plus.relu_signature != base.relu_signature ||
        minus.relu_signature != base.relu_signature) {
      ++report.skipped_at_kink;
      continue;
    }
    const double fd = (plus.loss - minus.loss) / (2.0 * eps);
    const double ad = analytic[p][j];
    if (!std::isfinite(ad)) throw Error("grad_check: non-finite gradient in " + params[p].name);
    const double magnitude = std::abs(ad) + std::abs(fd);
    const double rel = std::abs(ad - fd) / std::max(options.relative_floor, magnitude);
    ++report.checked;
    if (magnitude < options.relative_floor) ++report.below_floor;
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_parameter = params[p].name;
      report.worst_index = j;
    }
  }
  return report;
}

}  // namespace deephate
