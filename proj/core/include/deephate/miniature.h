#ifndef DEEPHATE_MINIATURE_H_
#define DEEPHATE_MINIATURE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "deephate/gradcheck.h"
#include "deephate/model.h"

namespace deephate {

// A DeepHate small enough for exhaustive finite-difference checks:
// d=8, widths {2,3}, n=4, z=6, a=5, K=4, C=3, L=7 and 20 vocabulary rows
// (PAD and UNK included), with three labeled posts carrying topic mixtures.
struct Miniature {
  ModelConfig config;
  Vocabulary vocab;
  ModelTables tables;
  std::vector<Post> posts;
};

Miniature make_miniature(std::uint64_t seed, Variant variant = Variant::kFull,
                         bool freeze_pretrained = true);

struct ModelGradCheck {
  GradCheckReport report;
  double loss = 0.0;
  std::size_t trainable_arrays = 0;
  // Trainable arrays whose analytic gradient is identically zero.
  std::vector<std::string> zero_gradient_arrays;
};

// Mean cross-entropy over `posts` with fixed dropout masks (seed
// `dropout_seed`, or dropout off when train is false), differentiated by
// the tape and by central differences.
ModelGradCheck gradcheck_model(DeepHate<double>& model, const std::vector<const Post*>& posts,
                               bool train, std::uint64_t dropout_seed,
                               const GradCheckOptions& options = {});

}  // namespace deephate

#endif  // DEEPHATE_MINIATURE_H_
