#ifndef DEEPHATE_AUTODIFF_H_
#define DEEPHATE_AUTODIFF_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "deephate/params.h"
#include "deephate/tensor.h"

namespace deephate {

template <typename T>
class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while its tape lives.
template <typename T>
class Var {
 public:
  Var() = default;

  Tape<T>* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Tape<T>;
  Var(Tape<T>* tape, int id) : tape_(tape), id_(id) {}

  Tape<T>* tape_ = nullptr;
  int id_ = -1;
};

// Records a forward computation for reverse-mode differentiation. Nodes are
// appended in evaluation order, so the node list is already topologically
// sorted; backward walks it once in reverse. A tape is confined to a single
// thread.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf without gradient.
  Var<T> constant(Tensor<T> value);
  // Differentiable leaf that is not a parameter; its gradient can be read
  // back after backward().
  Var<T> input(Tensor<T> value);
  // Leaf referencing a parameter's storage. Frozen parameters behave like
  // constants. The parameter must outlive the tape.
  Var<T> parameter(const Parameter<T>& param);

  Var<T> record(Tensor<T> value, std::vector<int> inputs, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and propagates to every node that requires a
  // gradient. The loss must be a scalar (shape {1}).
  void backward(Var<T> loss);

  const Tensor<T>& value(int id) const;
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  // Gradient buffer for a node, allocated as zeros on first use.
  Tensor<T>& grad_buffer(int id);
  // nullptr when no gradient reached the node.
  const Tensor<T>* grad(Var<T> v) const;

  // Adds scale * gradient of every parameter leaf into grads (indexed by
  // Parameter::index). Parameters the loss never reached contribute nothing.
  void accumulate_into(GradSet<T>& grads, T scale = T(1)) const;

  // Fingerprint of the on/off pattern of every ReLU evaluated so far. Two
  // evaluations with equal fingerprints took the same linear piece.
  std::uint64_t relu_signature() const { return relu_signature_; }
  void note_relu(std::span<const T> pre_activation);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> own;
    const Tensor<T>* external = nullptr;
    Tensor<T> grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::vector<int> inputs;
    BackwardFn backward;
    const Parameter<T>* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::uint64_t relu_signature_ = 0xcbf29ce484222325ULL;
};

template <typename T>
const Tensor<T>& Var<T>::value() const {
  return tape_->value(id_);
}

// Differentiable operations. Shape violations throw Error naming the op and
// the offending shapes.
namespace ad {

// Rank-1 operands act as row vectors on the left and column vectors on the
// right: [m,k]x[k,n], [m,k]x[k], [k]x[k,n], [k]x[k].
template <typename T> Var<T> matmul(Var<T> a, Var<T> b);
// Elementwise with b broadcast over a: every dim of b equals a's or is 1
// (a rank-1 {1} operand broadcasts against anything).
template <typename T> Var<T> add(Var<T> a, Var<T> b);
template <typename T> Var<T> mul(Var<T> a, Var<T> b);
template <typename T> Var<T> sigmoid(Var<T> x);
template <typename T> Var<T> tanh(Var<T> x);
// Subgradient at 0 is 0.
template <typename T> Var<T> relu(Var<T> x);
template <typename T> Var<T> softmax(Var<T> x, std::size_t axis);
template <typename T> Var<T> softmax(Var<T> x) { return softmax(x, x.shape().size() - 1); }
template <typename T> Var<T> concat(const std::vector<Var<T>>& parts, std::size_t axis);
// Inverted dropout: kept entries are divided by (1 - p). Identity when
// !train or p == 0.
template <typename T> Var<T> dropout(Var<T> x, double p, bool train, std::uint64_t seed);
// -log(probs[label]) for a probability vector.
template <typename T> Var<T> cross_entropy(Var<T> probs, std::size_t label);
// Valid 1-d convolution over an [L, d] input with a [n, k*d] filter bank and
// [n] bias; output [L-k+1, n]. Window j is rows j..j+k-1 flattened.
template <typename T> Var<T> conv1d_valid(Var<T> input, Var<T> filters, Var<T> bias);
template <typename T> Var<T> row(Var<T> x, std::size_t r);
// Stacks equal-length vectors as the columns of a matrix.
template <typename T> Var<T> stack_columns(const std::vector<Var<T>>& columns);
template <typename T> Var<T> gather_rows(Var<T> table, std::span<const int> indices);
template <typename T> Var<T> max_over_rows(Var<T> x);
template <typename T> Var<T> reshape(Var<T> x, Shape shape);
template <typename T> Var<T> sum(Var<T> x);
template <typename T> Var<T> element(Var<T> x, std::size_t i);

}  // namespace ad
}  // namespace deephate

#endif  // DEEPHATE_AUTODIFF_H_
