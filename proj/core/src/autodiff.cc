#include "deephate/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "deephate/rng.h"

namespace deephate {

template <typename T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  Node n;
  n.own = std::move(value);
  nodes_.push_back(std::move(n));
  return Var<T>(this, static_cast<int>(nodes_.size() - 1));
}

template <typename T>
Var<T> Tape<T>::input(Tensor<T> value) {
  Node n;
  n.own = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var<T>(this, static_cast<int>(nodes_.size() - 1));
}

template <typename T>
Var<T> Tape<T>::parameter(const Parameter<T>& param) {
  Node n;
  n.external = &param.value;
  n.requires_grad = param.trainable;
  n.param = &param;
  nodes_.push_back(std::move(n));
  return Var<T>(this, static_cast<int>(nodes_.size() - 1));
}

template <typename T>
Var<T> Tape<T>::record(Tensor<T> value, std::vector<int> inputs, BackwardFn backward) {
  Node n;
  n.own = std::move(value);
  for (int id : inputs) {
    if (nodes_[id].requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) {
    n.inputs = std::move(inputs);
    n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var<T>(this, static_cast<int>(nodes_.size() - 1));
}

template <typename T>
const Tensor<T>& Tape<T>::value(int id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.own;
}

template <typename T>
Tensor<T>& Tape<T>::grad_buffer(int id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor<T>(value(id).shape());
    n.has_grad = true;
  }
  return n.grad;
}

template <typename T>
const Tensor<T>* Tape<T>::grad(Var<T> v) const {
  const Node& n = nodes_[v.id()];
  return n.has_grad ? &n.grad : nullptr;
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  if (loss.tape() != this) throw Error("backward: loss belongs to another tape");
  if (value(loss.id()).size() != 1) {
    throw Error("backward: loss must be scalar, got shape " +
                shape_string(value(loss.id()).shape()));
  }
  grad_buffer(loss.id())[0] = T(1);
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.requires_grad || !n.backward) continue;
    n.backward(*this, id);
  }
}

template <typename T>
void Tape<T>::accumulate_into(GradSet<T>& grads, T scale) const {
  for (const Node& n : nodes_) {
    if (!n.param || !n.has_grad) continue;
    auto dst = grads[n.param->index].data();
    auto src = n.grad.data();
    if (dst.size() != src.size()) throw Error("accumulate: gradient shape mismatch for " + n.param->name);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  }
}

template <typename T>
void Tape<T>::note_relu(std::span<const T> pre_activation) {
  for (T x : pre_activation) {
    relu_signature_ ^= (x > T(0)) ? 0x9eULL : 0x35ULL;
    relu_signature_ *= 0x100000001b3ULL;
  }
}

template class Tape<float>;
template class Tape<double>;

namespace ad {
namespace {

template <typename T>
Tape<T>& same_tape(const char* op, std::initializer_list<Var<T>> vars) {
  Tape<T>* tape = nullptr;
  for (const auto& v : vars) {
    if (!v.valid()) throw Error(std::string(op) + ": invalid operand");
    if (tape && v.tape() != tape) throw Error(std::string(op) + ": operands on different tapes");
    tape = v.tape();
  }
  return *tape;
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw Error(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " +
              shape_string(b));
}

// Maps each index of a onto the broadcast index of b.
std::vector<std::size_t> broadcast_map(const char* op, const Shape& a, const Shape& b) {
  const std::size_t n = shape_size(a);
  std::vector<std::size_t> map(n, 0);
  if (shape_size(b) == 1) return map;
  if (a.size() != b.size()) shape_error(op, a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] != a[i] && b[i] != 1) shape_error(op, a, b);
  }
  if (a == b) {
    for (std::size_t i = 0; i < n; ++i) map[i] = i;
    return map;
  }
  std::vector<std::size_t> a_strides(a.size()), b_strides(b.size());
  std::size_t sa = 1, sb = 1;
  for (std::size_t i = a.size(); i-- > 0;) {
    a_strides[i] = sa;
    b_strides[i] = (b[i] == 1) ? 0 : sb;
    sa *= a[i];
    sb *= b[i];
  }
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t rem = flat, bi = 0;
    for (std::size_t d = 0; d < a.size(); ++d) {
      std::size_t idx = rem / a_strides[d];
      rem %= a_strides[d];
      bi += idx * b_strides[d];
    }
    map[flat] = bi;
  }
  return map;
}

struct MatDims {
  std::size_t m, k, n;
};

MatDims matmul_dims(const Shape& a, const Shape& b) {
  if (a.size() > 2 || b.size() > 2) shape_error("matmul", a, b);
  std::size_t m = a.size() == 2 ? a[0] : 1;
  std::size_t ka = a.size() == 2 ? a[1] : a[0];
  std::size_t kb = b[0];
  std::size_t n = b.size() == 2 ? b[1] : 1;
  if (ka != kb) shape_error("matmul", a, b);
  return {m, ka, n};
}

Shape matmul_shape(const Shape& a, const Shape& b, const MatDims& d) {
  if (a.size() == 2 && b.size() == 2) return {d.m, d.n};
  if (a.size() == 2) return {d.m};
  if (b.size() == 2) return {d.n};
  return {1};
}

// C[m,n] += A[m,k] * B[k,n]
template <typename T>
void gemm_nn(std::span<const T> a, std::span<const T> b, std::span<T> c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      if (av == T(0)) continue;
      const T* brow = b.data() + p * n;
      T* crow = c.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void add_into(Tensor<T>& dst, std::span<const T> src) {
  auto d = dst.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += src[i];
}

struct AxisSplit {
  std::size_t outer, len, inner;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
  AxisSplit r{1, s[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

}  // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Tape<T>& tape = same_tape("matmul", {a, b});
  const auto& av = a.value();
  const auto& bv = b.value();
  MatDims d = matmul_dims(av.shape(), bv.shape());
  Tensor<T> out(matmul_shape(av.shape(), bv.shape(), d));
  gemm_nn<T>(av.data(), bv.data(), out.data(), d.m, d.k, d.n);
  const int ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [ia, ib, d](Tape<T>& t, int self) {
    auto g = t.grad_buffer(self).data();
    const auto A = t.value(ia).data();
    const auto B = t.value(ib).data();
    if (t.requires_grad(ia)) {
      // dA[m,k] = G[m,n] * B^T
      auto ga = t.grad_buffer(ia).data();
      for (std::size_t i = 0; i < d.m; ++i) {
        for (std::size_t p = 0; p < d.k; ++p) {
          T acc = 0;
          for (std::size_t j = 0; j < d.n; ++j) acc += g[i * d.n + j] * B[p * d.n + j];
          ga[i * d.k + p] += acc;
        }
      }
    }
    if (t.requires_grad(ib)) {
      // dB[k,n] = A^T * G
      auto gb = t.grad_buffer(ib).data();
      for (std::size_t i = 0; i < d.m; ++i) {
        for (std::size_t p = 0; p < d.k; ++p) {
          const T av = A[i * d.k + p];
          for (std::size_t j = 0; j < d.n; ++j) gb[p * d.n + j] += av * g[i * d.n + j];
        }
      }
    }
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  Tape<T>& tape = same_tape("add", {a, b});
  auto map = broadcast_map("add", a.shape(), b.shape());
  const auto& av = a.value();
  const auto bd = b.value().data();
  Tensor<T> out(av.shape());
  auto o = out.data();
  const auto ad = av.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = ad[i] + bd[map[i]];
  const int ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib},
                     [ia, ib, map = std::move(map)](Tape<T>& t, int self) {
                       auto g = t.grad_buffer(self).data();
                       if (t.requires_grad(ia)) add_into<T>(t.grad_buffer(ia), g);
                       if (t.requires_grad(ib)) {
                         auto gb = t.grad_buffer(ib).data();
                         for (std::size_t i = 0; i < g.size(); ++i) gb[map[i]] += g[i];
                       }
                     });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  Tape<T>& tape = same_tape("mul", {a, b});
  auto map = broadcast_map("mul", a.shape(), b.shape());
  const auto& av = a.value();
  const auto bd = b.value().data();
  Tensor<T> out(av.shape());
  auto o = out.data();
  const auto ad = av.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = ad[i] * bd[map[i]];
  const int ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib},
                     [ia, ib, map = std::move(map)](Tape<T>& t, int self) {
                       auto g = t.grad_buffer(self).data();
                       const auto A = t.value(ia).data();
                       const auto B = t.value(ib).data();
                       if (t.requires_grad(ia)) {
                         auto ga = t.grad_buffer(ia).data();
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[map[i]];
                       }
                       if (t.requires_grad(ib)) {
                         auto gb = t.grad_buffer(ib).data();
                         for (std::size_t i = 0; i < g.size(); ++i) gb[map[i]] += g[i] * A[i];
                       }
                     });
}

template <typename T>
Var<T> sigmoid(Var<T> x) {
  Tape<T>& tape = same_tape("sigmoid", {x});
  Tensor<T> out(x.shape());
  auto o = out.data();
  const auto xd = x.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = T(1) / (T(1) + std::exp(-xd[i]));
  const int ix = x.id();
  return tape.record(std::move(out), {ix}, [ix](Tape<T>& t, int self) {
    auto g = t.grad_buffer(self).data();
    auto y = t.value(self).data();
    auto gx = t.grad_buffer(ix).data();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (T(1) - y[i]);
  });
}

template <typename T>
Var<T> tanh(Var<T> x) {
  Tape<T>& tape = same_tape("tanh", {x});
  Tensor<T> out(x.shape());
  auto o = out.data();
  const auto xd = x.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::tanh(xd[i]);
  const int ix = x.id();
  return tape.record(std::move(out), {ix}, [ix](Tape<T>& t, int self) {
    auto g = t.grad_buffer(self).data();
    auto y = t.value(self).data();
    auto gx = t.grad_buffer(ix).data();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (T(1) - y[i] * y[i]);
  });
}

template <typename T>
Var<T> relu(Var<T> x) {
  Tape<T>& tape = same_tape("relu", {x});
  const auto xd = x.value().data();
  tape.note_relu(xd);
  Tensor<T> out(x.shape());
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = xd[i] > T(0) ? xd[i] : T(0);
  const int ix = x.id();
  return tape.record(std::move(out), {ix}, [ix](Tape<T>& t, int self) {
    auto g = t.grad_buffer(self).data();
    auto xin = t.value(ix).data();
    auto gx = t.grad_buffer(ix).data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xin[i] > T(0)) gx[i] += g[i];
    }
  });
}

template <typename T>
Var<T> softmax(Var<T> x, std::size_t axis) {
  Tape<T>& tape = same_tape("softmax", {x});
  if (axis >= x.shape().size()) {
    throw Error("softmax: axis " + std::to_string(axis) + " out of range for shape " +
                shape_string(x.shape()));
  }
  const AxisSplit s = split_axis(x.shape(), axis);
  Tensor<T> out(x.shape());
  auto o = out.data();
  const auto xd = x.value().data();
  for (std::size_t a = 0; a < s.outer; ++a) {
    for (std::size_t c = 0; c < s.inner; ++c) {
      auto at = [&](std::size_t j) { return (a * s.len + j) * s.inner + c; };
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < s.len; ++j) mx = std::max(mx, xd[at(j)]);
      T total = 0;
      for (std::size_t j = 0; j < s.len; ++j) {
        o[at(j)] = std::exp(xd[at(j)] - mx);
        total += o[at(j)];
      }
      for (std::size_t j = 0; j < s.len; ++j) o[at(j)] /= total;
    }
  }
  const int ix = x.id();
  return tape.record(std::move(out), {ix}, [ix, s](Tape<T>& t, int self) {
    auto g = t.grad_buffer(self).data();
    auto y = t.value(self).data();
    auto gx = t.grad_buffer(ix).data();
    for (std::size_t a = 0; a < s.outer; ++a) {
      for (std::size_t c = 0; c < s.inner; ++c) {
        auto at = [&](std::size_t j) { return (a * s.len + j) * s.inner + c; };
        T dot = 0;
        for (std::size_t j = 0; j < s.len; ++j) dot += g[at(j)] * y[at(j)];
        for (std::size_t j = 0; j < s.len; ++j) gx[at(j)] += y[at(j)] * (g[at(j)] - dot);
      }
    }
  });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw Error("concat: no operands");
  Tape<T>& tape = *parts.front().tape();
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw Error("concat: axis out of range for " + shape_string(first));
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<int> ids;
  std::vector<std::size_t> lens;
  for (const auto& p : parts) {
    if (p.tape() != &tape) throw Error("concat: operands on different tapes");
    const Shape& s = p.shape();
    if (s.size() != first.size()) shape_error("concat", first, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) shape_error("concat", first, s);
    }
    out_shape[axis] += s[axis];
    ids.push_back(p.id());
    lens.push_back(s[axis]);
  }
  const AxisSplit so = split_axis(out_shape, axis);
  Tensor<T> out(out_shape);
  auto o = out.data();
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto src = parts[k].value().data();
    const std::size_t len = lens[k];
    for (std::size_t a = 0; a < so.outer; ++a) {
      for (std::size_t j = 0; j < len; ++j) {
        for (std::size_t c = 0; c < so.inner; ++c) {
          o[(a * so.len + offset + j) * so.inner + c] = src[(a * len + j) * so.inner + c];
        }
      }
    }
    offset += len;
  }
  return tape.record(std::move(out), ids, [ids, lens, so](Tape<T>& t, int self) {
    auto g = t.grad_buffer(self).data();
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const std::size_t len = lens[k];
      if (t.requires_grad(ids[k])) {
        auto gp = t.grad_buffer(ids[k]).data();
        for (std::size_t a = 0; a < so.outer; ++a) {
          for (std::size_t j = 0; j < len; ++j) {
            for (std::size_t c = 0; c < so.inner; ++c) {
              gp[(a * len + j) * so.inner + c] += g[(a * so.len + offset + j) * so.inner + c];
            }
          }
        }
      }
      offset += len;
    }
  });
}

template <typename T>
Var<T> dropout(Var<T> x, double p, bool train, std::uint64_t seed) {
  if (p < 0.0 || p >= 1.0) throw Error("dropout: rate must be in [0, 1), got " + std::to_string(p));
  if (!train || p == 0.0) return x;
  Tape<T>& tape = same_tape("dropout", {x});
  Rng rng(seed);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  Tensor<T> mask(x.shape());
  for (auto& m : mask.data()) m = rng.uniform() >= p ? keep_scale : T(0);
  Tensor<T> out(x.shape());
  const auto xd = x.value().data();
  const auto md = mask.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = xd[i] * md[i];
  const int ix = x.id();
  return tape.record(std::move(out), {ix}, [ix, mask = std::move(mask)](Tape<T>& t, int self) {
    auto g = t.grad_buffer(self).data();
    auto gx = t.grad_buffer(ix).data();
    const auto md = mask.data();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * md[i];
  });
}

template <typename T>
Var<T> cross_entropy(Var<T> probs, std::size_t label) {
  Tape<T>& tape = same_tape("cross_entropy", {probs});
  if (probs.shape().size() != 1 || label >= probs.shape()[0]) {
    throw Error("cross_entropy: label " + std::to_string(label) + " invalid for shape " +
                shape_string(probs.shape()));
  }
  const T p = probs.value()[label];
  Tensor<T> out = Tensor<T>::scalar(-std::log(p));
  const int ip = probs.id();
  return tape.record(std::move(out), {ip}, [ip, label](Tape<T>& t, int self) {
    const T g = t.grad_buffer(self)[0];
    const T p = t.value(ip)[label];
    t.grad_buffer(ip)[label] += -g / p;
  });
}

template <typename T>
Var<T> conv1d_valid(Var<T> input, Var<T> filters, Var<T> bias) {
  Tape<T>& tape = same_tape("conv1d_valid", {input, filters, bias});
  const Shape& is = input.shape();
  const Shape& fs = filters.shape();
  const Shape& bs = bias.shape();
  if (is.size() != 2 || fs.size() != 2 || fs[1] % is[1] != 0) shape_error("conv1d_valid", is, fs);
  if (bs.size() != 1 || bs[0] != fs[0]) shape_error("conv1d_valid", fs, bs);
  const std::size_t L = is[0], d = is[1], n = fs[0], window = fs[1];
  const std::size_t k = window / d;
  if (L < k) {
    throw Error("conv1d_valid: sequence length " + std::to_string(L) +
                " shorter than filter width " + std::to_string(k));
  }
  const std::size_t l = L - k + 1;
  Tensor<T> out(Shape{l, n});
  const auto E = input.value().data();
  const auto W = filters.value().data();
  const auto B = bias.value().data();
  auto o = out.data();
  for (std::size_t j = 0; j < l; ++j) {
    const T* w_j = E.data() + j * d;  // rows j..j+k-1 are contiguous
    for (std::size_t f = 0; f < n; ++f) {
      const T* m = W.data() + f * window;
      T acc = B[f];
      for (std::size_t q = 0; q < window; ++q) acc += m[q] * w_j[q];
      o[j * n + f] = acc;
    }
  }
  const int ie = input.id(), iw = filters.id(), ib = bias.id();
  return tape.record(std::move(out), {ie, iw, ib},
                     [ie, iw, ib, l, n, d, window](Tape<T>& t, int self) {
                       auto g = t.grad_buffer(self).data();
                       const auto E = t.value(ie).data();
                       const auto W = t.value(iw).data();
                       if (t.requires_grad(ib)) {
                         auto gb = t.grad_buffer(ib).data();
                         for (std::size_t j = 0; j < l; ++j)
                           for (std::size_t f = 0; f < n; ++f) gb[f] += g[j * n + f];
                       }
                       if (t.requires_grad(iw)) {
                         auto gw = t.grad_buffer(iw).data();
                         for (std::size_t j = 0; j < l; ++j) {
                           const T* w_j = E.data() + j * d;
                           for (std::size_t f = 0; f < n; ++f) {
                             const T gv = g[j * n + f];
                             if (gv == T(0)) continue;
                             T* gm = gw.data() + f * window;
                             for (std::size_t q = 0; q < window; ++q) gm[q] += gv * w_j[q];
                           }
                         }
                       }
                       if (t.requires_grad(ie)) {
                         auto ge = t.grad_buffer(ie).data();
                         for (std::size_t j = 0; j < l; ++j) {
                           T* gw_j = ge.data() + j * d;
                           for (std::size_t f = 0; f < n; ++f) {
                             const T gv = g[j * n + f];
                             if (gv == T(0)) continue;
                             const T* m = W.data() + f * window;
                             for (std::size_t q = 0; q < window; ++q) gw_j[q] += gv * m[q];
                           }
                         }
                       }
                     });
}

template <typename T>
Var<T> row(Var<T> x, std::size_t r) {
  Tape<T>& tape = same_tape("row", {x});
  const Shape& s = x.shape();
  if (s.size() != 2 || r >= s[0]) {
    throw Error("row: index " + std::to_string(r) + " invalid for shape " + shape_string(s));
  }
  const std::size_t cols = s[1];
  const auto xd = x.value().data();
  Tensor<T> out(Shape{cols}, std::vector<T>(xd.begin() + r * cols, xd.begin() + (r + 1) * cols));
  const int ix = x.id();
  return tape.record(std::move(out), {ix}, [ix, r, cols](Tape<T>& t, int self) {
    auto g = t.grad_buffer(self).data();
    auto gx = t.grad_buffer(ix).data();
    for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[c];
  });
}

template <typename T>
Var<T> stack_columns(const std::vector<Var<T>>& columns) {
  if (columns.empty()) throw Error("stack_columns: no operands");
  Tape<T>& tape = *columns.front().tape();
  const Shape& first = columns.front().shape();
  if (first.size() != 1) throw Error("stack_columns: columns must be rank 1, got " + shape_string(first));
  const std::size_t rows = first[0], cols = columns.size();
  Tensor<T> out(Shape{rows, cols});
  std::vector<int> ids;
  for (std::size_t c = 0; c < cols; ++c) {
    if (columns[c].tape() != &tape) throw Error("stack_columns: operands on different tapes");
    if (columns[c].shape() != first) shape_error("stack_columns", first, columns[c].shape());
    const auto v = columns[c].value().data();
    for (std::size_t r = 0; r < rows; ++r) out(r, c) = v[r];
    ids.push_back(columns[c].id());
  }
  return tape.record(std::move(out), ids, [ids, rows, cols](Tape<T>& t, int self) {
    const auto& g = t.grad_buffer(self);
    for (std::size_t c = 0; c < cols; ++c) {
      if (!t.requires_grad(ids[c])) continue;
      auto gc = t.grad_buffer(ids[c]).data();
      for (std::size_t r = 0; r < rows; ++r) gc[r] += g(r, c);
    }
  });
}

template <typename T>
Var<T> gather_rows(Var<T> table, std::span<const int> indices) {
  Tape<T>& tape = same_tape("gather_rows", {table});
  const Shape& s = table.shape();
  if (s.size() != 2) throw Error("gather_rows: table must be rank 2, got " + shape_string(s));
  if (indices.empty()) throw Error("gather_rows: empty index list");
  const std::size_t d = s[1];
  Tensor<T> out(Shape{indices.size(), d});
  const auto td = table.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int idx = indices[i];
    if (idx < 0 || static_cast<std::size_t>(idx) >= s[0]) {
      throw Error("gather_rows: index " + std::to_string(idx) + " outside table of " +
                  std::to_string(s[0]) + " rows");
    }
    std::copy_n(td.begin() + idx * d, d, o.begin() + i * d);
  }
  const int it = table.id();
  std::vector<int> idx(indices.begin(), indices.end());
  return tape.record(std::move(out), {it}, [it, d, idx = std::move(idx)](Tape<T>& t, int self) {
    auto g = t.grad_buffer(self).data();
    auto gt = t.grad_buffer(it).data();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t c = 0; c < d; ++c) gt[idx[i] * d + c] += g[i * d + c];
    }
  });
}

template <typename T>
Var<T> max_over_rows(Var<T> x) {
  Tape<T>& tape = same_tape("max_over_rows", {x});
  const Shape& s = x.shape();
  if (s.size() != 2) throw Error("max_over_rows: expected rank 2, got " + shape_string(s));
  const std::size_t rows = s[0], cols = s[1];
  const auto& xv = x.value();
  Tensor<T> out(Shape{cols});
  std::vector<std::size_t> argmax(cols, 0);
  for (std::size_t c = 0; c < cols; ++c) {
    T best = xv(0, c);
    for (std::size_t r = 1; r < rows; ++r) {
      if (xv(r, c) > best) {
        best = xv(r, c);
        argmax[c] = r;
      }
    }
    out[c] = best;
  }
  const int ix = x.id();
  return tape.record(std::move(out), {ix},
                     [ix, cols, argmax = std::move(argmax)](Tape<T>& t, int self) {
                       auto g = t.grad_buffer(self).data();
                       auto gx = t.grad_buffer(ix).data();
                       for (std::size_t c = 0; c < cols; ++c) gx[argmax[c] * cols + c] += g[c];
                     });
}

template <typename T>
Var<T> reshape(Var<T> x, Shape shape) {
  Tape<T>& tape = same_tape("reshape", {x});
  if (shape_size(shape) != x.value().size()) shape_error("reshape", x.shape(), shape);
  Tensor<T> out(std::move(shape), x.value().values());
  const int ix = x.id();
  return tape.record(std::move(out), {ix}, [ix](Tape<T>& t, int self) {
    add_into<T>(t.grad_buffer(ix), t.grad_buffer(self).data());
  });
}

template <typename T>
Var<T> sum(Var<T> x) {
  Tape<T>& tape = same_tape("sum", {x});
  T total = 0;
  for (T v : x.value().data()) total += v;
  const int ix = x.id();
  return tape.record(Tensor<T>::scalar(total), {ix}, [ix](Tape<T>& t, int self) {
    const T g = t.grad_buffer(self)[0];
    for (auto& gx : t.grad_buffer(ix).data()) gx += g;
  });
}

template <typename T>
Var<T> element(Var<T> x, std::size_t i) {
  Tape<T>& tape = same_tape("element", {x});
  if (i >= x.value().size()) {
    throw Error("element: index " + std::to_string(i) + " outside shape " +
                shape_string(x.shape()));
  }
  const int ix = x.id();
  return tape.record(Tensor<T>::scalar(x.value()[i]), {ix}, [ix, i](Tape<T>& t, int self) {
    t.grad_buffer(ix)[i] += t.grad_buffer(self)[0];
  });
}

#define DEEPHATE_INSTANTIATE_OPS(T)                                                 \
  template Var<T> matmul<T>(Var<T>, Var<T>);                                        \
  template Var<T> add<T>(Var<T>, Var<T>);                                           \
  template Var<T> mul<T>(Var<T>, Var<T>);                                           \
  template Var<T> sigmoid<T>(Var<T>);                                               \
  template Var<T> tanh<T>(Var<T>);                                                  \
  template Var<T> relu<T>(Var<T>);                                                  \
  template Var<T> softmax<T>(Var<T>, std::size_t);                                  \
  template Var<T> concat<T>(const std::vector<Var<T>>&, std::size_t);               \
  template Var<T> dropout<T>(Var<T>, double, bool, std::uint64_t);                  \
  template Var<T> cross_entropy<T>(Var<T>, std::size_t);                            \
  template Var<T> conv1d_valid<T>(Var<T>, Var<T>, Var<T>);                          \
  template Var<T> row<T>(Var<T>, std::size_t);                                      \
  template Var<T> stack_columns<T>(const std::vector<Var<T>>&);                     \
  template Var<T> gather_rows<T>(Var<T>, std::span<const int>);                     \
  template Var<T> max_over_rows<T>(Var<T>);                                         \
  template Var<T> reshape<T>(Var<T>, Shape);                                        \
  template Var<T> sum<T>(Var<T>);                                                   \
  template Var<T> element<T>(Var<T>, std::size_t);

DEEPHATE_INSTANTIATE_OPS(float)
DEEPHATE_INSTANTIATE_OPS(double)

#undef DEEPHATE_INSTANTIATE_OPS

}  // namespace ad
}  // namespace deephate
