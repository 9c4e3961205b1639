#include "deephate/encoder.h"

namespace deephate {

void EncoderConfig::validate(std::size_t max_len) const {
  if (embed_dim == 0 || filters == 0 || hidden == 0 || attention_dim == 0) {
    throw Error("encoder: dimensions must be positive");
  }
  if (filter_widths.empty()) throw Error("encoder: at least one filter width required");
  for (std::size_t k : filter_widths) {
    if (k < 1 || k > max_len) {
      throw Error("encoder: filter width " + std::to_string(k) + " outside [1, " +
                  std::to_string(max_len) + "]");
    }
  }
}

std::string encoder_param_name(const std::string& prefix, std::size_t width,
                               const std::string& leaf) {
  return prefix + ".k" + std::to_string(width) + "." + leaf;
}

template <typename T>
Var<T> conv_feature_map(Var<T> embedded, Var<T> filters, Var<T> bias) {
  return ad::relu(ad::conv1d_valid(embedded, filters, bias));
}

template <typename T>
Var<T> lstm_forward(Var<T> features, const LstmVars<T>& lstm) {
  Tape<T>& tape = *features.tape();
  const Shape& fs = features.shape();
  if (fs.size() != 2) throw Error("lstm_forward: features must be [l, n], got " + shape_string(fs));
  const Shape& ws = lstm.W_i.shape();
  const std::size_t l = fs[0], n = fs[1];
  if (ws.size() != 2 || ws[1] <= ws[0] || ws[1] - ws[0] != n) {
    throw Error("lstm_forward: weight shape " + shape_string(ws) + " incompatible with input " +
                shape_string(fs));
  }
  const std::size_t z = ws[0];
  auto gate = [&](Var<T> W, Var<T> b, Var<T> hx) { return ad::add(ad::matmul(W, hx), b); };

  Var<T> h = tape.constant(Tensor<T>(Shape{z}));
  Var<T> c = tape.constant(Tensor<T>(Shape{z}));
  std::vector<Var<T>> columns;
  columns.reserve(l);
  for (std::size_t t = 0; t < l; ++t) {
    Var<T> hx = ad::concat<T>({h, ad::row(features, t)}, 0);
    Var<T> i = ad::sigmoid(gate(lstm.W_i, lstm.b_i, hx));
    Var<T> f = ad::sigmoid(gate(lstm.W_f, lstm.b_f, hx));
    Var<T> o = ad::sigmoid(gate(lstm.W_o, lstm.b_o, hx));
    Var<T> candidate = ad::tanh(gate(lstm.W_c, lstm.b_c, hx));
    c = ad::add(ad::mul(f, c), ad::mul(i, candidate));
    h = ad::mul(o, ad::tanh(c));
    columns.push_back(h);
  }
  return ad::stack_columns(columns);
}

template <typename T>
Attended<T> attend(Var<T> hidden_states, const AttentionVars<T>& attn) {
  Tape<T>& tape = *hidden_states.tape();
  const Shape& hs = hidden_states.shape();
  if (hs.size() != 2) throw Error("attend: H must be [z, l], got " + shape_string(hs));
  const std::size_t l = hs[1];
  const std::size_t a = attn.W_H.shape()[0];

  Tensor<T> last(Shape{l});
  last[l - 1] = T(1);
  Var<T> h_last = ad::matmul(hidden_states, tape.constant(std::move(last)));
  Var<T> query = ad::reshape(ad::add(ad::matmul(attn.W_h, h_last), attn.b_h), Shape{a, 1});
  Var<T> M = ad::tanh(ad::add(ad::matmul(attn.W_H, hidden_states), query));
  Var<T> alpha = ad::softmax(ad::matmul(attn.w, M));
  return {ad::matmul(hidden_states, alpha), alpha};
}

template <typename T>
void add_encoder_params(ParamSet<T>& params, const std::string& prefix,
                        const EncoderConfig& cfg, std::uint64_t seed) {
  const std::size_t d = cfg.embed_dim, n = cfg.filters, z = cfg.hidden, a = cfg.attention_dim;
  auto name = [&](std::size_t k, const char* leaf) { return encoder_param_name(prefix, k, leaf); };
  for (std::size_t k : cfg.filter_widths) {
    params.add(name(k, "conv.filters"),
               glorot_uniform<T>({n, k * d}, k * d, n, seed, name(k, "conv.filters")));
    params.add(name(k, "conv.bias"), Tensor<T>(Shape{n}));
    for (const char* g : {"W_i", "W_f", "W_o", "W_c"}) {
      const std::string nm = name(k, (std::string("lstm.") + g).c_str());
      params.add(nm, glorot_uniform<T>({z, z + n}, z + n, z, seed, nm));
    }
    for (const char* b : {"b_i", "b_f", "b_o", "b_c"}) {
      params.add(name(k, (std::string("lstm.") + b).c_str()), Tensor<T>(Shape{z}));
    }
    params.add(name(k, "attn.W_H"), glorot_uniform<T>({a, z}, z, a, seed, name(k, "attn.W_H")));
    params.add(name(k, "attn.W_h"), glorot_uniform<T>({a, z}, z, a, seed, name(k, "attn.W_h")));
    params.add(name(k, "attn.b_h"), Tensor<T>(Shape{a}));
    params.add(name(k, "attn.w"), glorot_uniform<T>({a}, a, 1, seed, name(k, "attn.w")));
  }
}

template <typename T>
std::vector<Var<T>> conv_features(Tape<T>& tape, const ParamSet<T>& params,
                                  const std::string& prefix, const EncoderConfig& cfg,
                                  Var<T> embedded) {
  std::vector<Var<T>> maps;
  for (std::size_t k : cfg.filter_widths) {
    auto p = [&](const char* leaf) {
      return tape.parameter(params.get(encoder_param_name(prefix, k, leaf)));
    };
    maps.push_back(conv_feature_map(embedded, p("conv.filters"), p("conv.bias")));
  }
  return maps;
}

template <typename T>
EncoderOutput<T> encode(Tape<T>& tape, const ParamSet<T>& params, const std::string& prefix,
                        const EncoderConfig& cfg, Var<T> embedded) {
  const Shape& es = embedded.shape();
  if (es.size() != 2 || es[1] != cfg.embed_dim) {
    throw Error("encode: embedded input " + shape_string(es) + " does not have " +
                std::to_string(cfg.embed_dim) + " columns");
  }
  const auto maps = conv_features(tape, params, prefix, cfg, embedded);
  EncoderOutput<T> out;
  std::vector<Var<T>> parts;
  for (std::size_t w = 0; w < cfg.filter_widths.size(); ++w) {
    const std::size_t k = cfg.filter_widths[w];
    auto p = [&](const char* leaf) {
      return tape.parameter(params.get(encoder_param_name(prefix, k, leaf)));
    };
    LstmVars<T> lstm{p("lstm.W_i"), p("lstm.W_f"), p("lstm.W_o"), p("lstm.W_c"),
                     p("lstm.b_i"), p("lstm.b_f"), p("lstm.b_o"), p("lstm.b_c")};
    AttentionVars<T> attn{p("attn.W_H"), p("attn.W_h"), p("attn.b_h"), p("attn.w")};
    Attended<T> att = attend(lstm_forward(maps[w], lstm), attn);
    parts.push_back(att.x);
    out.alphas.push_back(att.alpha);
  }
  out.x = parts.size() == 1 ? parts.front() : ad::concat(parts, 0);
  return out;
}

#define DEEPHATE_INSTANTIATE_ENCODER(T)                                                     \
  template Var<T> conv_feature_map<T>(Var<T>, Var<T>, Var<T>);                              \
  template Var<T> lstm_forward<T>(Var<T>, const LstmVars<T>&);                              \
  template Attended<T> attend<T>(Var<T>, const AttentionVars<T>&);                          \
  template void add_encoder_params<T>(ParamSet<T>&, const std::string&,                     \
                                      const EncoderConfig&, std::uint64_t);                 \
  template std::vector<Var<T>> conv_features<T>(Tape<T>&, const ParamSet<T>&,               \
                                                const std::string&, const EncoderConfig&,   \
                                                Var<T>);                                    \
  template EncoderOutput<T> encode<T>(Tape<T>&, const ParamSet<T>&, const std::string&,     \
                                      const EncoderConfig&, Var<T>);

DEEPHATE_INSTANTIATE_ENCODER(float)
DEEPHATE_INSTANTIATE_ENCODER(double)

#undef DEEPHATE_INSTANTIATE_ENCODER

}  // namespace deephate
