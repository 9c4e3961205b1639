#ifndef DEEPHATE_ENCODER_H_
#define DEEPHATE_ENCODER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "deephate/autodiff.h"
#include "deephate/params.h"

namespace deephate {

// C-LSTM-Att encoder: per filter width, a valid convolution with ReLU (no
// pooling), an LSTM over the resulting feature-map sequence, and attention
// driven by the final hidden state; attended vectors are concatenated in
// ascending width order.
struct EncoderConfig {
  std::size_t embed_dim = 300;
  std::vector<std::size_t> filter_widths{3, 4, 5};
  std::size_t filters = 50;
  std::size_t hidden = 200;
  std::size_t attention_dim = 100;

  std::size_t output_dim() const { return filter_widths.size() * hidden; }
  // Throws unless every width is in [1, max_len] and all sizes are positive.
  void validate(std::size_t max_len) const;
};

template <typename T>
struct LstmVars {
  Var<T> W_i, W_f, W_o, W_c;  // [z, z + n], acting on [h_{t-1}, x_t]
  Var<T> b_i, b_f, b_o, b_c;  // [z]
};

template <typename T>
struct AttentionVars {
  Var<T> W_H, W_h;  // [a, z]
  Var<T> b_h, w;    // [a]
};

template <typename T>
struct Attended {
  Var<T> x;      // [z]
  Var<T> alpha;  // [l]
};

template <typename T>
struct EncoderOutput {
  Var<T> x;                   // [v * z]
  std::vector<Var<T>> alphas; // one [L - k + 1] vector per width
};

// ReLU(conv1d_valid(E, filters, bias)): [L, d] -> [L - k + 1, n].
template <typename T>
Var<T> conv_feature_map(Var<T> embedded, Var<T> filters, Var<T> bias);

// h_0 = c_0 = 0; returns H = [h_1 ... h_l] as a [z, l] matrix.
template <typename T>
Var<T> lstm_forward(Var<T> features, const LstmVars<T>& lstm);

// M = tanh(W_H H + W_h h_l + b_h), alpha = softmax(w^T M), x = H alpha^T,
// where h_l is the last column of H.
template <typename T>
Attended<T> attend(Var<T> hidden_states, const AttentionVars<T>& attn);

// Adds the encoder's parameters under `prefix`. Matrices use Glorot-uniform
// initialization from (seed, parameter name); biases start at zero.
template <typename T>
void add_encoder_params(ParamSet<T>& params, const std::string& prefix,
                        const EncoderConfig& config, std::uint64_t seed);

template <typename T>
std::vector<Var<T>> conv_features(Tape<T>& tape, const ParamSet<T>& params,
                                  const std::string& prefix, const EncoderConfig& config,
                                  Var<T> embedded);

template <typename T>
EncoderOutput<T> encode(Tape<T>& tape, const ParamSet<T>& params, const std::string& prefix,
                        const EncoderConfig& config, Var<T> embedded);

// Parameter-name helpers, shared with checkpoint and test code.
std::string encoder_param_name(const std::string& prefix, std::size_t width,
                               const std::string& leaf);

}  // namespace deephate

#endif  // DEEPHATE_ENCODER_H_
