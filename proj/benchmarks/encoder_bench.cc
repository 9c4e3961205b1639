#include <benchmark/benchmark.h>

#include "deephate/encoder.h"
#include "deephate/miniature.h"
#include "deephate/model.h"
#include "deephate/rng.h"

namespace dh = deephate;

namespace {

dh::Tensor<float> random_input(std::size_t len, std::size_t dim) {
  dh::Rng rng(5);
  dh::Tensor<float> x(dh::Shape{len, dim});
  for (auto& v : x.data()) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  return x;
}

// One C-LSTM-Att branch at the default sizes (d=300, widths 3/4/5, 50
// filters, z=200, a=100) over a post of range(0) tokens.
void BM_EncoderForward(benchmark::State& state) {
  const dh::EncoderConfig cfg;
  dh::ParamSet<float> params;
  dh::add_encoder_params(params, "enc", cfg, 1);
  const auto x = random_input(static_cast<std::size_t>(state.range(0)), cfg.embed_dim);
  for (auto _ : state) {
    dh::Tape<float> tape;
    auto out = dh::encode(tape, params, "enc", cfg, tape.constant(x));
    benchmark::DoNotOptimize(out.x.value().data().data());
  }
}
BENCHMARK(BM_EncoderForward)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_EncoderForwardBackward(benchmark::State& state) {
  const dh::EncoderConfig cfg;
  dh::ParamSet<float> params;
  dh::add_encoder_params(params, "enc", cfg, 1);
  const auto x = random_input(static_cast<std::size_t>(state.range(0)), cfg.embed_dim);
  for (auto _ : state) {
    dh::Tape<float> tape;
    auto out = dh::encode(tape, params, "enc", cfg, tape.input(x));
    tape.backward(dh::ad::sum(out.x));
  }
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

// Whole four-branch model on the gradcheck miniature, forward only.
void BM_MiniatureForward(benchmark::State& state) {
  const dh::Miniature m = dh::make_miniature(1);
  const dh::DeepHate<float> model(m.config, m.vocab, m.tables);
  for (auto _ : state) {
    for (const auto& p : m.posts) benchmark::DoNotOptimize(dh::predict_proba(model, p));
  }
}
BENCHMARK(BM_MiniatureForward);

}  // namespace
