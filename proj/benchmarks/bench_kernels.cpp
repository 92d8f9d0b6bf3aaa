// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "idn/model.hpp"
#include "idn/nn.hpp"
#include "idn/tape.hpp"
#include "idn/training.hpp"

namespace {

idn::Tensor random_tensor(idn::Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  idn::Tensor t(shape);
  for (float& v : t.data()) v = u(rng);
  return t;
}

idn::LayerParams<float> random_layer(const idn::ConvSpec& spec, std::uint64_t seed) {
  idn::LayerParams<float> p;
  p.weight = random_tensor(spec.weight_shape(), seed);
  p.bias = random_tensor(spec.bias_shape(), seed + 1);
  return p;
}

// args: batch, side, in, out, kernel, groups
void BM_Conv2d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto side = static_cast<std::size_t>(state.range(1));
  const auto k = static_cast<std::size_t>(state.range(4));
  const idn::ConvSpec spec{static_cast<std::size_t>(state.range(2)),
                           static_cast<std::size_t>(state.range(3)), k, k, 1, k / 2,
                           static_cast<std::size_t>(state.range(5))};
  const auto layer = random_layer(spec, 1);
  const auto x = random_tensor({n, spec.in_channels, side, side}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(idn::conv2d(x, spec, layer));
  state.counters["GFLOP/s"] = benchmark::Counter(
      2.0 * n * side * side * spec.out_channels * spec.in_per_group() * k * k,
      benchmark::Counter::kIsIterationInvariantRate, benchmark::Counter::kIs1000);
}
BENCHMARK(BM_Conv2d)
    ->Args({16, 29, 64, 64, 3, 1})
    ->Args({16, 29, 48, 32, 3, 4})
    ->Args({16, 29, 80, 64, 1, 1})
    ->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto side = static_cast<std::size_t>(state.range(1));
  const auto k = static_cast<std::size_t>(state.range(4));
  const idn::ConvSpec spec{static_cast<std::size_t>(state.range(2)),
                           static_cast<std::size_t>(state.range(3)), k, k, 1, k / 2,
                           static_cast<std::size_t>(state.range(5))};
  const auto layer = random_layer(spec, 1);
  const auto x = random_tensor({n, spec.in_channels, side, side}, 3);
  const auto dy = random_tensor({n, spec.out_channels, side, side}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(idn::conv2d_backward(x, spec, layer, dy));
  state.counters["GFLOP/s"] = benchmark::Counter(
      4.0 * n * side * side * spec.out_channels * spec.in_per_group() * k * k,
      benchmark::Counter::kIsIterationInvariantRate, benchmark::Counter::kIs1000);
}
BENCHMARK(BM_Conv2dBackward)
    ->Args({16, 29, 64, 64, 3, 1})
    ->Args({16, 29, 48, 32, 3, 4})
    ->Unit(benchmark::kMillisecond);

// args: batch, side, scale
void BM_TransposedConv(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto side = static_cast<std::size_t>(state.range(1));
  const auto m = static_cast<std::size_t>(state.range(2));
  const idn::ConvSpec spec{64, 1, 17, 17, m, 8, 1};
  const auto layer = random_layer(spec, 1);
  const auto x = random_tensor({n, 64, side, side}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(idn::transposed_conv2d(x, spec, layer));
}
BENCHMARK(BM_TransposedConv)->Args({16, 29, 2})->Args({16, 15, 3})->Unit(benchmark::kMillisecond);

// args: lr side, scale
void BM_IdnInfer(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  idn::IdnConfig config;
  config.scale = static_cast<std::size_t>(state.range(1));
  const auto params = idn::init_params<float>(config, 1);
  const auto x = random_tensor({1, 1, side, side}, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(idn::idn_forward(x, params, config, idn::Mode::Infer));
  }
}
BENCHMARK(BM_IdnInfer)->Args({128, 2})->Args({85, 3})->Unit(benchmark::kMillisecond);

// args: batch, lr patch side, scale
void BM_IdnTrainStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto side = static_cast<std::size_t>(state.range(1));
  idn::IdnConfig config;
  config.scale = static_cast<std::size_t>(state.range(2));
  auto params = idn::init_params<float>(config, 1);
  const auto x = random_tensor({n, 1, side, side}, 2);
  const std::size_t out = idn::output_size(config, side, idn::Mode::Train);
  const auto y = random_tensor({n, 1, out, out}, 3);
  idn::AdamState<float> adam;
  for (auto _ : state) {
    idn::Tape<float> tape;
    const auto v = idn::idn_forward(tape, tape.constant(x), params, config, idn::Mode::Train);
    const auto loss = idn::loss_mae(tape.value(v), y);
    const auto grads = tape.backward(v, loss.grad);
    idn::adam_step(params, grads.params, adam);
  }
}
BENCHMARK(BM_IdnTrainStep)->Args({16, 29, 2})->Args({16, 15, 2})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
