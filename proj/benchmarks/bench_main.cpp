// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include <memory>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "nnaqat/nna_engine.hpp"
#include "nnaqat/training.hpp"

using namespace nnaqat;

namespace {

std::vector<double> random_values(std::size_t n, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

const TablePair& tables() {
  static const TablePair t = default_tables();
  return t;
}

void BM_QuantizeStatic(benchmark::State& state) {
  const auto xs = random_values(4096, 0.5, 1);
  for (auto _ : state) {
    double acc = 0.0;
    for (double x : xs) acc += quantize_static(x, kQ1_7, RoundingMode::kNearestTiesAway);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}
BENCHMARK(BM_QuantizeStatic);

void BM_QuantizeDynamic(benchmark::State& state) {
  const auto xs = random_values(static_cast<std::size_t>(state.range(0)), 4.0, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantize_dynamic(xs, kQ1_7, DynamicScaleSet::standard()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QuantizeDynamic)->Arg(64)->Arg(1024);

void BM_PwlEval(benchmark::State& state) {
  const auto xs = random_values(4096, 3.0, 3);
  const PwlTable& t = state.range(0) == 0 ? tables().tanh : tables().sigmoid;
  for (auto _ : state) {
    double acc = 0.0;
    for (double x : xs) acc += t.eval(x);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}
BENCHMARK(BM_PwlEval)->Arg(0)->Arg(1);

void BM_EngineLstmStep(benchmark::State& state) {
  const int H = static_cast<int>(state.range(0));
  const Network net = Network::init({H, H, 1, 1, 0}, 4);
  const EngineNetwork en = EngineNetwork::from(net, tables(), DynamicScaleSet::standard());
  const auto x = random_values(static_cast<std::size_t>(H), 1.0, 5);
  EngineState s = EngineState::zeros(static_cast<std::size_t>(H));
  for (auto _ : state) {
    s = engine_lstm_step(en.lstm[0], {x, {}}, s);
    benchmark::DoNotOptimize(s.h.data());
  }
}
BENCHMARK(BM_EngineLstmStep)->Arg(8)->Arg(64)->Arg(256);

void BM_EmulatorSequence(benchmark::State& state) {
  const int H = static_cast<int>(state.range(0));
  const NetworkSpec spec{2, H, 2, 1, 0};
  const Network net = Network::init(spec, 6);
  const auto policy = QuantPolicy::full_nna(std::make_shared<const TablePair>(tables()));
  SequenceInput in;
  for (int t = 0; t < 20; ++t) in.steps.push_back(Tensor(32, 2, std::vector<double>(random_values(64, 1.0, 7 + t))));
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(forward_sequence(bind_network(tape, net), in, build_stack(spec, policy), tape).output.value()[0]);
  }
}
BENCHMARK(BM_EmulatorSequence)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TrainingStep(benchmark::State& state) {
  TrainConfig c;
  c.task.train_size = 32;
  c.task.val_size = 32;
  c.steps = 1;
  c.lr = LrSchedule::constant(1e-3, 1);
  c.stage = state.range(0) == 1 ? Stage::kOne : Stage::kTwo;
  c.tables = std::make_shared<const TablePair>(tables());
  const Dataset train = gen_task(c.task, 1, Split::kTrain);
  const Checkpoint init{Network::init(c.model.network_for(c.task), 1), {}};
  for (auto _ : state) {
    if (c.stage == Stage::kOne) {
      benchmark::DoNotOptimize(stage1_train(c, train, train));
    } else {
      benchmark::DoNotOptimize(stage2_train(c, init, train, train));
    }
  }
}
BENCHMARK(BM_TrainingStep)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
