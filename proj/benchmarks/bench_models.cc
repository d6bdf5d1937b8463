// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include <benchmark/benchmark.h>

#include "twinlink/nn.hpp"
#include "twinlink/rng.hpp"

namespace {

using namespace twinlink;

models::NeuralConfig bench_config() {
    models::NeuralConfig cfg;
    cfg.input_rows = 32;
    cfg.input_cols = 128;
    cfg.conv_stack = {{8, 3, 2}, {16, 3, 2}, {32, 3, 2}};
    cfg.head = {512, 256};
    cfg.batch_size = 32;
    return cfg;
}

Eigen::MatrixXf random_batch(int dim, int n) {
    Rng rng(3);
    Eigen::MatrixXf x(dim, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < dim; ++r) x(r, c) = static_cast<float>(rng.normal());
    return x;
}

void BM_ForwardBatch32(benchmark::State& state) {
    const auto cfg = bench_config();
    const auto m = models::make_initial_state(cfg);
    models::Predictor predictor(m);
    const auto x = random_batch(cfg.input_dim(), 32);
    for (auto _ : state) {
        auto preds = predictor.predict(x);
        benchmark::DoNotOptimize(preds);
    }
}
BENCHMARK(BM_ForwardBatch32)->Unit(benchmark::kMillisecond);

void BM_BackwardBatch32(benchmark::State& state) {
    const auto cfg = bench_config();
    const auto m = models::make_initial_state(cfg);
    models::TrainDataset batch;
    batch.inputs = random_batch(cfg.input_dim(), 32);
    batch.labels.assign(32, 0);
    for (int i = 0; i < 32; i += 2) batch.labels[static_cast<std::size_t>(i)] = 1;
    for (auto _ : state) {
        auto grad = models::backward(m, batch, std::nullopt);
        benchmark::DoNotOptimize(grad);
    }
}
BENCHMARK(BM_BackwardBatch32)->Unit(benchmark::kMillisecond);

void BM_GradientCheckTiny(benchmark::State& state) {
    models::NeuralConfig cfg;
    cfg.input_rows = 6;
    cfg.input_cols = 8;
    cfg.conv_stack = {{2, 3, 2}};
    cfg.head = {6, 4};
    for (auto _ : state) {
        auto res = models::gradient_check(cfg, 5);
        benchmark::DoNotOptimize(res);
    }
}
BENCHMARK(BM_GradientCheckTiny)->Unit(benchmark::kMillisecond);

}  // namespace
