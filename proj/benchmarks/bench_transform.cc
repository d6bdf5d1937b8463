// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include <benchmark/benchmark.h>

#include "twinlink/rng.hpp"
#include "twinlink/transform.hpp"

namespace {

using namespace twinlink;

channel::Sfcrm random_channel(int rows, int cols) {
    Rng rng(7);
    channel::Sfcrm h;
    h.entries.resize(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) h.entries(r, c) = {rng.normal(), rng.normal()};
    return h;
}

void BM_Adcpm(benchmark::State& state) {
    const int n_v = 8, n_h = 16;
    const int n_c = static_cast<int>(state.range(0));
    const auto dft = transform::build_dft(n_v, n_h, n_c);
    const auto h = random_channel(n_v * n_h, n_c);
    for (auto _ : state) {
        auto p = transform::adcpm({h}, dft);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_Adcpm)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Maxpool(benchmark::State& state) {
    transform::AdcpmMatrix p;
    p.entries = Eigen::MatrixXd::Random(128, 512).cwiseAbs();
    for (auto _ : state) {
        auto pooled = transform::maxpool(p, 4, 4);
        benchmark::DoNotOptimize(pooled);
    }
}
BENCHMARK(BM_Maxpool);

void BM_NormalizeLogPower(benchmark::State& state) {
    transform::AdcpmMatrix p;
    p.entries = Eigen::MatrixXd::Random(32, 128).cwiseAbs();
    for (auto _ : state) {
        auto n = transform::normalize_log_power(p);
        benchmark::DoNotOptimize(n);
    }
}
BENCHMARK(BM_NormalizeLogPower);

}  // namespace
