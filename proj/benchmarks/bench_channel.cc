// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include <benchmark/benchmark.h>

#include "twinlink/channel.hpp"
#include "twinlink/rng.hpp"

namespace {

using namespace twinlink;

std::vector<scene::PathRecord> make_paths(int n) {
    Rng rng(42);
    std::vector<scene::PathRecord> paths;
    for (int i = 0; i < n; ++i) {
        scene::PathRecord p;
        p.gain = std::polar(rng.uniform(0.1, 1.0), rng.uniform(-3.0, 3.0));
        p.delay = rng.uniform(0.0, 300e-9);
        p.azimuth = rng.uniform(-1.0, 1.0);
        p.elevation = rng.uniform(-0.5, 0.5);
        paths.push_back(p);
    }
    return paths;
}

void BM_SteeringVector(benchmark::State& state) {
    channel::ArrayConfig arr;  // 8 x 16
    for (auto _ : state) {
        auto e = channel::steering_vector(arr, 0.3, -0.1);
        benchmark::DoNotOptimize(e);
    }
}
BENCHMARK(BM_SteeringVector);

void BM_Sfcrm(benchmark::State& state) {
    channel::ArrayConfig arr;
    channel::OfdmConfig ofdm;
    ofdm.n_c = static_cast<int>(state.range(0));
    const auto paths = make_paths(6);
    for (auto _ : state) {
        auto h = channel::sfcrm(paths, arr, ofdm);
        benchmark::DoNotOptimize(h);
    }
}
BENCHMARK(BM_Sfcrm)->Arg(128)->Arg(512)->Arg(1024);

void BM_AddAwgn(benchmark::State& state) {
    channel::ArrayConfig arr;
    channel::OfdmConfig ofdm;
    ofdm.n_c = 512;
    const auto h = channel::sfcrm(make_paths(6), arr, ofdm);
    channel::NoiseModel nm;
    nm.snr_db = 10.0;
    for (auto _ : state) {
        auto noisy = channel::add_awgn(h, nm, ofdm);
        benchmark::DoNotOptimize(noisy);
    }
}
BENCHMARK(BM_AddAwgn);

}  // namespace
