// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_AOI_HPP
#define TWINLINK_AOI_HPP

#include <cstddef>
#include <vector>

#include "twinlink/scene.hpp"

namespace twinlink::aoi {

inline constexpr double kProbClamp = 1e-7;

struct AoiConfig {
    double gamma = 0.1;      // decay rate, 1/s, > 0
    double threshold = 0.0;  // age violation threshold Gamma, in [0, 1)

    void validate() const;  // throws std::invalid_argument
};

enum class Reduction { Sum, Mean };

// Age Delta_i(t) = t_now - u_i; throws if the sample is future-stamped.
double age(double t_now, double u_i);

// Decay factor e^{-gamma * delta}, in (0, 1].
double decay_weight(double delta, double gamma);

struct PruneResult {
    std::vector<scene::Sample> retained;  // order preserved
    std::size_t n_retained = 0;
    std::size_t n_dropped = 0;
};

// Keep exactly the samples with decay_weight(age) strictly greater than the
// threshold; boundary samples are dropped.
PruneResult prune(const std::vector<scene::Sample>& dataset, double t_now, const AoiConfig& cfg);

// Predictions, labels, ages and the matching decay weights for one batch.
struct WeightedBatch {
    std::vector<double> predictions;  // p-hat, clamped on use
    std::vector<int> labels;          // 0/1
    std::vector<double> ages;         // s, >= 0
    std::vector<double> weights;      // e^{-gamma * age}

    static WeightedBatch make(std::vector<double> predictions, std::vector<int> labels,
                              std::vector<double> ages, double gamma);
};

// Binary cross entropy, predictions clamped to [eps, 1-eps].
double bce_loss(const WeightedBatch& batch, Reduction reduction = Reduction::Sum);

// AoI-aware loss: per-sample BCE scaled by the decay weight.
double aoi_loss(const WeightedBatch& batch, Reduction reduction = Reduction::Sum);

struct TwoPopulationConfig {
    double alpha = 1.0;
    double beta = 0.0;
    double gamma_alpha = 0.1;
    double gamma_beta = 0.1;
    double boundary = 0.0;  // timestamp separating recent from old

    void validate() const;
};

// alpha * L'(recent; gamma_alpha) + beta * L'(old; gamma_beta).
double two_population_loss(const WeightedBatch& batch_recent, const WeightedBatch& batch_old,
                           const TwoPopulationConfig& cfg, Reduction reduction = Reduction::Sum);

}  // namespace twinlink::aoi

#endif  // TWINLINK_AOI_HPP
