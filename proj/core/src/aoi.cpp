// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/aoi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twinlink::aoi {

void AoiConfig::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("aoi: gamma must be > 0");
    if (threshold < 0.0 || threshold >= 1.0)
        throw std::invalid_argument("aoi: threshold must be in [0, 1)");
}

double age(double t_now, double u_i) {
    if (t_now < u_i) throw std::invalid_argument("age: sample is future-stamped");
    return t_now - u_i;
}

double decay_weight(double delta, double gamma) {
    if (delta < 0.0) throw std::invalid_argument("decay_weight: delta must be >= 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("decay_weight: gamma must be > 0");
    return std::exp(-gamma * delta);
}

PruneResult prune(const std::vector<scene::Sample>& dataset, double t_now,
                  const AoiConfig& cfg) {
    cfg.validate();
    PruneResult res;
    for (const auto& s : dataset) {
        const double w = decay_weight(age(t_now, s.timestamp), cfg.gamma);
        if (w > cfg.threshold) {
            res.retained.push_back(s);
            ++res.n_retained;
        } else {
            ++res.n_dropped;
        }
    }
    return res;
}

WeightedBatch WeightedBatch::make(std::vector<double> predictions, std::vector<int> labels,
                                  std::vector<double> ages, double gamma) {
    if (predictions.size() != labels.size() || predictions.size() != ages.size())
        throw std::invalid_argument("weighted batch: length mismatch");
    WeightedBatch b;
    b.weights.reserve(ages.size());
    for (const double d : ages) b.weights.push_back(decay_weight(d, gamma));
    b.predictions = std::move(predictions);
    b.labels = std::move(labels);
    b.ages = std::move(ages);
    return b;
}

namespace {

double sample_bce(double p, int y) {
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    return y == 1 ? -std::log(pc) : -std::log(1.0 - pc);
}

double reduce(double sum, std::size_t n, Reduction reduction) {
    if (reduction == Reduction::Mean && n > 0) return sum / static_cast<double>(n);
    return sum;
}

}  // namespace

double bce_loss(const WeightedBatch& batch, Reduction reduction) {
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.predictions.size(); ++i)
        sum += sample_bce(batch.predictions[i], batch.labels[i]);
    return reduce(sum, batch.predictions.size(), reduction);
}

double aoi_loss(const WeightedBatch& batch, Reduction reduction) {
    if (batch.weights.size() != batch.predictions.size())
        throw std::invalid_argument("aoi_loss: weights missing");
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.predictions.size(); ++i)
        sum += sample_bce(batch.predictions[i], batch.labels[i]) * batch.weights[i];
    return reduce(sum, batch.predictions.size(), reduction);
}

void TwoPopulationConfig::validate() const {
    if (alpha < 0.0 || beta < 0.0)
        throw std::invalid_argument("two-population loss: alpha, beta must be >= 0");
    if (!(alpha + beta > 0.0))
        throw std::invalid_argument("two-population loss: alpha + beta must be > 0");
}

double two_population_loss(const WeightedBatch& batch_recent, const WeightedBatch& batch_old,
                           const TwoPopulationConfig& cfg, Reduction reduction) {
    cfg.validate();
    return cfg.alpha * aoi_loss(batch_recent, reduction) +
           cfg.beta * aoi_loss(batch_old, reduction);
}

}  // namespace twinlink::aoi
