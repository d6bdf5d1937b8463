// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_NN_HPP
#define TWINLINK_NN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twinlink/aoi.hpp"
#include "twinlink/rng.hpp"

namespace twinlink::models {

struct ConvSpec {
    int out_channels = 8;
    int kernel = 3;
    int stride = 2;
};

// Small convolutional classifier on pooled ADCPM inputs: configurable conv
// stack, two hidden dense layers, one sigmoid output.
struct NeuralConfig {
    std::vector<ConvSpec> conv_stack = {{8, 3, 2}, {16, 3, 2}, {32, 3, 2}};
    std::vector<int> head = {512, 256};
    int input_rows = 32;   // pooled ADCPM rows (angle)
    int input_cols = 128;  // pooled ADCPM cols (delay)
    double learning_rate = 1e-4;
    int batch_size = 32;
    int max_epochs = 200;
    int patience = 5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    aoi::Reduction loss_reduction = aoi::Reduction::Mean;
    std::uint64_t rng_seed = 1;

    void validate() const;  // shape-chain consistency, throws
    int input_dim() const { return input_rows * input_cols; }
    std::string canonical_string() const;
    std::uint64_t digest() const;  // FNV-1a over canonical_string()

    static NeuralConfig from_canonical_string(const std::string& s);
};

// Flat parameter vector plus shape table (implied by the config), optimizer
// moments and training metadata. Lineage records the fine-tuning chain.
struct ModelState {
    NeuralConfig config;
    std::vector<float> params;
    std::vector<float> adam_m;
    std::vector<float> adam_v;
    std::int64_t adam_steps = 0;
    int epochs_trained = 0;
    std::vector<std::string> lineage;
    std::vector<double> val_history;  // per-epoch validation loss, not persisted

    std::uint64_t parameter_hash() const;
};

ModelState make_initial_state(const NeuralConfig& cfg);

struct TrainDataset {
    Eigen::MatrixXf inputs;   // input_dim x n, one column per sample
    std::vector<int> labels;  // 0/1
    std::vector<double> ages;  // s; empty means all zero

    std::size_t size() const { return labels.size(); }
};

// sigma(nu) = 1 / (1 + e^{-nu}).
double sigmoid(double nu);

struct Prediction {
    double logit = 0.0;
    double prob = 0.5;
};

Prediction forward(const ModelState& state, const Eigen::Ref<const Eigen::VectorXf>& input);

// Batch evaluation without rebuilding the network per call.
class Predictor {
  public:
    explicit Predictor(const ModelState& state);
    ~Predictor();
    Predictor(const Predictor&) = delete;
    Predictor& operator=(const Predictor&) = delete;

    std::vector<Prediction> predict(const Eigen::Ref<const Eigen::MatrixXf>& inputs) const;

  private:
    struct Impl;
    Impl* impl_;
};

// Gradient of the (optionally AoI-weighted) BCE over the batch, in training
// precision and parameter-vector order.
std::vector<float> backward(const ModelState& state, const TrainDataset& batch,
                            const std::optional<aoi::AoiConfig>& aoi_cfg);

// Mini-batch Adam with early stopping on validation loss. Warm starts from
// `state` when given (parameters copied, optimizer moments reset); otherwise
// parameters are drawn fresh from the seeded fan-in initializer.
ModelState train(const NeuralConfig& cfg, const TrainDataset& train_set,
                 const TrainDataset& val_set, const std::optional<aoi::AoiConfig>& aoi_cfg,
                 const ModelState* state, const std::string& dataset_id);

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::int64_t param_count = 0;
};

// Central-difference check of the analytic gradient in double precision.
// `fault_scale` != 1 multiplies the largest-magnitude analytic entry before
// the comparison, to verify the check detects corrupted gradients.
// `input_scale` scales the random check batch (0 gives an all-zero batch).
GradCheckResult gradient_check(const NeuralConfig& cfg, std::uint64_t seed,
                               double fd_step = 1e-4, double fault_scale = 1.0,
                               double input_scale = 1.0);

void save_checkpoint(const std::string& path, const ModelState& state);
ModelState load_checkpoint(const std::string& path);

}  // namespace twinlink::models

#endif  // TWINLINK_NN_HPP
