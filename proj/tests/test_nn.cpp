// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "twinlink/nn.hpp"
#include "twinlink/rng.hpp"

using namespace twinlink;
using models::ModelState;
using models::NeuralConfig;
using models::TrainDataset;

namespace {

NeuralConfig tiny_config() {
    NeuralConfig cfg;
    cfg.input_rows = 6;
    cfg.input_cols = 8;
    cfg.conv_stack = {{2, 3, 2}};
    cfg.head = {6, 4};
    cfg.rng_seed = 21;
    return cfg;
}

NeuralConfig flat_config(int features) {
    NeuralConfig cfg;
    cfg.input_rows = 1;
    cfg.input_cols = features;
    cfg.conv_stack = {};
    cfg.head = {8, 4};
    cfg.learning_rate = 0.05;
    cfg.batch_size = 8;
    cfg.max_epochs = 50;
    cfg.patience = 50;
    cfg.rng_seed = 5;
    return cfg;
}

// Two separable blobs in 2-d.
void separable_toy(TrainDataset& train, TrainDataset& val) {
    Rng rng(17);
    const int n = 120;
    train.inputs.resize(2, n);
    train.labels.resize(n);
    val.inputs.resize(2, 40);
    val.labels.resize(40);
    for (int i = 0; i < n + 40; ++i) {
        const int y = i % 2;
        const float cx = y == 1 ? 2.0f : -2.0f;
        const float a = cx + static_cast<float>(rng.normal(0.0, 0.4));
        const float b = -cx + static_cast<float>(rng.normal(0.0, 0.4));
        if (i < n) {
            train.inputs.col(i) << a, b;
            train.labels[static_cast<std::size_t>(i)] = y;
        } else {
            val.inputs.col(i - n) << a, b;
            val.labels[static_cast<std::size_t>(i - n)] = y;
        }
    }
}

double train_accuracy(const ModelState& state, const TrainDataset& data) {
    models::Predictor p(state);
    const auto preds = p.predict(data.inputs);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        correct += (preds[i].prob >= 0.5 ? 1 : 0) == data.labels[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

}  // namespace

TEST_CASE("sigmoid identities") {
    CHECK(models::sigmoid(0.0) == 0.5);
    CHECK(models::sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-12));
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const double nu = rng.uniform(-30.0, 30.0);
        CHECK(std::abs(models::sigmoid(nu) + models::sigmoid(-nu) - 1.0) <= 1e-12);
    }
}

TEST_CASE("all-zero parameters give logit zero for every input") {
    auto cfg = tiny_config();
    auto state = models::make_initial_state(cfg);
    std::fill(state.params.begin(), state.params.end(), 0.0f);
    Rng rng(2);
    for (int i = 0; i < 5; ++i) {
        Eigen::VectorXf x(cfg.input_dim());
        for (int j = 0; j < x.size(); ++j) x(j) = static_cast<float>(rng.normal());
        const auto pred = models::forward(state, x);
        CHECK(pred.logit == 0.0);
        CHECK(pred.prob == 0.5);
    }
}

TEST_CASE("gradient check: analytic gradient matches central differences") {
    const auto cfg = tiny_config();
    const auto res = models::gradient_check(cfg, 1234);
    CHECK(res.param_count <= 1000);
    CHECK(res.max_rel_error <= 1e-6);
}

TEST_CASE("gradient check flags an injected fault") {
    const auto cfg = tiny_config();
    const auto res = models::gradient_check(cfg, 1234, 1e-4, 2.0);
    CHECK(res.max_rel_error > 1e-2);
}

TEST_CASE("gradient check on a zero-input batch stays finite") {
    // Zero inputs park activations exactly on the ReLU kink, where analytic
    // and two-sided finite differences legitimately disagree; the metric
    // itself must stay finite.
    const auto cfg = tiny_config();
    const auto res = models::gradient_check(cfg, 99, 1e-4, 1.0, 0.0);
    CHECK(std::isfinite(res.max_rel_error));
}

TEST_CASE("perfect predictions give a near-zero gradient") {
    NeuralConfig cfg = flat_config(2);
    auto state = models::make_initial_state(cfg);
    std::fill(state.params.begin(), state.params.end(), 0.0f);
    state.params.back() = 30.0f;  // output bias: logit 30, p ~ 1

    TrainDataset batch;
    batch.inputs = Eigen::MatrixXf::Zero(2, 4);
    batch.labels = {1, 1, 1, 1};
    const auto grad = models::backward(state, batch, std::nullopt);
    double norm = 0.0;
    for (const float g : grad) norm += static_cast<double>(g) * g;
    CHECK(std::sqrt(norm) <= 1e-5);
}

TEST_CASE("zero ages reproduce the unweighted gradient bitwise") {
    const auto cfg = tiny_config();
    auto state = models::make_initial_state(cfg);
    Rng rng(31);
    TrainDataset batch;
    batch.inputs.resize(cfg.input_dim(), 6);
    batch.labels.resize(6);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < cfg.input_dim(); ++j)
            batch.inputs(j, i) = static_cast<float>(rng.normal());
        batch.labels[static_cast<std::size_t>(i)] = i % 2;
    }
    const auto plain = models::backward(state, batch, std::nullopt);
    batch.ages.assign(6, 0.0);
    aoi::AoiConfig acfg;
    acfg.gamma = 0.7;
    const auto weighted = models::backward(state, batch, acfg);
    REQUIRE(plain.size() == weighted.size());
    for (std::size_t i = 0; i < plain.size(); ++i) CHECK(plain[i] == weighted[i]);
}

TEST_CASE("training separates a linearly separable toy set within 50 epochs") {
    TrainDataset train, val;
    separable_toy(train, val);
    const auto cfg = flat_config(2);
    const auto state = models::train(cfg, train, val, std::nullopt, nullptr, "toy");
    CHECK(train_accuracy(state, train) == 1.0);
    CHECK(state.epochs_trained <= 50);
    CHECK(state.lineage == std::vector<std::string>{"toy"});
}

TEST_CASE("early stopping halts within patience epochs of the best epoch") {
    TrainDataset train, val;
    separable_toy(train, val);
    // Random labels make validation loss plateau quickly.
    Rng rng(8);
    for (auto& y : train.labels) y = static_cast<int>(rng.below(2));
    for (auto& y : val.labels) y = static_cast<int>(rng.below(2));
    auto cfg = flat_config(2);
    cfg.max_epochs = 200;
    cfg.patience = 5;
    const auto state = models::train(cfg, train, val, std::nullopt, nullptr, "noise");
    CHECK(state.epochs_trained < 200);
    REQUIRE(!state.val_history.empty());
    const auto best =
        std::min_element(state.val_history.begin(), state.val_history.end());
    const auto best_epoch = std::distance(state.val_history.begin(), best) + 1;
    CHECK(state.epochs_trained - best_epoch <= cfg.patience);
}

TEST_CASE("training is deterministic given identical configs and data") {
    TrainDataset train, val;
    separable_toy(train, val);
    auto cfg = flat_config(2);
    cfg.max_epochs = 10;
    const auto a = models::train(cfg, train, val, std::nullopt, nullptr, "d");
    const auto b = models::train(cfg, train, val, std::nullopt, nullptr, "d");
    CHECK(a.parameter_hash() == b.parameter_hash());
    CHECK(a.params == b.params);
}

TEST_CASE("warm start trains from exactly the provided parameters") {
    TrainDataset train, val;
    separable_toy(train, val);
    auto cfg = flat_config(2);
    cfg.max_epochs = 5;
    const auto base = models::train(cfg, train, val, std::nullopt, nullptr, "stage0");
    const auto h0 = base.parameter_hash();

    // Zero epochs: parameters must pass through untouched.
    auto cfg0 = cfg;
    cfg0.max_epochs = 0;
    const auto same = models::train(cfg0, train, val, std::nullopt, &base, "stage1");
    CHECK(same.parameter_hash() == h0);
    CHECK(same.lineage == std::vector<std::string>{"stage0", "stage1"});

    // Zero learning rate: one epoch of updates changes nothing.
    auto cfg_lr0 = cfg;
    cfg_lr0.max_epochs = 1;
    cfg_lr0.learning_rate = 0.0;
    const auto frozen = models::train(cfg_lr0, train, val, std::nullopt, &base, "s");
    CHECK(frozen.parameter_hash() == h0);
}

TEST_CASE("aoi weighting with all ages zero gives the identical trajectory") {
    TrainDataset train, val;
    separable_toy(train, val);
    auto cfg = flat_config(2);
    cfg.max_epochs = 8;
    const auto plain = models::train(cfg, train, val, std::nullopt, nullptr, "x");
    train.ages.assign(train.size(), 0.0);
    aoi::AoiConfig acfg;
    acfg.gamma = 0.4;
    const auto weighted = models::train(cfg, train, val, acfg, nullptr, "x");
    CHECK(plain.params == weighted.params);
}

TEST_CASE("divergence aborts with diagnostics") {
    TrainDataset train, val;
    separable_toy(train, val);
    auto cfg = flat_config(2);
    cfg.max_epochs = 1;
    auto poisoned = models::make_initial_state(cfg);
    poisoned.params[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(models::train(cfg, train, val, std::nullopt, &poisoned, "bad"),
                    std::runtime_error);
}

TEST_CASE("checkpoint round trip preserves state") {
    TrainDataset train, val;
    separable_toy(train, val);
    auto cfg = flat_config(2);
    cfg.max_epochs = 3;
    const auto state = models::train(cfg, train, val, std::nullopt, nullptr, "ckpt-test");

    const std::string tmp = "/tmp/twinlink_ckpt_test.bin";
    models::save_checkpoint(tmp, state);
    const auto back = models::load_checkpoint(tmp);
    CHECK(back.params == state.params);
    CHECK(back.adam_m == state.adam_m);
    CHECK(back.adam_steps == state.adam_steps);
    CHECK(back.epochs_trained == state.epochs_trained);
    CHECK(back.lineage == state.lineage);
    CHECK(back.config.digest() == state.config.digest());

    // Corrupting the magic is detected.
    std::fstream f(tmp, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
    f.close();
    CHECK_THROWS_AS(models::load_checkpoint(tmp), std::runtime_error);
    std::remove(tmp.c_str());
}

TEST_CASE("config canonical string round trips") {
    auto cfg = tiny_config();
    cfg.learning_rate = 3.14e-5;
    cfg.loss_reduction = aoi::Reduction::Sum;
    const auto back = NeuralConfig::from_canonical_string(cfg.canonical_string());
    CHECK(back.digest() == cfg.digest());
    CHECK(back.conv_stack.size() == cfg.conv_stack.size());
    CHECK(back.learning_rate == cfg.learning_rate);
    CHECK(back.loss_reduction == cfg.loss_reduction);
}

TEST_CASE("config validation rejects inconsistent shapes") {
    auto cfg = tiny_config();
    cfg.conv_stack = {{4, 9, 1}};  // kernel larger than the 6x8 input
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.head = {8};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.patience = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    TrainDataset empty_train, val;
    separable_toy(val, val);
    CHECK_THROWS_AS(models::train(flat_config(2), empty_train, val, std::nullopt, nullptr, "e"),
                    std::invalid_argument);
}

TEST_CASE("forward rejects mismatched input shapes") {
    const auto cfg = tiny_config();
    const auto state = models::make_initial_state(cfg);
    Eigen::VectorXf wrong(cfg.input_dim() + 1);
    wrong.setZero();
    CHECK_THROWS_AS(models::forward(state, wrong), std::invalid_argument);
}
