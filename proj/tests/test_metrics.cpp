// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "twinlink/metrics.hpp"
#include "twinlink/rng.hpp"

using namespace twinlink;

namespace {

// Mann-Whitney pairwise statistic, ties counted as 1/2.
double mann_whitney(const std::vector<double>& scores, const std::vector<int>& labels) {
    double u = 0.0;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        ++n_pos;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] == 1) continue;
            if (scores[i] > scores[j])
                u += 1.0;
            else if (scores[i] == scores[j])
                u += 0.5;
        }
    }
    for (const int y : labels) n_neg += y == 0 ? 1 : 0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace

TEST_CASE("confusion counts and accuracy") {
    const auto c = metrics::confusion({1, 0, 1, 1, 0}, {1, 0, 0, 1, 1});
    CHECK(c.tp == 2);
    CHECK(c.tn == 1);
    CHECK(c.fp == 1);
    CHECK(c.fn == 1);
    CHECK(c.accuracy() == doctest::Approx(0.6));
    CHECK_THROWS_AS(metrics::confusion({1}, {1, 0}), std::invalid_argument);
}

TEST_CASE("perfectly separated scores give auc 1") {
    const std::vector<double> scores = {0.9, 0.8, 0.7, 0.2, 0.1};
    const std::vector<int> labels = {1, 1, 1, 0, 0};
    const auto r = metrics::roc_auc(scores, labels);
    CHECK(r.auc == doctest::Approx(1.0));
    CHECK(r.points.front().fpr == 0.0);
    CHECK(r.points.front().tpr == 0.0);
    CHECK(r.points.back().fpr == doctest::Approx(1.0));
    CHECK(r.points.back().tpr == doctest::Approx(1.0));
}

TEST_CASE("labels independent of scores give auc near 0.5") {
    Rng rng(17);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 4000; ++i) {
        scores.push_back(rng.normal());
        labels.push_back(static_cast<int>(rng.below(2)));
    }
    const auto r = metrics::roc_auc(scores, labels);
    CHECK(std::abs(r.auc - 0.5) <= 0.05);
}

TEST_CASE("auc equals the Mann-Whitney statistic, including ties") {
    Rng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> scores;
        std::vector<int> labels;
        bool has0 = false, has1 = false;
        for (int i = 0; i < 150; ++i) {
            // Small integer grid forces plenty of ties.
            scores.push_back(static_cast<double>(rng.below(8)));
            const int y = static_cast<int>(rng.below(2));
            labels.push_back(y);
            (y == 1 ? has1 : has0) = true;
        }
        if (!has0 || !has1) continue;
        const auto r = metrics::roc_auc(scores, labels);
        CHECK(std::abs(r.auc - mann_whitney(scores, labels)) <= 1e-9);
    }
}

TEST_CASE("roc points are monotone in fpr and tpr") {
    Rng rng(23);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 500; ++i) {
        const int y = static_cast<int>(rng.below(2));
        scores.push_back(rng.normal(y == 1 ? 0.5 : -0.5, 1.0));
        labels.push_back(y);
    }
    const auto r = metrics::roc_auc(scores, labels);
    for (std::size_t i = 1; i < r.points.size(); ++i) {
        CHECK(r.points[i].fpr >= r.points[i - 1].fpr);
        CHECK(r.points[i].tpr >= r.points[i - 1].tpr);
    }
}

TEST_CASE("single-class labels are rejected") {
    CHECK_THROWS_AS(metrics::roc_auc({0.1, 0.2}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(metrics::roc_auc({0.1, 0.2}, {0, 0}), std::invalid_argument);
}

TEST_CASE("logit histogram bins, clamping, and means") {
    const std::vector<double> logits = {-100.0, -1.0, 0.5, 2.0, 100.0};
    const std::vector<int> labels = {0, 0, 1, 1, 1};
    const auto h = metrics::logit_histogram(logits, labels, -10.0, 10.0, 20);
    std::size_t total0 = 0, total1 = 0;
    for (const auto c : h.class0) total0 += c;
    for (const auto c : h.class1) total1 += c;
    CHECK(total0 == 2);
    CHECK(total1 == 3);
    CHECK(h.class0.front() == 1);  // -100 clamps into the lowest bin
    CHECK(h.class1.back() == 1);   // +100 clamps into the highest bin
    CHECK(h.mean0 == doctest::Approx(-50.5));
    CHECK(h.mean1 == doctest::Approx((0.5 + 2.0 + 100.0) / 3.0));
    CHECK(h.n0 == 2);
    CHECK(h.n1 == 3);
}
