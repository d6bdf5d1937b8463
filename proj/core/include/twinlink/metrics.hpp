// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_METRICS_HPP
#define TWINLINK_METRICS_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace twinlink::metrics {

struct Confusion {
    std::size_t tp = 0;  // predicted 1, label 1
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    double accuracy() const;
};

Confusion confusion(const std::vector<int>& predicted, const std::vector<int>& labels);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct RocResult {
    std::vector<RocPoint> points;  // fpr ascending
    double auc = 0.0;
};

// Thresholds swept over unique scores (predict 1 when score >= threshold),
// equal scores grouped; AUC by the trapezoid rule. Throws when only one
// class is present.
RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Fixed-range histogram of per-class logits, for drift diagnosis.
struct LogitHistogram {
    double lo = -25.0;
    double hi = 25.0;
    int bins = 50;
    std::vector<std::size_t> class0;  // underflow/overflow clamp into edge bins
    std::vector<std::size_t> class1;
    double mean0 = 0.0;
    double mean1 = 0.0;
    std::size_t n0 = 0;
    std::size_t n1 = 0;
};

LogitHistogram logit_histogram(const std::vector<double>& logits, const std::vector<int>& labels,
                               double lo = -25.0, double hi = 25.0, int bins = 50);

// One evaluation summary; serialized into metrics.json by the harness.
struct MetricsReport {
    std::string name;
    Confusion confusion;
    double accuracy = 0.0;
    RocResult roc;
    LogitHistogram logits;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    std::size_t n_test = 0;
};

}  // namespace twinlink::metrics

#endif  // TWINLINK_METRICS_HPP
