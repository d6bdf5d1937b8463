// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace twinlink::metrics {

double Confusion::accuracy() const {
    const std::size_t n = total();
    if (n == 0) return 0.0;
    return static_cast<double>(tp + tn) / static_cast<double>(n);
}

Confusion confusion(const std::vector<int>& predicted, const std::vector<int>& labels) {
    if (predicted.size() != labels.size())
        throw std::invalid_argument("confusion: size mismatch");
    Confusion c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (labels[i] == 1)
            ++(predicted[i] == 1 ? c.tp : c.fn);
        else
            ++(predicted[i] == 1 ? c.fp : c.tn);
    }
    return c;
}

RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("roc: size mismatch");
    std::size_t n_pos = 0;
    for (const int y : labels) n_pos += static_cast<std::size_t>(y);
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
    });

    RocResult res;
    res.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        // Consume the whole tie group before emitting a point.
        while (i < order.size() && scores[order[i]] == s) {
            if (labels[order[i]] == 1)
                ++tp;
            else
                ++fp;
            ++i;
        }
        const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
        res.points.push_back({fpr, tpr, s});
        res.auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    return res;
}

LogitHistogram logit_histogram(const std::vector<double>& logits, const std::vector<int>& labels,
                               double lo, double hi, int bins) {
    if (logits.size() != labels.size())
        throw std::invalid_argument("logit_histogram: size mismatch");
    if (bins < 1 || !(hi > lo)) throw std::invalid_argument("logit_histogram: bad bin spec");
    LogitHistogram h;
    h.lo = lo;
    h.hi = hi;
    h.bins = bins;
    h.class0.assign(static_cast<std::size_t>(bins), 0);
    h.class1.assign(static_cast<std::size_t>(bins), 0);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double v = logits[i];
        int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        b = std::clamp(b, 0, bins - 1);
        if (labels[i] == 1) {
            ++h.class1[static_cast<std::size_t>(b)];
            h.mean1 += v;
            ++h.n1;
        } else {
            ++h.class0[static_cast<std::size_t>(b)];
            h.mean0 += v;
            ++h.n0;
        }
    }
    if (h.n0 > 0) h.mean0 /= static_cast<double>(h.n0);
    if (h.n1 > 0) h.mean1 /= static_cast<double>(h.n1);
    return h;
}

}  // namespace twinlink::metrics
