// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "twinlink/rng.hpp"

namespace twinlink::models {

void ForestConfig::validate() const {
    if (n_trees < 1) throw std::invalid_argument("forest: n_trees must be >= 1");
    if (max_depth < 1) throw std::invalid_argument("forest: max_depth must be >= 1");
    if (min_leaf < 1) throw std::invalid_argument("forest: min_leaf must be >= 1");
    if (feature_subsample < 0 || feature_subsample > features::kFeatureCount)
        throw std::invalid_argument("forest: feature_subsample out of range");
}

double gini_impurity(std::size_t n0, std::size_t n1) {
    const double n = static_cast<double>(n0 + n1);
    if (n == 0.0) return 0.0;
    const double p0 = static_cast<double>(n0) / n;
    const double p1 = static_cast<double>(n1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

namespace {

constexpr int kD = features::kFeatureCount;

struct TreeBuilder {
    const std::vector<LabeledFeature>& data;
    const ForestConfig& cfg;
    int mtry;
    Rng& rng;
    std::vector<RandomForest::Node> nodes;

    int build(std::vector<std::size_t>& idx, int depth) {
        std::size_t n1 = 0;
        for (const auto i : idx) n1 += static_cast<std::size_t>(data[i].y);
        const std::size_t n0 = idx.size() - n1;

        const bool pure = n0 == 0 || n1 == 0;
        if (pure || depth >= cfg.max_depth ||
            idx.size() < 2 * static_cast<std::size_t>(cfg.min_leaf)) {
            return make_leaf(n0, n1);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = std::numeric_limits<double>::infinity();

        // Per-split feature subsample without replacement.
        std::array<int, kD> feats;
        for (int k = 0; k < kD; ++k) feats[static_cast<std::size_t>(k)] = k;
        for (int k = 0; k < mtry; ++k) {
            const auto j =
                k + static_cast<int>(rng.below(static_cast<std::uint64_t>(kD - k)));
            std::swap(feats[static_cast<std::size_t>(k)], feats[static_cast<std::size_t>(j)]);
        }

        std::vector<std::size_t> sorted = idx;
        for (int k = 0; k < mtry; ++k) {
            const int f = feats[static_cast<std::size_t>(k)];
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                const double va = data[a].x[static_cast<std::size_t>(f)];
                const double vb = data[b].x[static_cast<std::size_t>(f)];
                return va != vb ? va < vb : a < b;
            });
            std::size_t left1 = 0;
            for (std::size_t pos = 1; pos < sorted.size(); ++pos) {
                left1 += static_cast<std::size_t>(data[sorted[pos - 1]].y);
                const double prev = data[sorted[pos - 1]].x[static_cast<std::size_t>(f)];
                const double curr = data[sorted[pos]].x[static_cast<std::size_t>(f)];
                if (prev == curr) continue;
                if (pos < static_cast<std::size_t>(cfg.min_leaf) ||
                    sorted.size() - pos < static_cast<std::size_t>(cfg.min_leaf))
                    continue;
                const std::size_t left0 = pos - left1;
                const std::size_t right1 = n1 - left1;
                const std::size_t right0 = (sorted.size() - pos) - right1;
                const double w_impurity =
                    (static_cast<double>(pos) * gini_impurity(left0, left1) +
                     static_cast<double>(sorted.size() - pos) * gini_impurity(right0, right1)) /
                    static_cast<double>(sorted.size());
                if (w_impurity < best_impurity) {
                    best_impurity = w_impurity;
                    best_feature = f;
                    best_threshold = 0.5 * (prev + curr);
                }
            }
        }

        if (best_feature < 0) return make_leaf(n0, n1);

        std::vector<std::size_t> left, right;
        for (const auto i : idx) {
            if (data[i].x[static_cast<std::size_t>(best_feature)] <= best_threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        if (left.empty() || right.empty()) return make_leaf(n0, n1);

        const int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
        nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        nodes[static_cast<std::size_t>(node_id)].left = l;
        nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }

    int make_leaf(std::size_t n0, std::size_t n1) {
        RandomForest::Node leaf;
        leaf.feature = -1;
        leaf.leaf_label = n1 >= n0 ? 1 : 0;  // NLoS on ties
        const std::size_t n = n0 + n1;
        leaf.leaf_fraction = n > 0 ? static_cast<double>(std::max(n0, n1)) /
                                         static_cast<double>(n)
                                   : 1.0;
        nodes.push_back(leaf);
        return static_cast<int>(nodes.size()) - 1;
    }
};

int tree_predict(const std::vector<RandomForest::Node>& nodes,
                 const std::array<double, kD>& x) {
    int cur = 0;
    while (nodes[static_cast<std::size_t>(cur)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(cur)];
        cur = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(cur)].leaf_label;
}

}  // namespace

RandomForest RandomForest::fit(const std::vector<LabeledFeature>& data,
                               const ForestConfig& cfg) {
    cfg.validate();
    if (data.size() < 2) throw std::invalid_argument("forest: need at least 2 samples");

    int mtry = cfg.feature_subsample;
    if (mtry == 0) mtry = std::max(1, static_cast<int>(std::lround(std::sqrt(double(kD)))));

    RandomForest forest;
    for (int t = 0; t < cfg.n_trees; ++t) {
        Rng rng(mix_seed(cfg.rng_seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> idx(data.size());
        for (auto& i : idx) i = rng.below(data.size());
        TreeBuilder builder{data, cfg, mtry, rng, {}};
        builder.nodes.reserve(64);
        builder.build(idx, 0);
        forest.trees_.push_back(std::move(builder.nodes));
    }
    return forest;
}

std::vector<int> RandomForest::tree_votes(const std::array<double, kD>& x) const {
    std::vector<int> votes;
    votes.reserve(trees_.size());
    for (const auto& tree : trees_) votes.push_back(tree_predict(tree, x));
    return votes;
}

RandomForest::VoteResult RandomForest::predict(const std::array<double, kD>& x) const {
    std::size_t ones = 0;
    for (const auto& tree : trees_) ones += static_cast<std::size_t>(tree_predict(tree, x));
    const std::size_t zeros = trees_.size() - ones;
    VoteResult r;
    r.label = ones >= zeros ? 1 : 0;  // tie breaks toward NLoS
    r.vote_fraction = static_cast<double>(r.label == 1 ? ones : zeros) /
                      static_cast<double>(trees_.size());
    return r;
}

}  // namespace twinlink::models
