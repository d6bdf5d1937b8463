// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_FOREST_HPP
#define TWINLINK_FOREST_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "twinlink/features.hpp"

namespace twinlink::models {

struct ForestConfig {
    int n_trees = 50;
    int max_depth = 10;
    int min_leaf = 2;
    int feature_subsample = 0;  // features tried per split; 0 means round(sqrt(d))
    std::uint64_t rng_seed = 1;

    void validate() const;
};

// Gini impurity of a node with n0/n1 class counts.
double gini_impurity(std::size_t n0, std::size_t n1);

struct LabeledFeature {
    std::array<double, features::kFeatureCount> x{};
    int y = 0;
};

// CART trees on bootstrap resamples; splits maximize Gini decrease over a
// per-split feature subsample, leaves predict the majority class.
class RandomForest {
  public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int leaf_label = 0;
        double leaf_fraction = 0.0;  // majority share at the leaf
    };

    struct VoteResult {
        int label = 0;
        double vote_fraction = 0.0;  // share of trees voting the returned label
    };

    static RandomForest fit(const std::vector<LabeledFeature>& data, const ForestConfig& cfg);

    VoteResult predict(const std::array<double, features::kFeatureCount>& x) const;
    // Per-tree votes, for vote-recount checks.
    std::vector<int> tree_votes(const std::array<double, features::kFeatureCount>& x) const;

    std::size_t tree_count() const { return trees_.size(); }

  private:
    std::vector<std::vector<Node>> trees_;
};

}  // namespace twinlink::models

#endif  // TWINLINK_FOREST_HPP
