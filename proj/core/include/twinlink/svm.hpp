// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_SVM_HPP
#define TWINLINK_SVM_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "twinlink/forest.hpp"

namespace twinlink::models {

struct SvmConfig {
    double c = 1.0;          // regularization, > 0
    double rbf_gamma = 0.0;  // kernel width; 0 means 1/d
    double tolerance = 1e-3;
    int max_passes = 1000;  // total sweep budget
    std::uint64_t rng_seed = 1;

    void validate() const;
};

// RBF-kernel SVM trained with sequential minimal optimization. Labels are
// stored internally as +-1; predict returns {0, 1}.
class SvmModel {
  public:
    static SvmModel fit(const std::vector<LabeledFeature>& data, const SvmConfig& cfg);

    int predict(const std::array<double, features::kFeatureCount>& x) const;
    double decision_value(const std::array<double, features::kFeatureCount>& x) const;

    bool converged() const { return converged_; }
    // Dual objective at the current iterate, exposed for solver checks.
    double dual_objective() const;
    const std::vector<double>& alphas() const { return alpha_; }

  private:
    friend struct SmoSolver;
    std::vector<std::array<double, features::kFeatureCount>> x_;
    std::vector<double> y_;  // +-1
    std::vector<double> alpha_;
    double b_ = 0.0;
    double gamma_ = 1.0;
    bool converged_ = false;
};

double rbf_kernel(const std::array<double, features::kFeatureCount>& u,
                  const std::array<double, features::kFeatureCount>& v, double gamma);

}  // namespace twinlink::models

#endif  // TWINLINK_SVM_HPP
