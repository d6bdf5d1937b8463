// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/svm.hpp"

#include <cmath>
#include <stdexcept>

#include "twinlink/rng.hpp"

namespace twinlink::models {

void SvmConfig::validate() const {
    if (!(c > 0.0)) throw std::invalid_argument("svm: c must be > 0");
    if (rbf_gamma < 0.0) throw std::invalid_argument("svm: rbf_gamma must be >= 0");
    if (!(tolerance > 0.0)) throw std::invalid_argument("svm: tolerance must be > 0");
    if (max_passes < 1) throw std::invalid_argument("svm: max_passes must be >= 1");
}

double rbf_kernel(const std::array<double, features::kFeatureCount>& u,
                  const std::array<double, features::kFeatureCount>& v, double gamma) {
    double d2 = 0.0;
    for (int k = 0; k < features::kFeatureCount; ++k) {
        const double d = u[static_cast<std::size_t>(k)] - v[static_cast<std::size_t>(k)];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

// Simplified SMO: sweep all multipliers, pair each KKT violator with a random
// partner and solve the two-variable subproblem analytically.
struct SmoSolver {
    SvmModel& m;
    const SvmConfig& cfg;
    Rng rng;

    double f(std::size_t i) const {
        double s = m.b_;
        for (std::size_t j = 0; j < m.alpha_.size(); ++j)
            if (m.alpha_[j] != 0.0)
                s += m.alpha_[j] * m.y_[j] * rbf_kernel(m.x_[j], m.x_[i], m.gamma_);
        return s;
    }

    bool step(std::size_t i, std::size_t j) {
        if (i == j) return false;
        const double yi = m.y_[i], yj = m.y_[j];
        const double ai_old = m.alpha_[i], aj_old = m.alpha_[j];
        const double ei = f(i) - yi;
        const double ej = f(j) - yj;

        double lo, hi;
        if (yi != yj) {
            lo = std::max(0.0, aj_old - ai_old);
            hi = std::min(cfg.c, cfg.c + aj_old - ai_old);
        } else {
            lo = std::max(0.0, ai_old + aj_old - cfg.c);
            hi = std::min(cfg.c, ai_old + aj_old);
        }
        if (lo >= hi) return false;

        const double kii = rbf_kernel(m.x_[i], m.x_[i], m.gamma_);
        const double kjj = rbf_kernel(m.x_[j], m.x_[j], m.gamma_);
        const double kij = rbf_kernel(m.x_[i], m.x_[j], m.gamma_);
        const double eta = 2.0 * kij - kii - kjj;
        if (eta >= 0.0) return false;

        double aj = aj_old - yj * (ei - ej) / eta;
        aj = std::min(hi, std::max(lo, aj));
        if (std::abs(aj - aj_old) < 1e-5) return false;
        const double ai = ai_old + yi * yj * (aj_old - aj);

        const double b1 = m.b_ - ei - yi * (ai - ai_old) * kii - yj * (aj - aj_old) * kij;
        const double b2 = m.b_ - ej - yi * (ai - ai_old) * kij - yj * (aj - aj_old) * kjj;
        if (ai > 0.0 && ai < cfg.c)
            m.b_ = b1;
        else if (aj > 0.0 && aj < cfg.c)
            m.b_ = b2;
        else
            m.b_ = 0.5 * (b1 + b2);

        m.alpha_[i] = ai;
        m.alpha_[j] = aj;
        return true;
    }

    void run() {
        const std::size_t n = m.alpha_.size();
        int sweeps = 0;
        while (sweeps < cfg.max_passes) {
            ++sweeps;
            std::size_t changed = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double ri = (f(i) - m.y_[i]) * m.y_[i];
                const bool violates = (ri < -cfg.tolerance && m.alpha_[i] < cfg.c) ||
                                      (ri > cfg.tolerance && m.alpha_[i] > 0.0);
                if (!violates) continue;
                std::size_t j = rng.below(n - 1);
                if (j >= i) ++j;
                if (step(i, j)) ++changed;
            }
            if (changed == 0) {
                m.converged_ = true;
                return;
            }
        }
        m.converged_ = false;  // budget exhausted, best iterate kept
    }
};

SvmModel SvmModel::fit(const std::vector<LabeledFeature>& data, const SvmConfig& cfg) {
    cfg.validate();
    bool has0 = false, has1 = false;
    for (const auto& d : data) (d.y == 1 ? has1 : has0) = true;
    if (!has0 || !has1) throw std::invalid_argument("svm: both classes must be present");

    SvmModel m;
    m.gamma_ = cfg.rbf_gamma > 0.0 ? cfg.rbf_gamma : 1.0 / features::kFeatureCount;
    m.x_.reserve(data.size());
    m.y_.reserve(data.size());
    for (const auto& d : data) {
        m.x_.push_back(d.x);
        m.y_.push_back(d.y == 1 ? 1.0 : -1.0);
    }
    m.alpha_.assign(data.size(), 0.0);
    m.b_ = 0.0;

    SmoSolver solver{m, cfg, Rng(mix_seed(cfg.rng_seed, 0x534d4f))};
    solver.run();
    return m;
}

double SvmModel::decision_value(const std::array<double, features::kFeatureCount>& x) const {
    double s = b_;
    for (std::size_t j = 0; j < alpha_.size(); ++j)
        if (alpha_[j] != 0.0) s += alpha_[j] * y_[j] * rbf_kernel(x_[j], x, gamma_);
    return s;
}

int SvmModel::predict(const std::array<double, features::kFeatureCount>& x) const {
    return decision_value(x) >= 0.0 ? 1 : 0;
}

double SvmModel::dual_objective() const {
    double sum_alpha = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
        if (alpha_[i] == 0.0) continue;
        sum_alpha += alpha_[i];
        for (std::size_t j = 0; j < alpha_.size(); ++j) {
            if (alpha_[j] == 0.0) continue;
            quad += alpha_[i] * alpha_[j] * y_[i] * y_[j] * rbf_kernel(x_[i], x_[j], gamma_);
        }
    }
    return sum_alpha - 0.5 * quad;
}

}  // namespace twinlink::models
