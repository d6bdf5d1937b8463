// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_FEATURES_HPP
#define TWINLINK_FEATURES_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "twinlink/rng.hpp"
#include "twinlink/scene.hpp"

namespace twinlink::features {

inline constexpr int kFeatureCount = 6;

// psi = [P_RSS, P_max, tau_rms, rise_time, theta_spread, phi_spread].
struct FeatureVector {
    double p_rss = 0.0;         // sum |alpha_p|^2
    double p_max = 0.0;         // max |alpha_p|^2
    double tau_rms = 0.0;       // s
    double rise_time = 0.0;     // max tau - min tau, s
    double theta_spread = 0.0;  // rad
    double phi_spread = 0.0;    // rad

    std::array<double, kFeatureCount> as_array() const {
        return {p_rss, p_max, tau_rms, rise_time, theta_spread, phi_spread};
    }
};

// The angle features are power-weighted means as printed; `Rms` is the
// conventional weighted RMS spread, kept behind a switch.
enum class AngleSpreadMode { Printed, Rms };

struct ExtractOptions {
    AngleSpreadMode angle_mode = AngleSpreadMode::Printed;
};

// Throws std::invalid_argument on an empty path list or all-zero gains.
FeatureVector extract_features(const std::vector<scene::PathRecord>& paths,
                               const ExtractOptions& opts = {});

// Gaussian perturbation of per-path (tau, azimuth, elevation, |gain| in dB),
// emulating estimation error at test time.
struct PerturbConfig {
    bool enabled = true;
    double sigma_tau = 1e-9;                     // s
    double sigma_angle = 1.0 * 3.14159265358979323846 / 180.0;  // rad
    double sigma_gain_db = 0.5;
    std::uint64_t rng_seed = 1;
};

std::vector<scene::PathRecord> perturb_paths(const std::vector<scene::PathRecord>& paths,
                                             const PerturbConfig& cfg, std::uint64_t sample_tag);

// Per-feature affine map to zero mean / unit variance, fit on a train split.
struct Standardizer {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> inv_std{};

    static Standardizer fit(const std::vector<FeatureVector>& train);
    std::array<double, kFeatureCount> apply(const FeatureVector& f) const;
};

// CSV with header id,t,y,p_rss,p_max,tau_rms,rise_time,theta_spread,phi_spread.
void write_feature_csv(const std::string& path, const std::vector<scene::Sample>& samples,
                       const std::vector<FeatureVector>& feats);

}  // namespace twinlink::features

#endif  // TWINLINK_FEATURES_HPP
