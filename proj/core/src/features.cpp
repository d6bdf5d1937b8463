// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace twinlink::features {

FeatureVector extract_features(const std::vector<scene::PathRecord>& paths,
                               const ExtractOptions& opts) {
    if (paths.empty()) throw std::invalid_argument("extract_features: empty path list");

    FeatureVector f;
    double tau_min = std::numeric_limits<double>::infinity();
    double tau_max = -std::numeric_limits<double>::infinity();
    for (const auto& p : paths) {
        const double pw = std::norm(p.gain);
        f.p_rss += pw;
        f.p_max = std::max(f.p_max, pw);
        tau_min = std::min(tau_min, p.delay);
        tau_max = std::max(tau_max, p.delay);
    }
    if (f.p_rss <= 0.0) throw std::invalid_argument("extract_features: all-zero path gains");
    f.rise_time = tau_max - tau_min;

    double tau_mean = 0.0, theta_mean = 0.0, phi_mean = 0.0;
    for (const auto& p : paths) {
        const double eta = std::norm(p.gain) / f.p_rss;
        tau_mean += eta * p.delay;
        theta_mean += eta * p.azimuth;
        phi_mean += eta * p.elevation;
    }
    double tau_var = 0.0, theta_var = 0.0, phi_var = 0.0;
    for (const auto& p : paths) {
        const double eta = std::norm(p.gain) / f.p_rss;
        tau_var += eta * (p.delay - tau_mean) * (p.delay - tau_mean);
        theta_var += eta * (p.azimuth - theta_mean) * (p.azimuth - theta_mean);
        phi_var += eta * (p.elevation - phi_mean) * (p.elevation - phi_mean);
    }
    f.tau_rms = std::sqrt(tau_var);
    if (opts.angle_mode == AngleSpreadMode::Printed) {
        f.theta_spread = theta_mean;
        f.phi_spread = phi_mean;
    } else {
        f.theta_spread = std::sqrt(theta_var);
        f.phi_spread = std::sqrt(phi_var);
    }
    return f;
}

std::vector<scene::PathRecord> perturb_paths(const std::vector<scene::PathRecord>& paths,
                                             const PerturbConfig& cfg, std::uint64_t sample_tag) {
    if (!cfg.enabled) return paths;
    Rng rng(mix_seed(cfg.rng_seed, sample_tag));
    std::vector<scene::PathRecord> out = paths;
    for (auto& p : out) {
        p.delay = std::max(0.0, p.delay + rng.normal(0.0, cfg.sigma_tau));
        p.azimuth += rng.normal(0.0, cfg.sigma_angle);
        p.elevation = std::clamp(p.elevation + rng.normal(0.0, cfg.sigma_angle),
                                 -1.5707963267948966, 1.5707963267948966);
        const double db = rng.normal(0.0, cfg.sigma_gain_db);
        p.gain *= std::pow(10.0, db / 20.0);
    }
    return out;
}

Standardizer Standardizer::fit(const std::vector<FeatureVector>& train) {
    if (train.empty()) throw std::invalid_argument("standardizer: empty training set");
    Standardizer s;
    for (const auto& f : train) {
        const auto a = f.as_array();
        for (int k = 0; k < kFeatureCount; ++k) s.mean[k] += a[k];
    }
    for (int k = 0; k < kFeatureCount; ++k) s.mean[k] /= static_cast<double>(train.size());
    std::array<double, kFeatureCount> var{};
    for (const auto& f : train) {
        const auto a = f.as_array();
        for (int k = 0; k < kFeatureCount; ++k)
            var[k] += (a[k] - s.mean[k]) * (a[k] - s.mean[k]);
    }
    for (int k = 0; k < kFeatureCount; ++k) {
        var[k] /= static_cast<double>(train.size());
        s.inv_std[k] = var[k] > 0.0 ? 1.0 / std::sqrt(var[k]) : 1.0;
    }
    return s;
}

std::array<double, kFeatureCount> Standardizer::apply(const FeatureVector& f) const {
    const auto a = f.as_array();
    std::array<double, kFeatureCount> out{};
    for (int k = 0; k < kFeatureCount; ++k) out[k] = (a[k] - mean[k]) * inv_std[k];
    return out;
}

void write_feature_csv(const std::string& path, const std::vector<scene::Sample>& samples,
                       const std::vector<FeatureVector>& feats) {
    if (samples.size() != feats.size())
        throw std::invalid_argument("feature csv: samples/features size mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("feature csv: cannot open '" + path + "'");
    os << "id,t,y,p_rss,p_max,tau_rms,rise_time,theta_spread,phi_spread\n";
    os.precision(17);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const auto& f = feats[i];
        os << s.id << ',' << s.timestamp << ',' << s.label << ',' << f.p_rss << ',' << f.p_max
           << ',' << f.tau_rms << ',' << f.rise_time << ',' << f.theta_spread << ','
           << f.phi_spread << '\n';
    }
}

}  // namespace twinlink::features
