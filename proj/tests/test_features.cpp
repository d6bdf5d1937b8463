// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "twinlink/features.hpp"
#include "twinlink/rng.hpp"

using namespace twinlink;
using features::FeatureVector;

namespace {

scene::PathRecord path(double re, double im, double tau, double az, double el) {
    scene::PathRecord p;
    p.gain = {re, im};
    p.delay = tau;
    p.azimuth = az;
    p.elevation = el;
    p.kind = scene::PathKind::Reflected;
    return p;
}

std::vector<scene::PathRecord> random_paths(Rng& rng, int n) {
    std::vector<scene::PathRecord> out;
    for (int i = 0; i < n; ++i)
        out.push_back(path(rng.normal(), rng.normal(), rng.uniform(0.0, 500e-9),
                           rng.uniform(-3.0, 3.0), rng.uniform(-1.5, 1.5)));
    return out;
}

// Straightforward-loop oracle, written independently of the implementation.
FeatureVector oracle(const std::vector<scene::PathRecord>& paths) {
    FeatureVector f;
    double rss = 0.0;
    for (const auto& p : paths) rss += std::abs(p.gain) * std::abs(p.gain);
    f.p_rss = rss;
    f.p_max = 0.0;
    for (const auto& p : paths)
        f.p_max = std::max(f.p_max, std::abs(p.gain) * std::abs(p.gain));
    double tmin = paths[0].delay, tmax = paths[0].delay;
    for (const auto& p : paths) {
        tmin = std::min(tmin, p.delay);
        tmax = std::max(tmax, p.delay);
    }
    f.rise_time = tmax - tmin;
    double tbar = 0.0, thbar = 0.0, phbar = 0.0;
    for (const auto& p : paths) {
        const double eta = std::abs(p.gain) * std::abs(p.gain) / rss;
        tbar += eta * p.delay;
        thbar += eta * p.azimuth;
        phbar += eta * p.elevation;
    }
    double tvar = 0.0;
    for (const auto& p : paths) {
        const double eta = std::abs(p.gain) * std::abs(p.gain) / rss;
        tvar += eta * (p.delay - tbar) * (p.delay - tbar);
    }
    f.tau_rms = std::sqrt(tvar);
    f.theta_spread = thbar;
    f.phi_spread = phbar;
    return f;
}

void check_close(const FeatureVector& a, const FeatureVector& b, double rel) {
    const auto aa = a.as_array();
    const auto bb = b.as_array();
    for (int k = 0; k < features::kFeatureCount; ++k) {
        const double denom = std::max({std::abs(aa[k]), std::abs(bb[k]), 1e-30});
        CHECK(std::abs(aa[k] - bb[k]) / denom <= rel);
    }
}

}  // namespace

TEST_CASE("single path degeneracies") {
    const auto f = features::extract_features({path(1.0, 0.0, 5e-9, 0.3, -0.2)});
    CHECK(f.p_rss == doctest::Approx(1.0));
    CHECK(f.p_max == doctest::Approx(1.0));
    CHECK(f.tau_rms == 0.0);
    CHECK(f.rise_time == 0.0);
    CHECK(f.theta_spread == doctest::Approx(0.3));
    CHECK(f.phi_spread == doctest::Approx(-0.2));
}

TEST_CASE("two equal-power paths at 0 and 2 ns") {
    const auto f = features::extract_features(
        {path(1.0, 0.0, 0.0, 0.1, 0.0), path(0.0, 1.0, 2e-9, 0.3, 0.0)});
    CHECK(f.p_rss == doctest::Approx(2.0));
    CHECK(f.p_max == doctest::Approx(1.0));
    // mean delay 1 ns, rms spread 1 ns, rise time 2 ns
    CHECK(f.tau_rms == doctest::Approx(1e-9).epsilon(1e-12));
    CHECK(f.rise_time == doctest::Approx(2e-9).epsilon(1e-12));
    CHECK(f.theta_spread == doctest::Approx(0.2));
}

TEST_CASE("1000 random path sets match the straightforward-loop oracle") {
    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        const auto paths = random_paths(rng, 1 + static_cast<int>(rng.below(6)));
        check_close(features::extract_features(paths), oracle(paths), 1e-12);
    }
}

TEST_CASE("scale covariance: gains scaled by c scale powers by |c|^2 only") {
    Rng rng(37);
    const auto paths = random_paths(rng, 5);
    const auto f = features::extract_features(paths);
    auto scaled = paths;
    const std::complex<double> c{-2.5, 1.0};
    for (auto& p : scaled) p.gain *= c;
    const auto g = features::extract_features(scaled);
    const double c2 = std::norm(c);
    CHECK(g.p_rss == doctest::Approx(f.p_rss * c2).epsilon(1e-12));
    CHECK(g.p_max == doctest::Approx(f.p_max * c2).epsilon(1e-12));
    CHECK(g.tau_rms == doctest::Approx(f.tau_rms).epsilon(1e-12));
    CHECK(g.rise_time == f.rise_time);
    CHECK(g.theta_spread == doctest::Approx(f.theta_spread).epsilon(1e-12));
    CHECK(g.phi_spread == doctest::Approx(f.phi_spread).epsilon(1e-12));
}

TEST_CASE("permutation invariance and equal-delay degeneracy") {
    Rng rng(41);
    auto paths = random_paths(rng, 6);
    const auto f = features::extract_features(paths);
    std::reverse(paths.begin(), paths.end());
    std::swap(paths[1], paths[4]);
    check_close(features::extract_features(paths), f, 1e-12);

    auto equal_delay = random_paths(rng, 4);
    for (auto& p : equal_delay) p.delay = 77e-9;
    const auto g = features::extract_features(equal_delay);
    CHECK(g.tau_rms == 0.0);
    CHECK(g.rise_time == 0.0);
}

TEST_CASE("error paths: empty list and all-zero gains") {
    CHECK_THROWS_AS(features::extract_features({}), std::invalid_argument);
    CHECK_THROWS_AS(features::extract_features({path(0.0, 0.0, 1e-9, 0.0, 0.0)}),
                    std::invalid_argument);
}

TEST_CASE("rms angle mode reports spreads instead of means") {
    features::ExtractOptions rms;
    rms.angle_mode = features::AngleSpreadMode::Rms;
    const auto f =
        features::extract_features({path(1.0, 0.0, 1e-9, 0.5, 0.2)}, rms);
    CHECK(f.theta_spread == 0.0);
    CHECK(f.phi_spread == 0.0);

    const auto g = features::extract_features(
        {path(1.0, 0.0, 0.0, -0.5, 0.0), path(1.0, 0.0, 0.0, 0.5, 0.0)}, rms);
    CHECK(g.theta_spread == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("perturbation is seeded and off-switchable") {
    Rng rng(43);
    const auto paths = random_paths(rng, 4);
    features::PerturbConfig cfg;
    cfg.rng_seed = 7;
    const auto a = features::perturb_paths(paths, cfg, 123);
    const auto b = features::perturb_paths(paths, cfg, 123);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].delay == b[i].delay);
        CHECK(a[i].azimuth == b[i].azimuth);
        CHECK(a[i].gain == b[i].gain);
        CHECK(a[i].delay != paths[i].delay);
    }
    const auto c = features::perturb_paths(paths, cfg, 124);
    CHECK(c[0].delay != a[0].delay);

    cfg.enabled = false;
    const auto d = features::perturb_paths(paths, cfg, 123);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i].gain == paths[i].gain);
}

TEST_CASE("standardizer maps train features to zero mean unit variance") {
    Rng rng(47);
    std::vector<FeatureVector> feats;
    for (int i = 0; i < 200; ++i)
        feats.push_back(features::extract_features(random_paths(rng, 5)));
    const auto st = features::Standardizer::fit(feats);
    std::array<double, features::kFeatureCount> mean{}, var{};
    for (const auto& f : feats) {
        const auto z = st.apply(f);
        for (int k = 0; k < features::kFeatureCount; ++k) mean[k] += z[k];
    }
    for (auto& m : mean) m /= 200.0;
    for (const auto& f : feats) {
        const auto z = st.apply(f);
        for (int k = 0; k < features::kFeatureCount; ++k)
            var[k] += (z[k] - mean[k]) * (z[k] - mean[k]);
    }
    for (int k = 0; k < features::kFeatureCount; ++k) {
        CHECK(std::abs(mean[k]) <= 1e-9);
        CHECK(var[k] / 200.0 == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("feature csv carries the documented header") {
    scene::Sample s;
    s.id = "g000001";
    s.timestamp = 0.0;
    s.label = 0;
    s.paths = {path(1.0, 0.0, 1e-9, 0.1, 0.0)};
    const auto f = features::extract_features(s.paths);
    const std::string tmp = "/tmp/twinlink_features_test.csv";
    features::write_feature_csv(tmp, {s}, {f});
    std::ifstream is(tmp);
    std::string header;
    std::getline(is, header);
    CHECK(header == "id,t,y,p_rss,p_max,tau_rms,rise_time,theta_spread,phi_spread");
    std::string row;
    std::getline(is, row);
    CHECK(row.rfind("g000001,0,0,", 0) == 0);
    is.close();
    std::remove(tmp.c_str());
}
