// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>

#include "twinlink/channel.hpp"
#include "twinlink/rng.hpp"

using namespace twinlink;
using channel::Cplx;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

scene::PathRecord path(Cplx gain, double tau, double az, double el,
                       scene::PathKind kind = scene::PathKind::Reflected) {
    scene::PathRecord p;
    p.gain = gain;
    p.delay = tau;
    p.azimuth = az;
    p.elevation = el;
    p.kind = kind;
    return p;
}

std::vector<scene::PathRecord> random_paths(Rng& rng, int n) {
    std::vector<scene::PathRecord> out;
    for (int i = 0; i < n; ++i)
        out.push_back(path(std::polar(rng.uniform(0.1, 2.0), rng.uniform(-3.0, 3.0)),
                           rng.uniform(0.0, 400e-9), rng.uniform(-3.0, 3.0),
                           rng.uniform(-1.4, 1.4)));
    return out;
}

}  // namespace

TEST_CASE("broadside steering vector is all ones") {
    channel::ArrayConfig arr;
    arr.n_v = 4;
    arr.n_h = 8;
    const auto e = channel::steering_vector(arr, 0.0, 0.0);
    REQUIRE(e.size() == 32);
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        CHECK(e(i).real() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(e(i).imag()) < 1e-14);
    }
}

TEST_CASE("steering vector entries are unit modulus and match the Kronecker oracle") {
    channel::ArrayConfig arr;
    arr.n_v = 3;
    arr.n_h = 5;
    Rng rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        const double az = rng.uniform(-3.1, 3.1);
        const double el = rng.uniform(-1.5, 1.5);
        const auto e = channel::steering_vector(arr, az, el);
        for (Eigen::Index i = 0; i < e.size(); ++i)
            CHECK(std::abs(std::abs(e(i)) - 1.0) <= 1e-12);
        // Independent double loop.
        for (int m = 0; m < arr.n_v; ++m) {
            const Cplx ev = std::exp(Cplx(0.0, -kTwoPi * arr.spacing_v * m * std::sin(el)));
            for (int n = 0; n < arr.n_h; ++n) {
                const Cplx eh = std::exp(
                    Cplx(0.0, -kTwoPi * arr.spacing_h * n * std::cos(el) * std::sin(az)));
                CHECK(std::abs(e(m * arr.n_h + n) - ev * eh) <= 1e-12);
            }
        }
    }
}

TEST_CASE("cfr of a unit zero-delay broadside path is all ones at every subcarrier") {
    channel::ArrayConfig arr;
    arr.n_v = 2;
    arr.n_h = 4;
    channel::OfdmConfig ofdm;
    ofdm.n_c = 16;
    const std::vector<scene::PathRecord> paths = {path(Cplx(1.0, 0.0), 0.0, 0.0, 0.0)};
    for (int l : {0, 7, 15}) {
        const auto h = channel::cfr(paths, l, arr, ofdm);
        for (Eigen::Index i = 0; i < h.size(); ++i)
            CHECK(std::abs(h(i) - Cplx(1.0, 0.0)) <= 1e-12);
    }
}

TEST_CASE("two opposite paths cancel; empty path list gives the zero vector") {
    channel::ArrayConfig arr;
    channel::OfdmConfig ofdm;
    const auto paths = std::vector<scene::PathRecord>{
        path(Cplx(1.0, 0.0), 10e-9, 0.5, 0.1), path(Cplx(-1.0, 0.0), 10e-9, 0.5, 0.1)};
    const auto h = channel::cfr(paths, 3, arr, ofdm);
    CHECK(h.norm() <= 1e-12);
    const auto zero = channel::cfr({}, 0, arr, ofdm);
    CHECK(zero.norm() == 0.0);
}

TEST_CASE("cfr matches the term-by-term summation oracle") {
    channel::ArrayConfig arr;
    arr.n_v = 3;
    arr.n_h = 4;
    channel::OfdmConfig ofdm;
    ofdm.n_c = 64;
    Rng rng(7);
    const auto paths = random_paths(rng, 4);
    const int l = 7;
    const auto h = channel::cfr(paths, l, arr, ofdm);

    const double f_l = l * ofdm.bandwidth / ofdm.n_c;
    for (int m = 0; m < arr.n_v; ++m) {
        for (int n = 0; n < arr.n_h; ++n) {
            Cplx sum(0.0, 0.0);
            for (const auto& p : paths) {
                const Cplx delay = std::exp(Cplx(0.0, -kTwoPi * p.delay * f_l));
                const Cplx ev =
                    std::exp(Cplx(0.0, -kTwoPi * arr.spacing_v * m * std::sin(p.elevation)));
                const Cplx eh = std::exp(Cplx(
                    0.0,
                    -kTwoPi * arr.spacing_h * n * std::cos(p.elevation) * std::sin(p.azimuth)));
                sum += p.gain * delay * ev * eh;
            }
            const Cplx got = h(m * arr.n_h + n);
            CHECK(std::abs(got - sum) <= 1e-12 * std::max(1.0, std::abs(sum)));
        }
    }
}

TEST_CASE("sfcrm columns equal per-subcarrier cfr; zero delay removes selectivity") {
    channel::ArrayConfig arr;
    arr.n_v = 2;
    arr.n_h = 2;
    channel::OfdmConfig ofdm;
    ofdm.n_c = 1;
    Rng rng(11);
    const auto paths = random_paths(rng, 3);
    const auto h1 = channel::sfcrm(paths, arr, ofdm);
    REQUIRE(h1.entries.cols() == 1);
    const auto col = channel::cfr(paths, 0, arr, ofdm);
    CHECK((h1.entries.col(0) - col).norm() <= 1e-12);

    ofdm.n_c = 8;
    const std::vector<scene::PathRecord> zero_delay = {path(Cplx(0.3, 0.4), 0.0, 1.0, -0.3)};
    const auto h2 = channel::sfcrm(zero_delay, arr, ofdm);
    for (int l = 1; l < 8; ++l)
        CHECK((h2.entries.col(l) - h2.entries.col(0)).norm() <= 1e-12);

    // Unit-gain single path: squared Frobenius norm counts the entries.
    const std::vector<scene::PathRecord> unit = {path(Cplx(1.0, 0.0), 23e-9, 0.7, 0.2)};
    const auto h3 = channel::sfcrm(unit, arr, ofdm);
    CHECK(h3.entries.squaredNorm() ==
          doctest::Approx(static_cast<double>(arr.size() * ofdm.n_c)).epsilon(1e-12));
}

TEST_CASE("sfcrm is linear in the path set") {
    channel::ArrayConfig arr;
    arr.n_v = 2;
    arr.n_h = 4;
    channel::OfdmConfig ofdm;
    ofdm.n_c = 32;
    Rng rng(13);
    const auto a = random_paths(rng, 3);
    const auto b = random_paths(rng, 2);
    auto both = a;
    both.insert(both.end(), b.begin(), b.end());
    const auto ha = channel::sfcrm(a, arr, ofdm);
    const auto hb = channel::sfcrm(b, arr, ofdm);
    const auto hab = channel::sfcrm(both, arr, ofdm);
    const double rel =
        (hab.entries - ha.entries - hb.entries).norm() / hab.entries.norm();
    CHECK(rel <= 1e-12);
}

TEST_CASE("awgn: infinite SNR is the identity, equal seeds reproduce") {
    channel::ArrayConfig arr;
    arr.n_v = 2;
    arr.n_h = 2;
    channel::OfdmConfig ofdm;
    ofdm.n_c = 4;
    Rng rng(17);
    const auto h = channel::sfcrm(random_paths(rng, 2), arr, ofdm);

    channel::NoiseModel noiseless;
    noiseless.snr_db = std::numeric_limits<double>::infinity();
    const auto same = channel::add_awgn(h, noiseless, ofdm);
    CHECK((same.entries - h.entries).norm() == 0.0);

    channel::NoiseModel nm;
    nm.snr_db = 5.0;
    nm.rng_seed = 999;
    const auto n1 = channel::add_awgn(h, nm, ofdm);
    const auto n2 = channel::add_awgn(h, nm, ofdm);
    CHECK((n1.entries - n2.entries).norm() == 0.0);
    nm.rng_seed = 1000;
    const auto n3 = channel::add_awgn(h, nm, ofdm);
    CHECK((n3.entries - n1.entries).norm() > 0.0);
}

TEST_CASE("awgn at 0 dB on unit-mean-power channel has empirical variance near 1") {
    channel::ArrayConfig arr;
    arr.n_v = 4;
    arr.n_h = 8;
    channel::OfdmConfig ofdm;
    ofdm.n_c = 512;  // 16384 entries
    const std::vector<scene::PathRecord> unit = {path(Cplx(1.0, 0.0), 31e-9, 0.4, -0.2)};
    const auto h = channel::sfcrm(unit, arr, ofdm);
    REQUIRE(h.entries.squaredNorm() / h.entries.size() == doctest::Approx(1.0).epsilon(1e-9));

    channel::NoiseModel nm;
    nm.snr_db = 0.0;
    nm.rng_seed = 4242;
    const auto noisy = channel::add_awgn(h, nm, ofdm);
    const double var =
        (noisy.entries - h.entries).squaredNorm() / static_cast<double>(h.entries.size());
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("awgn on a zero-energy channel with finite SNR is rejected") {
    channel::Sfcrm h;
    h.entries = channel::CMatrix::Zero(4, 4);
    channel::NoiseModel nm;
    nm.snr_db = 10.0;
    channel::OfdmConfig ofdm;
    CHECK_THROWS_AS(channel::add_awgn(h, nm, ofdm), std::invalid_argument);
}

TEST_CASE("sfcrm binary dump round trip") {
    channel::ArrayConfig arr;
    arr.n_v = 2;
    arr.n_h = 3;
    channel::OfdmConfig ofdm;
    ofdm.n_c = 5;
    Rng rng(23);
    const auto h = channel::sfcrm(random_paths(rng, 3), arr, ofdm);
    const std::string tmp = "/tmp/twinlink_sfcrm_test.bin";
    channel::write_sfcrm_file(tmp, h, arr, ofdm);

    channel::ArrayConfig arr2;
    int n_c = 0;
    const auto back = channel::read_sfcrm_file(tmp, arr2, n_c);
    std::remove(tmp.c_str());
    CHECK(arr2.n_v == 2);
    CHECK(arr2.n_h == 3);
    CHECK(n_c == 5);
    REQUIRE(back.entries.rows() == h.entries.rows());
    REQUIRE(back.entries.cols() == h.entries.cols());
    // float32 payload
    CHECK((back.entries - h.entries).norm() <= 1e-6 * h.entries.norm());
}
