// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "twinlink/rng.hpp"

namespace twinlink::channel {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void ArrayConfig::validate() const {
    if (n_v < 1 || n_h < 1) throw std::invalid_argument("array: n_v, n_h must be >= 1");
    if (spacing_v <= 0.0 || spacing_h <= 0.0)
        throw std::invalid_argument("array: spacings must be > 0");
}

void OfdmConfig::validate() const {
    if (n_c < 1) throw std::invalid_argument("ofdm: n_c must be >= 1");
    if (bandwidth <= 0.0) throw std::invalid_argument("ofdm: bandwidth must be > 0");
    if (symbol_power <= 0.0) throw std::invalid_argument("ofdm: symbol_power must be > 0");
}

CVector steering_vector(const ArrayConfig& array, double azimuth, double elevation) {
    const double sv = std::sin(elevation);
    const double sh = std::cos(elevation) * std::sin(azimuth);
    CVector e(array.size());
    for (int m = 0; m < array.n_v; ++m) {
        const Cplx ev = std::polar(1.0, -kTwoPi * array.spacing_v * m * sv);
        for (int n = 0; n < array.n_h; ++n) {
            const Cplx eh = std::polar(1.0, -kTwoPi * array.spacing_h * n * sh);
            e(m * array.n_h + n) = ev * eh;
        }
    }
    return e;
}

CVector cfr(const std::vector<scene::PathRecord>& paths, int l, const ArrayConfig& array,
            const OfdmConfig& ofdm) {
    if (l < 0 || l >= ofdm.n_c) throw std::invalid_argument("cfr: subcarrier index out of range");
    CVector h = CVector::Zero(array.size());
    const double f_l = ofdm.subcarrier_hz(l);
    for (const auto& p : paths) {
        const Cplx delay_phase = std::polar(1.0, -kTwoPi * p.delay * f_l);
        h += p.gain * delay_phase * steering_vector(array, p.azimuth, p.elevation);
    }
    return h;
}

Sfcrm sfcrm(const std::vector<scene::PathRecord>& paths, const ArrayConfig& array,
            const OfdmConfig& ofdm) {
    array.validate();
    ofdm.validate();
    Sfcrm out;
    out.entries = CMatrix::Zero(array.size(), ofdm.n_c);
    // One steering vector per path, delay phase applied per subcarrier.
    std::vector<CVector> steer;
    steer.reserve(paths.size());
    for (const auto& p : paths) steer.push_back(steering_vector(array, p.azimuth, p.elevation));
    for (int l = 0; l < ofdm.n_c; ++l) {
        const double f_l = ofdm.subcarrier_hz(l);
        for (std::size_t p = 0; p < paths.size(); ++p) {
            const Cplx coeff = paths[p].gain * std::polar(1.0, -kTwoPi * paths[p].delay * f_l);
            out.entries.col(l) += coeff * steer[p];
        }
    }
    return out;
}

Sfcrm add_awgn(const Sfcrm& h, const NoiseModel& noise, [[maybe_unused]] const OfdmConfig& ofdm) {
    if (std::isinf(noise.snr_db) && noise.snr_db > 0.0) return h;
    if (!std::isfinite(noise.snr_db))
        throw std::invalid_argument("add_awgn: snr_db must be finite or +inf");

    const double mean_power = h.entries.squaredNorm() / static_cast<double>(h.entries.size());
    if (mean_power <= 0.0)
        throw std::invalid_argument("add_awgn: zero-energy channel, SNR undefined");
    const double snr_lin = std::pow(10.0, noise.snr_db / 10.0);
    // sigma_z^2 = sigma_s^2 * mean|H|^2 / SNR and the estimate adds Z / sigma_s,
    // so the per-entry variance is mean|H|^2 / SNR regardless of symbol power.
    const double var = mean_power / snr_lin;
    const double sigma_component = std::sqrt(var / 2.0);

    Rng rng(noise.rng_seed);
    Sfcrm out;
    out.entries = h.entries;
    for (Eigen::Index c = 0; c < out.entries.cols(); ++c)
        for (Eigen::Index r = 0; r < out.entries.rows(); ++r)
            out.entries(r, c) += Cplx(rng.normal(0.0, sigma_component),
                                      rng.normal(0.0, sigma_component));
    return out;
}

void write_sfcrm_file(const std::string& path, const Sfcrm& h, const ArrayConfig& array,
                      const OfdmConfig& ofdm) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("sfcrm: cannot open '" + path + "' for writing");
    const std::uint16_t nv = static_cast<std::uint16_t>(array.n_v);
    const std::uint16_t nh = static_cast<std::uint16_t>(array.n_h);
    const std::uint32_t nc = static_cast<std::uint32_t>(ofdm.n_c);
    os.write(reinterpret_cast<const char*>(&nv), sizeof nv);
    os.write(reinterpret_cast<const char*>(&nh), sizeof nh);
    os.write(reinterpret_cast<const char*>(&nc), sizeof nc);
    for (Eigen::Index r = 0; r < h.entries.rows(); ++r) {
        for (Eigen::Index c = 0; c < h.entries.cols(); ++c) {
            const float re = static_cast<float>(h.entries(r, c).real());
            const float im = static_cast<float>(h.entries(r, c).imag());
            os.write(reinterpret_cast<const char*>(&re), sizeof re);
            os.write(reinterpret_cast<const char*>(&im), sizeof im);
        }
    }
}

Sfcrm read_sfcrm_file(const std::string& path, ArrayConfig& array_out, int& n_c_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("sfcrm: cannot open '" + path + "'");
    std::uint16_t nv = 0, nh = 0;
    std::uint32_t nc = 0;
    is.read(reinterpret_cast<char*>(&nv), sizeof nv);
    is.read(reinterpret_cast<char*>(&nh), sizeof nh);
    is.read(reinterpret_cast<char*>(&nc), sizeof nc);
    if (!is) throw std::runtime_error("sfcrm: truncated header in '" + path + "'");
    array_out.n_v = nv;
    array_out.n_h = nh;
    n_c_out = static_cast<int>(nc);
    Sfcrm h;
    h.entries.resize(static_cast<Eigen::Index>(nv) * nh, nc);
    for (Eigen::Index r = 0; r < h.entries.rows(); ++r) {
        for (Eigen::Index c = 0; c < h.entries.cols(); ++c) {
            float re = 0.0f, im = 0.0f;
            is.read(reinterpret_cast<char*>(&re), sizeof re);
            is.read(reinterpret_cast<char*>(&im), sizeof im);
            h.entries(r, c) = Cplx(re, im);
        }
    }
    if (!is) throw std::runtime_error("sfcrm: truncated payload in '" + path + "'");
    return h;
}

}  // namespace twinlink::channel
