// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_CHANNEL_HPP
#define TWINLINK_CHANNEL_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "twinlink/scene.hpp"

namespace twinlink::channel {

using Cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Uniform planar array at the BS, n_v rows by n_h columns.
struct ArrayConfig {
    int n_v = 8;
    int n_h = 16;
    double spacing_v = 0.8;  // wavelengths
    double spacing_h = 0.5;  // wavelengths

    int size() const { return n_v * n_h; }
    void validate() const;
};

struct OfdmConfig {
    double f_c = 28e9;        // Hz
    double bandwidth = 400e6;  // Hz
    int n_c = 512;
    double symbol_power = 1.0;  // sigma_s^2

    // Baseband subcarrier frequency f_l = l * B / N_c.
    double subcarrier_hz(int l) const { return static_cast<double>(l) * bandwidth / n_c; }
    void validate() const;
};

// Space-frequency channel response matrix H, (n_v*n_h) x n_c.
struct Sfcrm {
    CMatrix entries;
};

struct NoiseModel {
    double snr_db = 15.0;  // +inf for noiseless
    std::uint64_t rng_seed = 1;
};

// UPA response e(azimuth, elevation) = e_v kron e_h, unit-modulus entries,
// index order m * n_h + n.
CVector steering_vector(const ArrayConfig& array, double azimuth, double elevation);

// CFR at subcarrier l: sum_p gain_p * exp(-j 2 pi tau_p f_l) * e(theta_p, phi_p).
CVector cfr(const std::vector<scene::PathRecord>& paths, int l, const ArrayConfig& array,
            const OfdmConfig& ofdm);

Sfcrm sfcrm(const std::vector<scene::PathRecord>& paths, const ArrayConfig& array,
            const OfdmConfig& ofdm);

// Receiver-side channel estimate H + Z/sigma_s with per-entry noise variance
// chosen so that sigma_s^2 * mean|H|^2 / sigma_z^2 matches the requested SNR.
// Throws on zero-energy H with finite SNR.
Sfcrm add_awgn(const Sfcrm& h, const NoiseModel& noise, const OfdmConfig& ofdm);

// Optional binary dump: u16 n_v, u16 n_h, u32 n_c header, then row-major
// complex64 (float32 re/im) entries, little endian.
void write_sfcrm_file(const std::string& path, const Sfcrm& h, const ArrayConfig& array,
                      const OfdmConfig& ofdm);
Sfcrm read_sfcrm_file(const std::string& path, ArrayConfig& array_out, int& n_c_out);

}  // namespace twinlink::channel

#endif  // TWINLINK_CHANNEL_HPP
