// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_TRANSFORM_HPP
#define TWINLINK_TRANSFORM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "twinlink/channel.hpp"

namespace twinlink::transform {

// Angle/delay DFT matrices. V_v and V_h carry the half-array index shift,
// F is the plain unitary N_c DFT.
struct DftSet {
    channel::CMatrix v_v;  // n_v x n_v
    channel::CMatrix v_h;  // n_h x n_h
    channel::CMatrix f;    // n_c x n_c

    // (V_v kron V_h), cached because adcpm applies it per realization.
    channel::CMatrix v_kron;
};

DftSet build_dft(int n_v, int n_h, int n_c);

struct AdcpmMatrix {
    Eigen::MatrixXd entries;  // nonnegative, (n_v*n_h) x n_c or pooled shape
    std::optional<std::pair<int, int>> pooled_by;
};

// P = E[G .* conj(G)] with G = (V_v kron V_h)^H H F* / sqrt(N_v N_h N_c);
// the expectation is a sample mean over the given realizations.
AdcpmMatrix adcpm(const std::vector<channel::Sfcrm>& h_realizations, const DftSet& dft);

// Non-overlapping (a x b) max pooling; pool factors must divide the shape.
AdcpmMatrix maxpool(const AdcpmMatrix& p, int a, int b);

// Classifier input normalization: log10(P + eps) shifted so the maximum is 0.
Eigen::MatrixXf normalize_log_power(const AdcpmMatrix& p, double eps = 1e-12);

// Convolutional-stack cost model, multiply-accumulate counts.
struct ConvCostModel {
    struct Layer {
        std::uint64_t n_in = 1;      // input channels n_{q-1}
        std::uint64_t n_out = 1;     // filters n_q
        std::uint64_t kernel_w = 1;  // d_q^W
        std::uint64_t kernel_h = 1;  // d_q^H
        std::uint64_t map_w = 1;     // m_q^W
        std::uint64_t map_h = 1;     // m_q^H
    };
    std::vector<Layer> layers;
};

std::uint64_t conv_cost(const ConvCostModel& model);

double speedup(std::uint64_t cost_old, std::uint64_t cost_new);

// Reducing both input map dimensions by (a, b) scales every layer's output
// map alike, so the cost ratio is exactly a*b.
std::uint64_t speedup_from_reduction(std::uint64_t a, std::uint64_t b);

}  // namespace twinlink::transform

#endif  // TWINLINK_TRANSFORM_HPP
