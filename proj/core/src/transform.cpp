// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/transform.hpp"

#include <cmath>
#include <stdexcept>

namespace twinlink::transform {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Shifted DFT block used for both array dimensions:
// [V]_{a,b} = exp(-j 2 pi a (b - N/2) / N) / sqrt(N).
channel::CMatrix shifted_dft(int n) {
    channel::CMatrix v(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            v(a, b) = scale * std::polar(1.0, -kTwoPi * a * (b - n / 2.0) / n);
    return v;
}

}  // namespace

DftSet build_dft(int n_v, int n_h, int n_c) {
    if (n_v < 1 || n_h < 1 || n_c < 1)
        throw std::invalid_argument("build_dft: dimensions must be >= 1");
    DftSet d;
    d.v_v = shifted_dft(n_v);
    d.v_h = shifted_dft(n_h);
    d.f.resize(n_c, n_c);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_c));
    for (int f = 0; f < n_c; ++f)
        for (int g = 0; g < n_c; ++g)
            d.f(f, g) = scale * std::polar(1.0, -kTwoPi * static_cast<double>(f) * g / n_c);

    d.v_kron.resize(static_cast<Eigen::Index>(n_v) * n_h, static_cast<Eigen::Index>(n_v) * n_h);
    for (int m = 0; m < n_v; ++m)
        for (int n = 0; n < n_h; ++n)
            for (int a = 0; a < n_v; ++a)
                for (int c = 0; c < n_h; ++c)
                    d.v_kron(m * n_h + n, a * n_h + c) = d.v_v(m, a) * d.v_h(n, c);
    return d;
}

AdcpmMatrix adcpm(const std::vector<channel::Sfcrm>& h_realizations, const DftSet& dft) {
    if (h_realizations.empty()) throw std::invalid_argument("adcpm: no channel realizations");
    const Eigen::Index rows = dft.v_kron.rows();
    const Eigen::Index cols = dft.f.rows();
    const double scale =
        1.0 / std::sqrt(static_cast<double>(rows) * static_cast<double>(cols));

    AdcpmMatrix out;
    out.entries = Eigen::MatrixXd::Zero(rows, cols);
    for (const auto& h : h_realizations) {
        if (h.entries.rows() != rows || h.entries.cols() != cols)
            throw std::invalid_argument("adcpm: channel shape does not match DFT set");
        const channel::CMatrix g =
            scale * (dft.v_kron.adjoint() * h.entries * dft.f.conjugate());
        out.entries += g.cwiseAbs2();
    }
    out.entries /= static_cast<double>(h_realizations.size());
    return out;
}

AdcpmMatrix maxpool(const AdcpmMatrix& p, int a, int b) {
    if (a < 1 || b < 1) throw std::invalid_argument("maxpool: pool factors must be >= 1");
    const Eigen::Index rows = p.entries.rows();
    const Eigen::Index cols = p.entries.cols();
    if (rows % a != 0 || cols % b != 0)
        throw std::invalid_argument("maxpool: pool factors must divide the matrix shape");

    AdcpmMatrix out;
    out.entries.resize(rows / a, cols / b);
    for (Eigen::Index r = 0; r < rows / a; ++r)
        for (Eigen::Index c = 0; c < cols / b; ++c)
            out.entries(r, c) = p.entries.block(r * a, c * b, a, b).maxCoeff();

    const int prev_a = p.pooled_by ? p.pooled_by->first : 1;
    const int prev_b = p.pooled_by ? p.pooled_by->second : 1;
    out.pooled_by = {prev_a * a, prev_b * b};
    return out;
}

Eigen::MatrixXf normalize_log_power(const AdcpmMatrix& p, double eps) {
    Eigen::MatrixXd lg =
        (p.entries.array() + eps).log10();
    lg.array() -= lg.maxCoeff();
    return lg.cast<float>();
}

std::uint64_t conv_cost(const ConvCostModel& model) {
    if (model.layers.empty()) throw std::invalid_argument("conv_cost: empty layer list");
    std::uint64_t total = 0;
    for (const auto& l : model.layers)
        total += l.n_in * l.kernel_w * l.kernel_h * l.n_out * l.map_w * l.map_h;
    return total;
}

double speedup(std::uint64_t cost_old, std::uint64_t cost_new) {
    if (cost_new == 0) throw std::invalid_argument("speedup: cost_new must be > 0");
    return static_cast<double>(cost_old) / static_cast<double>(cost_new);
}

std::uint64_t speedup_from_reduction(std::uint64_t a, std::uint64_t b) { return a * b; }

}  // namespace twinlink::transform
