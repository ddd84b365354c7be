#include "empcq/quantize.hpp"

#include <cmath>
#include <string>

#include "empcq/errors.hpp"
#include "empcq/kernels.hpp"

namespace empcq {
namespace {

std::string fmt_desc(const FixedPointFormat& fmt) {
    return "a=" + std::to_string(fmt.total_bits()) + ", b=" + std::to_string(fmt.frac_bits());
}

void check_range(std::span<const double> v, const FixedPointFormat& fmt,
                 const std::string& what) {
    if (v.empty()) return;
    const auto [mn, mx] = kernels::min_max(v);
    if (mn >= fmt.min_value() && mx <= fmt.max_value()) return;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!fmt.contains(v[i]))
            throw OverflowError(what + ": entry " + std::to_string(i + 1) + " = " +
                                std::to_string(v[i]) + " outside range [" +
                                std::to_string(fmt.min_value()) + ", " +
                                std::to_string(fmt.max_value()) + "] of format " +
                                fmt_desc(fmt));
    }
    throw OverflowError(what + ": non-finite entry");  // NaN slips the scan above
}

}  // namespace

FixedPointFormat::FixedPointFormat(int total_bits, int frac_bits)
    : total_bits_(total_bits), frac_bits_(frac_bits) {
    if (total_bits < 2 || total_bits > 63)
        throw DomainError("fixed-point total bits must be in [2, 63]");
    if (frac_bits < 0 || frac_bits > total_bits - 1)
        throw DomainError("fixed-point fraction bits must be in [0, total_bits - 1]");
    step_ = std::ldexp(1.0, -frac_bits);
    scale_ = std::ldexp(1.0, frac_bits);
    const int int_bits = total_bits - 1 - frac_bits;
    max_ = std::ldexp(1.0, int_bits) - step_;
    min_ = -std::ldexp(1.0, int_bits);
}

double quantize_scalar(double z, const FixedPointFormat& fmt) {
    if (!fmt.contains(z))
        throw OverflowError("value " + std::to_string(z) + " outside range [" +
                            std::to_string(fmt.min_value()) + ", " +
                            std::to_string(fmt.max_value()) + "] of format " + fmt_desc(fmt));
    // z * 2^b is exact (power-of-two scaling, |z * 2^b| <= 2^62), nearbyint
    // rounds half-to-even under the default FP environment.
    return std::nearbyint(z * fmt.scale()) * fmt.step();
}

std::int64_t mantissa_of(double grid_value, const FixedPointFormat& fmt) {
    return std::llrint(grid_value * fmt.scale());
}

Vec quantize_vector(std::span<const double> v, const FixedPointFormat& fmt) {
    check_range(v, fmt, "vector");
    Vec out(v.size());
    kernels::snap_to_grid(out, v, fmt.scale(), fmt.step());
    return out;
}

Matrix quantize_matrix(const Matrix& m, const FixedPointFormat& fmt) {
    check_range(m.data(), fmt, "matrix");
    Matrix out(m.rows(), m.cols());
    kernels::snap_to_grid(out.data(), m.data(), fmt.scale(), fmt.step());
    return out;
}

QuantizedPartition quantize_partition(const PwaPartition& p, const FixedPointFormat& fmt_regions,
                                      const FixedPointFormat& fmt_laws,
                                      const FixedPointFormat& fmt_state) {
    QuantizedPartition qp{PwaPartition{}, fmt_regions, fmt_laws, fmt_state, {}, {}, {}, {}, true};

    std::vector<Region> regions;
    std::vector<AffineLaw> laws;
    regions.reserve(p.regions.size());
    laws.reserve(p.laws.size());

    for (std::size_t i = 0; i < p.regions.size(); ++i) {
        const std::string where = "region " + std::to_string(i + 1);
        Matrix H_hat, F_hat;
        Vec K_hat, G_hat;
        try {
            H_hat = quantize_matrix(p.regions[i].H, fmt_regions);
            K_hat = quantize_vector(p.regions[i].K, fmt_regions);
        } catch (const OverflowError& e) {
            throw OverflowError(where + ", constraint data: " + e.what());
        }
        try {
            F_hat = quantize_matrix(p.laws[i].F, fmt_laws);
            G_hat = quantize_vector(p.laws[i].G, fmt_laws);
        } catch (const OverflowError& e) {
            throw OverflowError(where + ", law data: " + e.what());
        }

        // Deltas are differences of nearby doubles (within half a grid
        // step), hence exact.
        Matrix dH(H_hat.rows(), H_hat.cols());
        for (std::size_t k = 0; k < dH.data().size(); ++k)
            dH.data()[k] = H_hat.data()[k] - p.regions[i].H.data()[k];
        Vec dK(K_hat.size());
        for (std::size_t k = 0; k < dK.size(); ++k) dK[k] = K_hat[k] - p.regions[i].K[k];
        Matrix dF(F_hat.rows(), F_hat.cols());
        for (std::size_t k = 0; k < dF.data().size(); ++k)
            dF.data()[k] = F_hat.data()[k] - p.laws[i].F.data()[k];
        Vec dG(G_hat.size());
        for (std::size_t k = 0; k < dG.size(); ++k) dG[k] = G_hat[k] - p.laws[i].G[k];

        qp.delta_H.push_back(std::move(dH));
        qp.delta_K.push_back(std::move(dK));
        qp.delta_F.push_back(std::move(dF));
        qp.delta_G.push_back(std::move(dG));

        regions.push_back(make_region(std::move(H_hat), std::move(K_hat)));
        laws.push_back(AffineLaw{std::move(F_hat), std::move(G_hat)});
    }

    qp.base = assemble_partition(p.state_dim, p.input_dim, std::move(regions), std::move(laws),
                                 p.box);
    // Quantized data compares exactly: products and sums of grid values are
    // exact in working precision at these magnitudes, so no slack is needed
    // (or wanted) in the on-line membership test.
    qp.base.locate_tol = 0.0;
    return qp;
}

QuantizedEval quantized_evaluate(const QuantizedPartition& qp, std::span<const double> x) {
    QuantizedEval ev;
    ev.state = quantize_vector(x, qp.fmt_state);
    ev.region = locate(qp.base, ev.state, 0.0);
    if (ev.region) ev.control = evaluate_law(qp.base, *ev.region, ev.state);
    return ev;
}

}  // namespace empcq
