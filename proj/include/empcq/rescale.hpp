#pragma once

#include <span>

#include "empcq/partition.hpp"

namespace empcq {

// Diagonal change of state units x -> Dx with ||Dx||_inf <= 1 over the state
// box. Together with per-row hyperplane normalization this caps ||h||_1 and
// |k| at 1, making the residual bound uniform across facets.
struct ScalingTransform {
    Vec diag;  // positive entries of D

    std::size_t dim() const { return diag.size(); }
    Vec apply(std::span<const double> x) const;          // Dx
    Vec apply_inverse(std::span<const double> x) const;  // D^-1 x
};

// D entry 1 / max(|lo_l|, |hi_l|) per coordinate.
ScalingTransform compute_scaling(const StateBox& box);

// Rewrites the partition in the rescaled units: every row (h, k) becomes
// (h D^-1 / c, k / c) with c = max(||h D^-1||_1, |k|), every law (F, G)
// becomes (F D^-1, G), and the box maps to its image under D. Region
// membership and law values are preserved: H x <= K iff H' (Dx) <= K'.
PwaPartition rescale_partition(const PwaPartition& p, const ScalingTransform& s);

// Residual bound valid for any rescaled row and any in-box rescaled state:
// eps * (n + 2 + n*eps). Follows from ||h||_1 <= 1, |k| <= 1, ||x||_inf <= 1.
double rescaled_delta_bound(double eps, std::size_t n);

// Control-error bound in rescaled units for a jump across `hp` (a rescaled
// row): F_upper, F_lower are the ORIGINAL gains, x the rescaled state, eps
// the region/state grid step and eps1 the law grid step after rescaling:
//
//   delta/||h||_2^2 * ||(F_upper-F_lower) D^-1 h'||_inf
//     + eps * ||F_upper D^-1||_inf + n*eps1*||x||_inf + n*eps*eps1 + eps1
double rescaled_control_bound(const Matrix& F_upper, const Matrix& F_lower, const Hyperplane& hp,
                              const ScalingTransform& s, std::span<const double> x, double eps,
                              double eps1);

}  // namespace empcq
