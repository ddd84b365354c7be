#pragma once

#include <optional>
#include <span>

#include "empcq/quantize.hpp"

namespace empcq {

// Matrix infinity norm: maximum absolute row sum.
double matrix_inf_norm(const Matrix& m);

// Bound on how far the facet residual y = h·x - k can move when h, k and x
// are each perturbed entrywise by at most eps:
//
//     delta = eps * (||h||_1 + ||x||_1 + n*eps + 1)
double delta_bound(const Hyperplane& hp, std::span<const double> x, double eps);
double delta_bound_from_norms(double h_norm1, double x_norm1, double eps, std::size_t n);

// True when x sits close enough to the facet (-delta < h·x - k <= 0) that a
// quantization-induced jump to the other side is possible at all.
bool jump_certificate(const Hyperplane& hp, std::span<const double> x, double delta);

// Law-kink contribution of a facet jump:
//
//     delta * ||(F_upper - F_lower) h'||_inf / ||h||_2^2
double first_term(const Matrix& F_upper, const Matrix& F_lower, const Hyperplane& hp,
                  double delta);

// Data-dependent (a posteriori) second term, from the realized deltas:
//
//     ||dF||_inf * ||x||_inf + ||dG||_inf + ||F_hat||_inf * eps_state
double second_term_aposteriori(const Matrix& dF, std::span<const double> dG, const Matrix& F_hat,
                               std::span<const double> x, double eps_state);
double second_term_aposteriori_from_norms(const Matrix& dF, std::span<const double> dG,
                                          const Matrix& F_hat, double x_norm_inf,
                                          double eps_state);

// Worst-case (a priori) second term, from the original data alone:
//
//     eps * (||F||_inf + n * ||x||_inf + n*eps + 1)
double second_term_apriori(const Matrix& F, std::span<const double> x, double eps);
double second_term_apriori_from_norms(const Matrix& F, double x_norm_inf, double eps,
                                      std::size_t n);

struct BoundFlags {
    bool same_region = false;
    bool jump = false;               // crossed a shared facet within delta of it
    bool corner_jump = false;        // region changed outside the single-facet model
    bool projection_in_facet = false;
    bool no_region = false;          // snapped state missed every quantized region
};

// Everything known about one state: the located regions, the error bounds at
// both levels of data knowledge, and the actually realized control error.
// Bound fields are NaN when the facet-jump model does not apply (corner
// jumps, missing region).
struct BoundReport {
    Vec x;
    std::size_t region_true = 0;
    std::optional<std::size_t> region_quant;
    double delta = 0.0;
    double first_term = 0.0;
    double second_apriori = 0.0;
    double second_aposteriori = 0.0;
    double bound_apriori = 0.0;
    double bound_aposteriori = 0.0;
    double actual_error = 0.0;
    BoundFlags flags;

    // Whether the bound claim applies: either both states share a region or
    // the jump matched the single-facet model with its projection hypothesis.
    bool bound_claimed() const {
        return flags.same_region || (flags.jump && flags.projection_in_facet);
    }
};

struct BoundOptions {
    // Replace ||x||_1 / ||x||_inf by their maxima over the state box, giving
    // state-independent bounds.
    bool use_box_norms = false;
};

// Full per-state analysis against a quantized partition. `pairs` is the
// facet adjacency of `p` (from find_facet_pairs). Throws DomainError when x
// lies outside every region of `p`.
BoundReport control_error_report(const PwaPartition& p, const QuantizedPartition& qp,
                                 std::span<const FacetPair> pairs, std::span<const double> x,
                                 const BoundOptions& opts = {});

}  // namespace empcq
