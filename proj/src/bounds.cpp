#include "empcq/bounds.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "empcq/errors.hpp"
#include "empcq/kernels.hpp"

namespace empcq {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// The stored representation of the pair's facet inside `region`'s own
// constraint system. Delta and the kink quotient are not invariant under row
// rescaling, so the bound must see the row exactly as the controller stores
// (and quantizes) it. Falls back to the canonical form oriented with
// `region` on the <= side, which only happens for constraint systems that
// omit their own facet row.
Hyperplane row_representation(const PwaPartition& p, std::size_t region, const FacetPair& fp) {
    if (const auto row = matching_row(p.regions[region], fp.hp)) {
        return Hyperplane{Vec(p.regions[region].H.row(*row).begin(),
                              p.regions[region].H.row(*row).end()),
                          p.regions[region].K[*row]};
    }
    return fp.oriented_toward(region);
}

}  // namespace

double matrix_inf_norm(const Matrix& m) {
    double worst = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r)
        worst = std::fmax(worst, kernels::one_norm(m.row(r)));
    return worst;
}

double delta_bound_from_norms(double h_norm1, double x_norm1, double eps, std::size_t n) {
    return eps * (h_norm1 + x_norm1 + static_cast<double>(n) * eps + 1.0);
}

double delta_bound(const Hyperplane& hp, std::span<const double> x, double eps) {
    return delta_bound_from_norms(kernels::one_norm(hp.normal), kernels::one_norm(x), eps,
                                  x.size());
}

bool jump_certificate(const Hyperplane& hp, std::span<const double> x, double delta) {
    const double y = hp.residual(x);
    return -delta < y && y <= 0.0;
}

double first_term(const Matrix& F_upper, const Matrix& F_lower, const Hyperplane& hp,
                  double delta) {
    const double nn = kernels::dot(hp.normal, hp.normal);
    if (nn == 0.0) throw DomainError("hyperplane normal is the zero vector");
    double kink = 0.0;  // ||(F_upper - F_lower) h'||_inf
    thread_local Vec diff;
    for (std::size_t r = 0; r < F_upper.rows(); ++r) {
        diff.assign(F_upper.row(r).begin(), F_upper.row(r).end());
        kernels::axpy(diff, -1.0, F_lower.row(r));
        kink = std::fmax(kink, std::fabs(kernels::dot(diff, hp.normal)));
    }
    return delta * kink / nn;
}

double second_term_aposteriori_from_norms(const Matrix& dF, std::span<const double> dG,
                                          const Matrix& F_hat, double x_norm_inf,
                                          double eps_state) {
    return matrix_inf_norm(dF) * x_norm_inf + kernels::inf_norm(dG) +
           matrix_inf_norm(F_hat) * eps_state;
}

double second_term_aposteriori(const Matrix& dF, std::span<const double> dG, const Matrix& F_hat,
                               std::span<const double> x, double eps_state) {
    return second_term_aposteriori_from_norms(dF, dG, F_hat, kernels::inf_norm(x), eps_state);
}

double second_term_apriori_from_norms(const Matrix& F, double x_norm_inf, double eps,
                                      std::size_t n) {
    const double nd = static_cast<double>(n);
    return eps * (matrix_inf_norm(F) + nd * x_norm_inf + nd * eps + 1.0);
}

double second_term_apriori(const Matrix& F, std::span<const double> x, double eps) {
    return second_term_apriori_from_norms(F, kernels::inf_norm(x), eps, x.size());
}

BoundReport control_error_report(const PwaPartition& p, const QuantizedPartition& qp,
                                 std::span<const FacetPair> pairs, std::span<const double> x,
                                 const BoundOptions& opts) {
    if (!qp.deltas_valid)
        throw DomainError("quantized partition carries no deltas; quantize from the original");

    BoundReport rep;
    rep.x.assign(x.begin(), x.end());

    const auto region_true = locate(p, x);
    if (!region_true) throw DomainError("state outside partition");
    rep.region_true = *region_true;

    const QuantizedEval ev = quantized_evaluate(qp, x);
    rep.region_quant = ev.region;

    if (!ev.region) {
        rep.flags.no_region = true;
        rep.delta = rep.first_term = rep.second_apriori = rep.second_aposteriori = kNaN;
        rep.bound_apriori = rep.bound_aposteriori = rep.actual_error = kNaN;
        return rep;
    }

    const Vec u_true = evaluate_law(p, rep.region_true, x);
    thread_local Vec err;
    err.assign(ev.control.begin(), ev.control.end());
    for (std::size_t r = 0; r < err.size(); ++r) err[r] -= u_true[r];
    rep.actual_error = kernels::inf_norm(err);

    const std::size_t n = p.state_dim;
    const double x_norm1 = opts.use_box_norms ? p.box.norm1_bound() : kernels::one_norm(x);
    const double x_norm_inf = opts.use_box_norms ? p.box.norm_inf_bound() : kernels::inf_norm(x);
    const double eps_state = qp.fmt_state.step();
    // The residual bound perturbs h, k (region data) and x (state); the
    // worse of the two grids covers all three perturbations.
    const double eps_delta = std::fmax(qp.fmt_regions.step(), eps_state);
    // The pessimistic second term sees law data and the state perturbed.
    const double eps_apriori = std::fmax(qp.fmt_laws.step(), eps_state);

    const auto seconds_for = [&](std::size_t region) {
        rep.second_aposteriori = second_term_aposteriori_from_norms(
            qp.delta_F[region], qp.delta_G[region], qp.base.laws[region].F, x_norm_inf,
            eps_state);
        rep.second_apriori =
            second_term_apriori_from_norms(p.laws[region].F, x_norm_inf, eps_apriori, n);
    };

    if (*ev.region == rep.region_true) {
        rep.flags.same_region = true;
        seconds_for(rep.region_true);
        rep.bound_apriori = rep.second_apriori;
        rep.bound_aposteriori = rep.second_aposteriori;
        return rep;
    }

    // Regions differ. The single-facet jump model applies when the two
    // regions share a facet and x is certified within delta of it; pick the
    // certified connection (corners can offer several).
    const auto connections = pairs_between(pairs, rep.region_true, *ev.region);
    const FacetPair* chosen = nullptr;
    Hyperplane facet_row;
    double delta_row = 0.0;
    bool certified = false;
    for (const FacetPair* cand : connections) {
        Hyperplane row_hp = row_representation(p, rep.region_true, *cand);
        const double d =
            delta_bound_from_norms(kernels::one_norm(row_hp.normal), x_norm1, eps_delta, n);
        if (jump_certificate(row_hp, x, d)) {
            chosen = cand;
            facet_row = std::move(row_hp);
            delta_row = d;
            certified = true;
            break;
        }
    }

    if (!certified) {
        rep.flags.corner_jump = true;
        rep.delta = rep.first_term = rep.second_apriori = rep.second_aposteriori = kNaN;
        rep.bound_apriori = rep.bound_aposteriori = kNaN;
        return rep;
    }

    rep.flags.jump = true;
    rep.delta = delta_row;
    rep.flags.projection_in_facet =
        check_assumptions_toward(p, *chosen, *ev.region, x, p.locate_tol).projection_in_facet;

    rep.first_term =
        first_term(p.laws[*ev.region].F, p.laws[rep.region_true].F, facet_row, rep.delta);
    seconds_for(*ev.region);
    rep.bound_apriori = rep.first_term + rep.second_apriori;
    rep.bound_aposteriori = rep.first_term + rep.second_aposteriori;
    return rep;
}

}  // namespace empcq
