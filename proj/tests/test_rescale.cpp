#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "empcq/bounds.hpp"
#include "empcq/errors.hpp"
#include "empcq/kernels.hpp"
#include "empcq/rescale.hpp"
#include "empcq/rng.hpp"

#include "support.hpp"

using namespace empcq;

TEST_CASE("scaling from box extents") {
    CHECK(compute_scaling(StateBox{{-15.0, -15.0}, {15.0, 15.0}}).diag ==
          Vec{1.0 / 15.0, 1.0 / 15.0});
    CHECK(compute_scaling(StateBox{{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}}).diag ==
          Vec{1.0, 1.0, 1.0});
    CHECK(compute_scaling(StateBox{{-2.0}, {4.0}}).diag == Vec{0.25});

    CHECK_THROWS_AS(compute_scaling(StateBox{{1.0}, {1.0}}), DomainError);
    CHECK_THROWS_AS(compute_scaling(StateBox{{-1.0}, {std::numeric_limits<double>::infinity()}}),
                    DomainError);

    // ||Dx||_inf <= 1 over the whole box
    const StateBox box{{-3.0, 0.5}, {2.0, 7.0}};
    const ScalingTransform s = compute_scaling(box);
    Rng rng(1, make_stream(0x50, 0));
    for (int i = 0; i < 2000; ++i) {
        const Vec x = {rng.uniform(box.lo[0], box.hi[0]), rng.uniform(box.lo[1], box.hi[1])};
        CHECK(kernels::inf_norm(s.apply(x)) <= 1.0 + 1e-15);
    }
}

TEST_CASE("row normalization matches hand evaluation") {
    SUBCASE("2-D row") {
        const auto p = test::partition_from_string(R"({
            "n": 2, "m": 1,
            "state_box": {"lo": [-15, -15], "hi": [15, 15]},
            "regions": [{"H": [[2, 0], [-1, 0], [0, 1], [0, -1]],
                         "K": [30, 15, 15, 15],
                         "F": [[0, 0]], "G": [0]}]
        })");
        const ScalingTransform s = compute_scaling(p.box);
        const PwaPartition r = rescale_partition(p, s);
        // h = [2, 0], k = 30: hD^-1 = [30, 0], c = 30 -> ([1, 0], 1)
        CHECK(r.regions[0].H(0, 0) == 1.0);
        CHECK(r.regions[0].H(0, 1) == 0.0);
        CHECK(r.regions[0].K[0] == 1.0);
    }
    SUBCASE("already normalized row is a fixed point") {
        const auto p = test::partition_from_string(R"({
            "n": 1, "m": 1,
            "state_box": {"lo": [-1], "hi": [1]},
            "regions": [{"H": [[1], [-1]], "K": [0.5, 1], "F": [[1]], "G": [0]}]
        })");
        const PwaPartition r = rescale_partition(p, compute_scaling(p.box));
        CHECK(r.regions[0].H(0, 0) == 1.0);
        CHECK(r.regions[0].K[0] == 0.5);
        CHECK(r.regions[0].H(1, 0) == -1.0);
        CHECK(r.regions[0].K[1] == 1.0);
    }
    SUBCASE("SAT1D with D = diag(1/5)") {
        const PwaPartition p = test::load_fixture("sat1d.json");
        const ScalingTransform s = compute_scaling(p.box);
        CHECK(s.diag == Vec{0.2});
        const PwaPartition r = rescale_partition(p, s);
        // region 2 row [1] <= 1: hD^-1 = [5], c = 5 -> ([1], 0.2)
        CHECK(r.regions[1].H(1, 0) == 1.0);
        CHECK(r.regions[1].K[1] == doctest::Approx(0.2).epsilon(1e-15));
        // law F = [1] -> F D^-1 = [5]
        CHECK(r.laws[1].F(0, 0) == 5.0);
        CHECK(r.laws[1].G[0] == 0.0);
    }
}

TEST_CASE("rescaling preserves membership and law values") {
    for (const char* name : {"sat1d.json", "gain2.json", "box2.json", "hetero2d.json"}) {
        CAPTURE(name);
        const PwaPartition p = test::load_fixture(name);
        const ScalingTransform s = compute_scaling(p.box);
        const PwaPartition r = rescale_partition(p, s);

        // normalization postcondition
        for (const Region& reg : r.regions) {
            for (std::size_t row = 0; row < reg.constraint_count(); ++row) {
                CHECK(kernels::one_norm(reg.H.row(row)) <= 1.0 + 1e-12);
                CHECK(std::fabs(reg.K[row]) <= 1.0 + 1e-12);
            }
        }

        Rng rng(0xE5, make_stream(0x51, 0));
        for (int i = 0; i < 4000; ++i) {
            Vec x(p.state_dim);
            for (std::size_t l = 0; l < p.state_dim; ++l)
                x[l] = rng.uniform(p.box.lo[l], p.box.hi[l]);
            const Vec xs = s.apply(x);
            CHECK(locate(p, x) == locate(r, xs));
            const auto region = locate(p, x);
            if (!region) continue;
            const Vec u = evaluate_law(p, *region, x);
            const Vec us = evaluate_law(r, *region, xs);
            for (std::size_t k = 0; k < u.size(); ++k)
                CHECK(us[k] == doctest::Approx(u[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("uniform residual bound evaluates and dominates") {
    CHECK(rescaled_delta_bound(1.0 / 32.0, 2) == 0.126953125);
    CHECK(rescaled_delta_bound(0.0, 5) == 0.0);
    CHECK(rescaled_delta_bound(0.1, 1) == doctest::Approx(0.31).epsilon(1e-15));

    // after rescaling, the uniform bound dominates the per-row bound for
    // every in-box state
    const PwaPartition p = test::load_fixture("hetero2d.json");
    const ScalingTransform s = compute_scaling(p.box);
    const PwaPartition r = rescale_partition(p, s);
    Rng rng(0x77, make_stream(0x52, 0));
    for (double eps : {0.25, 0.03125, 0.001953125}) {
        for (int i = 0; i < 2000; ++i) {
            Vec x(r.state_dim);
            for (std::size_t l = 0; l < r.state_dim; ++l)
                x[l] = rng.uniform(r.box.lo[l], r.box.hi[l]);
            for (const Region& reg : r.regions) {
                for (std::size_t row = 0; row < reg.constraint_count(); ++row) {
                    const Hyperplane hp{Vec(reg.H.row(row).begin(), reg.H.row(row).end()),
                                        reg.K[row]};
                    CHECK(delta_bound(hp, x, eps) <=
                          rescaled_delta_bound(eps, r.state_dim) + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("rescaled control bound") {
    SUBCASE("zero steps give zero") {
        const Matrix F = Matrix::from_rows({{1.0, 2.0}});
        const ScalingTransform s{{0.5, 0.25}};
        CHECK(rescaled_control_bound(F, F, Hyperplane{{1.0, 0.0}, 0.5}, s, Vec{0.5, 0.5}, 0.0,
                                     0.0) == 0.0);
    }
    SUBCASE("equal gains leave only the law-step terms") {
        const Matrix F = Matrix::from_rows({{3.0}});
        const ScalingTransform s{{1.0}};
        // 0 + 0 + n*eps1*||x|| + 0 + eps1 with n = 1, ||x|| = 1
        CHECK(rescaled_control_bound(F, F, Hyperplane{{1.0}, 0.5}, s, Vec{1.0}, 0.0,
                                     1.0 / 32.0) == 0.0625);
    }
    SUBCASE("cross-check against the assembled terms") {
        // SAT1D rescaled: D = diag(1/5), pair (2, 3) at the (rescaled) facet
        const PwaPartition p = test::load_fixture("sat1d.json");
        const ScalingTransform s = compute_scaling(p.box);
        const PwaPartition r = rescale_partition(p, s);
        const auto pairs = find_facet_pairs(r, default_probe_step(r.box));
        REQUIRE(pairs.size() == 2);
        const FacetPair& fp = pairs[1];  // regions 2 and 3
        const double eps = 1.0 / 32.0, eps1 = 1.0 / 32.0;
        const Vec x = {0.2 - 1e-3};  // rescaled units, just below the facet

        const double got = rescaled_control_bound(p.laws[fp.upper].F, p.laws[fp.lower].F,
                                                  fp.hp, s, x, eps, eps1);

        // same display assembled by hand from its five summands
        const double delta = rescaled_delta_bound(eps, 1);
        const double kink =
            std::fabs((p.laws[fp.upper].F(0, 0) - p.laws[fp.lower].F(0, 0)) / s.diag[0] *
                      fp.hp.normal[0]);
        const double nn = fp.hp.normal[0] * fp.hp.normal[0];
        const double gain = std::fabs(p.laws[fp.upper].F(0, 0)) / s.diag[0];
        const double manual = delta / nn * kink + eps * gain + 1.0 * eps1 * 0.199 +
                              1.0 * eps * eps1 + eps1;
        CHECK(got == doctest::Approx(manual).epsilon(1e-9));
    }
}
