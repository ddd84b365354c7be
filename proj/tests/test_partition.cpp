#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "empcq/errors.hpp"
#include "empcq/kernels.hpp"
#include "empcq/partition.hpp"

#include "support.hpp"

using namespace empcq;

TEST_CASE("locate: interior, boundary tie-break, outside") {
    const PwaPartition p = test::load_fixture("sat1d.json");
    REQUIRE(p.region_count() == 3);

    CHECK(locate(p, Vec{0.5}) == 1);   // interior of the middle region
    CHECK(locate(p, Vec{-1.0}) == 0);  // boundary point, lowest index wins
    CHECK(locate(p, Vec{1.0}) == 1);
    CHECK(locate(p, Vec{7.0}) == std::nullopt);
    CHECK(locate(p, Vec{-5.0}) == 0);

    // determinism and the membership postcondition
    Rng rng(11, make_stream(0x30, 0));
    for (int i = 0; i < 2000; ++i) {
        const Vec x = {rng.uniform(-6.0, 6.0)};
        const auto r1 = locate(p, x);
        const auto r2 = locate(p, x);
        CHECK(r1 == r2);
        if (r1) CHECK(p.regions[*r1].contains(x, p.locate_tol));
    }
}

TEST_CASE("evaluate_law on the saturated fixture") {
    const PwaPartition p = test::load_fixture("sat1d.json");
    CHECK(evaluate_law(p, 1, Vec{0.3}) == Vec{0.3});
    CHECK(evaluate_law(p, 2, Vec{4.0}) == Vec{1.0});
    CHECK(evaluate_law(p, 0, Vec{-2.0}) == Vec{-1.0});
    CHECK_THROWS_AS(evaluate_law(p, 9, Vec{0.0}), DomainError);
}

TEST_CASE("projection onto a hyperplane") {
    SUBCASE("unit normal") {
        const auto pr = project_onto_hyperplane(Vec{0.0, 0.0}, Hyperplane{{1.0, 0.0}, 1.0});
        CHECK(pr.t == 1.0);
        CHECK(pr.point == Vec{1.0, 0.0});
    }
    SUBCASE("point already on the plane is fixed") {
        const Hyperplane hp{{2.0, -1.0}, 3.0};
        const Vec x = {2.0, 1.0};  // 4 - 1 = 3
        const auto pr = project_onto_hyperplane(x, hp);
        CHECK(pr.t == 0.0);
        CHECK(pr.point == x);
    }
    SUBCASE("direct evaluation of the formula") {
        const auto pr = project_onto_hyperplane(Vec{2.0, 2.0}, Hyperplane{{1.0, 1.0}, 2.0});
        CHECK(pr.t == -1.0);  // (2 - 4) / 2
        CHECK(pr.point == Vec{1.0, 1.0});
    }
    SUBCASE("idempotence and sign over random data") {
        Rng rng(5, make_stream(0x31, 0));
        for (int i = 0; i < 2000; ++i) {
            Hyperplane hp;
            for (int l = 0; l < 3; ++l) hp.normal.push_back(rng.uniform(-2.0, 2.0));
            if (kernels::one_norm(hp.normal) < 1e-3) continue;
            hp.offset = rng.uniform(-2.0, 2.0);
            Vec x;
            for (int l = 0; l < 3; ++l) x.push_back(rng.uniform(-5.0, 5.0));
            const auto pr = project_onto_hyperplane(x, hp);
            CHECK(std::fabs(hp.residual(pr.point)) <= 1e-9);
            const auto again = project_onto_hyperplane(pr.point, hp);
            CHECK(std::fabs(again.t) <= 1e-9);
            // t >= 0 exactly when x sits on the h·x <= k side
            if (hp.residual(x) <= 0.0) CHECK(pr.t >= 0.0);
            else CHECK(pr.t <= 0.0);
        }
    }
    SUBCASE("zero normal is rejected") {
        CHECK_THROWS_AS(project_onto_hyperplane(Vec{0.0}, Hyperplane{{0.0}, 1.0}), DomainError);
    }
}

TEST_CASE("facet pair discovery") {
    SUBCASE("SAT1D has its two kinks") {
        const PwaPartition p = test::load_fixture("sat1d.json");
        const auto pairs = find_facet_pairs(p, 0.01);
        REQUIRE(pairs.size() == 2);
        CHECK(pairs[0].lower == 0);
        CHECK(pairs[0].upper == 1);
        CHECK(pairs[0].hp.offset == doctest::Approx(-1.0));
        CHECK(pairs[1].lower == 1);
        CHECK(pairs[1].upper == 2);
        CHECK(pairs[1].hp.offset == doctest::Approx(1.0));
    }
    SUBCASE("single region has nothing to border") {
        const auto p = test::partition_from_string(R"({
            "n": 1, "m": 1,
            "state_box": {"lo": [-1], "hi": [1]},
            "regions": [{"H": [[-1],[1]], "K": [1,1], "F": [[1]], "G": [0]}]
        })");
        CHECK(find_facet_pairs(p, 0.001).empty());
    }
    SUBCASE("GAIN2 borders at the origin") {
        const PwaPartition p = test::load_fixture("gain2.json");
        const auto pairs = find_facet_pairs(p, 0.001);
        REQUIRE(pairs.size() == 1);
        CHECK(pairs[0].lower == 0);
        CHECK(pairs[0].upper == 1);
        CHECK(pairs[0].hp.offset == doctest::Approx(0.0));
        CHECK(pairs[0].hp.normal[0] == doctest::Approx(1.0));
    }
    SUBCASE("hetero2d: duplicates merged, orientation consistent") {
        const PwaPartition p = test::load_fixture("hetero2d.json");
        const auto pairs = find_facet_pairs(p, default_probe_step(p.box));
        REQUIRE(pairs.size() == 4);
        const auto ukey = [](const FacetPair& fp) {
            return std::pair<std::size_t, std::size_t>(std::min(fp.lower, fp.upper),
                                                       std::max(fp.lower, fp.upper));
        };
        std::set<std::pair<std::size_t, std::size_t>> keys;
        for (const auto& fp : pairs) keys.insert(ukey(fp));
        CHECK(keys == std::set<std::pair<std::size_t, std::size_t>>{
                          {0, 1}, {0, 2}, {0, 3}, {1, 2}});
        for (const auto& fp : pairs) {
            const auto key = ukey(fp);
            if (key == std::pair<std::size_t, std::size_t>{1, 2}) {
                // saturated split across x2 = 0: region 2 (index 1) below
                CHECK(std::fabs(fp.hp.normal[1]) == doctest::Approx(1.0));
                CHECK(fp.lower == 1);
                CHECK(fp.upper == 2);
            } else if (key == std::pair<std::size_t, std::size_t>{0, 3}) {
                CHECK(fp.lower == 3);  // u = -1 region sits on the g <= -1 side
                CHECK(fp.upper == 0);
            } else {
                CHECK(fp.lower == 0);  // band region sits on the g <= 1 side
            }
        }
    }
    SUBCASE("box-boundary facets yield no pair") {
        const PwaPartition p = test::load_fixture("box2.json");
        const auto pairs = find_facet_pairs(p, 0.001);
        REQUIRE(pairs.size() == 1);  // only the interior split at x1 = 1
        CHECK(std::min(pairs[0].lower, pairs[0].upper) == 0);
        CHECK(std::max(pairs[0].lower, pairs[0].upper) == 1);
    }
}

TEST_CASE("assumption checks across the BOX2 split") {
    const PwaPartition p = test::load_fixture("box2.json");
    const auto pairs = find_facet_pairs(p, 0.001);
    REQUIRE(pairs.size() == 1);
    const FacetPair& fp = pairs[0];
    CHECK(fp.lower == 0);
    CHECK(fp.upper == 1);

    SUBCASE("projection lands inside the right square") {
        const auto flags = check_assumptions(p, fp, Vec{0.9, 0.5}, p.locate_tol);
        CHECK(flags.projection_in_facet);
        CHECK(flags.x_on_correct_side);
    }
    SUBCASE("projection of a far-out state violates the facet") {
        const auto flags = check_assumptions(p, fp, Vec{0.9, 7.0}, p.locate_tol);
        CHECK_FALSE(flags.projection_in_facet);  // x_p = (1, 7) breaks x2 <= 1
        CHECK(flags.x_on_correct_side);
    }
    SUBCASE("one-dimensional facet equals its own projection") {
        const PwaPartition sat = test::load_fixture("sat1d.json");
        const auto sat_pairs = find_facet_pairs(sat, 0.01);
        const auto flags = check_assumptions(sat, sat_pairs[1], Vec{0.99}, sat.locate_tol);
        CHECK(flags.projection_in_facet);
        CHECK(flags.x_on_correct_side);
    }
}

TEST_CASE("continuity property holds on every fixture") {
    for (const char* name : {"sat1d.json", "gain2.json", "box2.json", "hetero2d.json"}) {
        CAPTURE(name);
        const PwaPartition p = test::load_fixture(name);
        const auto pairs = find_facet_pairs(p, default_probe_step(p.box));
        const auto res = check_continuity(p, pairs);
        CHECK(res.worst_residual <= 1e-8);
        CHECK(res.probes_checked > 0);
    }
}

TEST_CASE("canonical hyperplane form") {
    const Hyperplane a{{2.0, 0.0}, 30.0};
    const Hyperplane b{{-1.0, 0.0}, -15.0};
    CHECK(same_canonical_hyperplane(canonical_hyperplane(a), canonical_hyperplane(b)));

    const Hyperplane c{{0.0, -4.0}, 8.0};
    const Hyperplane cc = canonical_hyperplane(c);
    CHECK(cc.normal == Vec{0.0, 1.0});
    CHECK(cc.offset == -2.0);

    CHECK_FALSE(same_canonical_hyperplane(canonical_hyperplane(a),
                                          canonical_hyperplane(Hyperplane{{2.0, 0.0}, 29.0})));
    CHECK_THROWS_AS(canonical_hyperplane(Hyperplane{{0.0, 0.0}, 1.0}), DomainError);
}
