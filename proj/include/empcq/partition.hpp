#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "empcq/matrix.hpp"
#include "empcq/rng.hpp"

namespace empcq {

// One half-space boundary h·x <= k (or the plane h·x = k, context-dependent).
struct Hyperplane {
    Vec normal;          // h, never the zero vector
    double offset = 0.0;  // k

    // h·x - k
    double residual(std::span<const double> x) const;
};

// Equivalent representation with unit 2-norm and the sign fixed by the first
// nonzero normal component. Makes (h, k) vs (c·h, c·k) and (-h, -k)
// identification exact up to roundoff.
Hyperplane canonical_hyperplane(const Hyperplane& hp);
bool same_canonical_hyperplane(const Hyperplane& a, const Hyperplane& b, double tol = 1e-9);

// Polyhedron {x : H x <= K}.
struct Region {
    Matrix H;
    Vec K;

    // Column-major copy of H for the membership kernel; kept in sync by
    // make_region.
    Matrix H_cols;

    std::size_t constraint_count() const { return H.rows(); }
    bool contains(std::span<const double> x, double tol) const;
};

Region make_region(Matrix H, Vec K);

// u(x) = F x + G on the owning region.
struct AffineLaw {
    Matrix F;  // m x n
    Vec G;     // m
};

struct StateBox {
    Vec lo;
    Vec hi;

    std::size_t dim() const { return lo.size(); }
    bool contains(std::span<const double> x, double tol = 0.0) const;
    // max(|lo_l|, |hi_l|)
    double max_abs(std::size_t l) const;
    // largest attainable ||x||_1 / ||x||_inf over the box
    double norm1_bound() const;
    double norm_inf_bound() const;
};

// Piecewise-affine control law over a polyhedral partition of the state box.
struct PwaPartition {
    std::size_t state_dim = 0;  // n
    std::size_t input_dim = 0;  // m
    std::vector<Region> regions;
    std::vector<AffineLaw> laws;
    StateBox box;

    // Membership slack used by locate(); assembled as 2^-40 times the
    // largest |K| entry so that working-precision roundoff never flips a
    // strict membership, while real misclassification stays visible.
    double locate_tol = 0.0;

    std::size_t region_count() const { return regions.size(); }
};

// Builds the derived fields (column-major constraint blocks, locate_tol).
// Performs no semantic validation; the loader does that.
PwaPartition assemble_partition(std::size_t n, std::size_t m, std::vector<Region> regions,
                                std::vector<AffineLaw> laws, StateBox box);

// Two regions bordering each other across one hyperplane. `hp` is stored in
// canonical form; `lower` is the region on the h·x <= k side and `upper` the
// one on the h·x >= k side, which encodes the orientation of the pair.
struct FacetPair {
    std::size_t upper = 0;
    std::size_t lower = 0;
    Hyperplane hp;

    // The pair's hyperplane flipped, if needed, so that `region` sits on the
    // <= side. `region` must be one of the two members.
    Hyperplane oriented_toward(std::size_t region) const;
};

// Smallest region index containing x within locate_tol; nullopt when x is
// outside every region.
std::optional<std::size_t> locate(const PwaPartition& p, std::span<const double> x);
std::optional<std::size_t> locate(const PwaPartition& p, std::span<const double> x, double tol);

// F_i x + G_i in working precision.
Vec evaluate_law(const PwaPartition& p, std::size_t i, std::span<const double> x);

struct Projection {
    Vec point;   // x_p = x + t h'
    double t;    // (k - h·x) / ||h||_2^2
};

// Orthogonal projection of x onto the plane h·x = k.
Projection project_onto_hyperplane(std::span<const double> x, const Hyperplane& hp);

struct AssumptionFlags {
    bool projection_in_facet = false;
    bool x_on_correct_side = false;
};

// Hypothesis checks for the facet-jump bound: the projection of x onto the
// pair's hyperplane must land inside the upper region's constraint system,
// and x itself must sit on the lower (h·x <= k) side.
AssumptionFlags check_assumptions(const PwaPartition& p, const FacetPair& fp,
                                  std::span<const double> x, double tol);

// Same checks relative to an explicit jump direction: `jump_into` is treated
// as the region on the far side of the facet from x.
AssumptionFlags check_assumptions_toward(const PwaPartition& p, const FacetPair& fp,
                                         std::size_t jump_into, std::span<const double> x,
                                         double tol);

// Probes the facet structure of every region: seeded points on each
// constraint plane (restricted to the box and the region) are stepped
// +/- probe_step along the unit normal and point-located on both sides.
// Distinct located regions yield a FacetPair; duplicates (same unordered
// pair, same canonical hyperplane) are merged. Planes on the box boundary
// yield no pair.
std::vector<FacetPair> find_facet_pairs(const PwaPartition& p, double probe_step);

double default_probe_step(const StateBox& box);

// All pairs connecting regions a and b (there can be several at degenerate
// corners, one per hyperplane).
std::vector<const FacetPair*> pairs_between(std::span<const FacetPair> pairs, std::size_t a,
                                            std::size_t b);

// The row of `region`'s constraint system lying on the same plane as hp
// (up to positive scaling or negation).
std::optional<std::size_t> matching_row(const Region& region, const Hyperplane& hp,
                                        double tol = 1e-9);

// Seeded probe points on {h·x = k}, inside the box, optionally restricted to
// a region's constraints within tol. Deterministic for fixed (seed, stream).
std::vector<Vec> hyperplane_probes(const StateBox& box, const Hyperplane& hp,
                                   const Region* filter, double tol, std::size_t count,
                                   std::uint64_t seed, std::uint64_t stream);

// Single-probe variant used by per-sample streams.
std::optional<Vec> one_hyperplane_probe(const StateBox& box, const Hyperplane& hp,
                                        const Region* filter, double tol, Rng& rng,
                                        int max_tries);

// Probe restricted to the pair's shared facet: on the hyperplane and inside
// both regions' constraint systems within tol.
std::optional<Vec> one_facet_probe(const PwaPartition& p, const FacetPair& fp, double tol,
                                   Rng& rng, int max_tries);

struct ContinuityResult {
    double worst_residual = 0.0;
    std::size_t worst_pair = 0;  // index into the pair list
    Vec worst_point;
    std::size_t probes_checked = 0;
};

// Max law mismatch ||u_i(x_p) - u_j(x_p)||_inf over probe points on every
// shared facet.
ContinuityResult check_continuity(const PwaPartition& p, std::span<const FacetPair> pairs,
                                  std::size_t probes_per_facet = 32);

}  // namespace empcq
