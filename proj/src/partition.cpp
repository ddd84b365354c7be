#include "empcq/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "empcq/errors.hpp"
#include "empcq/kernels.hpp"

namespace empcq {
namespace {

// Seed for the partition-analysis probe streams (facet adjacency,
// continuity). Fixed so that analysis results are a function of the
// partition alone.
constexpr std::uint64_t kAnalysisSeed = 0x5EEDFACE5EEDFACEull;
constexpr std::uint32_t kProbePurpose = 0xFA;

double norm2_squared(std::span<const double> v) { return kernels::dot(v, v); }

}  // namespace

double Hyperplane::residual(std::span<const double> x) const {
    return kernels::dot(normal, x) - offset;
}

Hyperplane canonical_hyperplane(const Hyperplane& hp) {
    const double nrm = std::sqrt(norm2_squared(hp.normal));
    if (nrm == 0.0) throw DomainError("hyperplane normal is the zero vector");
    double sign = 1.0;
    for (double c : hp.normal) {
        if (c != 0.0) {
            sign = c > 0.0 ? 1.0 : -1.0;
            break;
        }
    }
    Hyperplane out;
    out.normal.reserve(hp.normal.size());
    const double s = sign / nrm;
    for (double c : hp.normal) out.normal.push_back(c * s);
    out.offset = hp.offset * s;
    return out;
}

bool same_canonical_hyperplane(const Hyperplane& a, const Hyperplane& b, double tol) {
    if (a.normal.size() != b.normal.size()) return false;
    if (std::fabs(a.offset - b.offset) > tol) return false;
    for (std::size_t l = 0; l < a.normal.size(); ++l)
        if (std::fabs(a.normal[l] - b.normal[l]) > tol) return false;
    return true;
}

Region make_region(Matrix H, Vec K) {
    Region r;
    r.H_cols = Matrix(H.cols(), H.rows());
    for (std::size_t i = 0; i < H.rows(); ++i)
        for (std::size_t j = 0; j < H.cols(); ++j) r.H_cols(j, i) = H(i, j);
    r.H = std::move(H);
    r.K = std::move(K);
    return r;
}

bool Region::contains(std::span<const double> x, double tol) const {
    thread_local Vec scratch;
    const std::size_t rows = H.rows();
    scratch.resize(rows);
    kernels::matvec_colmajor(H_cols.data(), x, rows, scratch);
    for (std::size_t i = 0; i < rows; ++i)
        if (scratch[i] > K[i] + tol) return false;
    return true;
}

bool StateBox::contains(std::span<const double> x, double tol) const {
    for (std::size_t l = 0; l < lo.size(); ++l)
        if (x[l] < lo[l] - tol || x[l] > hi[l] + tol) return false;
    return true;
}

double StateBox::max_abs(std::size_t l) const { return std::fmax(std::fabs(lo[l]), std::fabs(hi[l])); }

double StateBox::norm1_bound() const {
    double s = 0.0;
    for (std::size_t l = 0; l < lo.size(); ++l) s += max_abs(l);
    return s;
}

double StateBox::norm_inf_bound() const {
    double s = 0.0;
    for (std::size_t l = 0; l < lo.size(); ++l) s = std::fmax(s, max_abs(l));
    return s;
}

PwaPartition assemble_partition(std::size_t n, std::size_t m, std::vector<Region> regions,
                                std::vector<AffineLaw> laws, StateBox box) {
    PwaPartition p;
    p.state_dim = n;
    p.input_dim = m;
    p.regions = std::move(regions);
    p.laws = std::move(laws);
    p.box = std::move(box);
    double max_k = 0.0;
    for (const Region& r : p.regions)
        for (double k : r.K) max_k = std::fmax(max_k, std::fabs(k));
    p.locate_tol = std::ldexp(max_k, -40);
    return p;
}

Hyperplane FacetPair::oriented_toward(std::size_t region) const {
    if (region == lower) return hp;
    Hyperplane flipped;
    flipped.normal.reserve(hp.normal.size());
    for (double c : hp.normal) flipped.normal.push_back(-c);
    flipped.offset = -hp.offset;
    return flipped;
}

std::optional<std::size_t> locate(const PwaPartition& p, std::span<const double> x, double tol) {
    for (std::size_t i = 0; i < p.regions.size(); ++i)
        if (p.regions[i].contains(x, tol)) return i;
    return std::nullopt;
}

std::optional<std::size_t> locate(const PwaPartition& p, std::span<const double> x) {
    return locate(p, x, p.locate_tol);
}

Vec evaluate_law(const PwaPartition& p, std::size_t i, std::span<const double> x) {
    if (i >= p.laws.size()) throw DomainError("region index out of range");
    const AffineLaw& law = p.laws[i];
    Vec u(p.input_dim);
    for (std::size_t r = 0; r < p.input_dim; ++r) u[r] = kernels::dot(law.F.row(r), x) + law.G[r];
    return u;
}

Projection project_onto_hyperplane(std::span<const double> x, const Hyperplane& hp) {
    const double nn = norm2_squared(hp.normal);
    if (nn == 0.0) throw DomainError("hyperplane normal is the zero vector");
    Projection pr;
    pr.t = (hp.offset - kernels::dot(hp.normal, x)) / nn;
    pr.point.assign(x.begin(), x.end());
    kernels::axpy(pr.point, pr.t, hp.normal);
    return pr;
}

AssumptionFlags check_assumptions_toward(const PwaPartition& p, const FacetPair& fp,
                                         std::size_t jump_into, std::span<const double> x,
                                         double tol) {
    const std::size_t from = jump_into == fp.upper ? fp.lower : fp.upper;
    const Hyperplane oriented = fp.oriented_toward(from);
    AssumptionFlags flags;
    const Projection pr = project_onto_hyperplane(x, oriented);
    flags.projection_in_facet = p.regions[jump_into].contains(pr.point, tol);
    flags.x_on_correct_side = oriented.residual(x) <= 0.0;
    return flags;
}

AssumptionFlags check_assumptions(const PwaPartition& p, const FacetPair& fp,
                                  std::span<const double> x, double tol) {
    return check_assumptions_toward(p, fp, fp.upper, x, tol);
}

std::optional<Vec> one_hyperplane_probe(const StateBox& box, const Hyperplane& hp,
                                        const Region* filter, double tol, Rng& rng,
                                        int max_tries) {
    const std::size_t n = box.dim();
    Vec draw(n);
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        for (std::size_t l = 0; l < n; ++l) draw[l] = rng.uniform(box.lo[l], box.hi[l]);
        Projection pr = project_onto_hyperplane(draw, hp);
        if (!box.contains(pr.point, tol)) continue;
        if (filter && !filter->contains(pr.point, tol)) continue;
        return std::move(pr.point);
    }
    return std::nullopt;
}

std::optional<Vec> one_facet_probe(const PwaPartition& p, const FacetPair& fp, double tol,
                                   Rng& rng, int max_tries) {
    const std::size_t n = p.state_dim;
    Vec draw(n);
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        for (std::size_t l = 0; l < n; ++l) draw[l] = rng.uniform(p.box.lo[l], p.box.hi[l]);
        Projection pr = project_onto_hyperplane(draw, fp.hp);
        if (!p.box.contains(pr.point, tol)) continue;
        if (!p.regions[fp.lower].contains(pr.point, tol)) continue;
        if (!p.regions[fp.upper].contains(pr.point, tol)) continue;
        return std::move(pr.point);
    }
    return std::nullopt;
}

std::vector<Vec> hyperplane_probes(const StateBox& box, const Hyperplane& hp,
                                   const Region* filter, double tol, std::size_t count,
                                   std::uint64_t seed, std::uint64_t stream) {
    Rng rng(seed, stream);
    std::vector<Vec> probes;
    probes.reserve(count);
    const int budget = static_cast<int>(count) * 64;
    int spent = 0;
    while (probes.size() < count && spent < budget) {
        auto probe = one_hyperplane_probe(box, hp, filter, tol, rng, 1);
        ++spent;
        if (probe) probes.push_back(std::move(*probe));
    }
    return probes;
}

double default_probe_step(const StateBox& box) {
    double extent = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < box.dim(); ++l) extent = std::fmin(extent, box.hi[l] - box.lo[l]);
    return extent * 1e-3;
}

std::vector<FacetPair> find_facet_pairs(const PwaPartition& p, double probe_step) {
    if (!(probe_step > 0.0)) throw DomainError("probe_step must be positive");
    std::vector<FacetPair> pairs;
    const std::size_t n = p.state_dim;
    Vec side_a(n), side_b(n);

    for (std::size_t i = 0; i < p.regions.size(); ++i) {
        const Region& region = p.regions[i];
        for (std::size_t row = 0; row < region.constraint_count(); ++row) {
            Hyperplane raw{Vec(region.H.row(row).begin(), region.H.row(row).end()),
                           region.K[row]};
            const Hyperplane canon = canonical_hyperplane(raw);
            const auto probes =
                hyperplane_probes(p.box, raw, &region, p.locate_tol, 32, kAnalysisSeed,
                                  make_stream(kProbePurpose, (i << 20) | row));
            for (const Vec& xp : probes) {
                for (std::size_t l = 0; l < n; ++l) {
                    side_a[l] = xp[l] - probe_step * canon.normal[l];
                    side_b[l] = xp[l] + probe_step * canon.normal[l];
                }
                const auto ra = locate(p, side_a);
                const auto rb = locate(p, side_b);
                if (!ra || !rb || *ra == *rb) continue;
                // side_a has h·x < k for the canonical plane
                FacetPair cand;
                cand.lower = *ra;
                cand.upper = *rb;
                cand.hp = canon;
                const bool dup = std::any_of(pairs.begin(), pairs.end(), [&](const FacetPair& q) {
                    return ((q.lower == cand.lower && q.upper == cand.upper) ||
                            (q.lower == cand.upper && q.upper == cand.lower)) &&
                           same_canonical_hyperplane(q.hp, cand.hp);
                });
                if (!dup) pairs.push_back(std::move(cand));
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const FacetPair& a, const FacetPair& b) {
        const auto ka = std::minmax(a.lower, a.upper);
        const auto kb = std::minmax(b.lower, b.upper);
        if (ka != kb) return ka < kb;
        if (a.hp.offset != b.hp.offset) return a.hp.offset < b.hp.offset;
        return std::lexicographical_compare(a.hp.normal.begin(), a.hp.normal.end(),
                                            b.hp.normal.begin(), b.hp.normal.end());
    });
    return pairs;
}

std::vector<const FacetPair*> pairs_between(std::span<const FacetPair> pairs, std::size_t a,
                                            std::size_t b) {
    std::vector<const FacetPair*> out;
    for (const FacetPair& fp : pairs)
        if ((fp.lower == a && fp.upper == b) || (fp.lower == b && fp.upper == a))
            out.push_back(&fp);
    return out;
}

std::optional<std::size_t> matching_row(const Region& region, const Hyperplane& hp, double tol) {
    const Hyperplane target = canonical_hyperplane(hp);
    for (std::size_t row = 0; row < region.constraint_count(); ++row) {
        Hyperplane raw{Vec(region.H.row(row).begin(), region.H.row(row).end()), region.K[row]};
        if (same_canonical_hyperplane(canonical_hyperplane(raw), target, tol)) return row;
    }
    return std::nullopt;
}

ContinuityResult check_continuity(const PwaPartition& p, std::span<const FacetPair> pairs,
                                  std::size_t probes_per_facet) {
    ContinuityResult res;
    Vec diff(p.input_dim);
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        const FacetPair& fp = pairs[pi];
        const auto probes = hyperplane_probes(p.box, fp.hp, &p.regions[fp.lower], p.locate_tol,
                                              probes_per_facet, kAnalysisSeed,
                                              make_stream(kProbePurpose + 1, pi));
        for (const Vec& xp : probes) {
            if (!p.regions[fp.upper].contains(xp, p.locate_tol)) continue;
            const Vec ui = evaluate_law(p, fp.upper, xp);
            const Vec uj = evaluate_law(p, fp.lower, xp);
            for (std::size_t r = 0; r < p.input_dim; ++r) diff[r] = ui[r] - uj[r];
            const double residual = kernels::inf_norm(diff);
            ++res.probes_checked;
            if (residual > res.worst_residual) {
                res.worst_residual = residual;
                res.worst_pair = pi;
                res.worst_point = xp;
            }
        }
    }
    return res;
}

}  // namespace empcq
