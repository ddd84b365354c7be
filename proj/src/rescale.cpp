#include "empcq/rescale.hpp"

#include <cmath>
#include <string>

#include "empcq/errors.hpp"
#include "empcq/kernels.hpp"

namespace empcq {

Vec ScalingTransform::apply(std::span<const double> x) const {
    Vec out(x.size());
    for (std::size_t l = 0; l < x.size(); ++l) out[l] = diag[l] * x[l];
    return out;
}

Vec ScalingTransform::apply_inverse(std::span<const double> x) const {
    Vec out(x.size());
    for (std::size_t l = 0; l < x.size(); ++l) out[l] = x[l] / diag[l];
    return out;
}

ScalingTransform compute_scaling(const StateBox& box) {
    ScalingTransform s;
    s.diag.reserve(box.dim());
    for (std::size_t l = 0; l < box.dim(); ++l) {
        const double lo = box.lo[l], hi = box.hi[l];
        if (!std::isfinite(lo) || !std::isfinite(hi))
            throw DomainError("state box coordinate " + std::to_string(l + 1) + " is unbounded");
        const double extent = box.max_abs(l);
        if (!(lo < hi) || extent == 0.0)
            throw DomainError("state box coordinate " + std::to_string(l + 1) +
                              " has zero width");
        s.diag.push_back(1.0 / extent);
    }
    return s;
}

PwaPartition rescale_partition(const PwaPartition& p, const ScalingTransform& s) {
    if (s.dim() != p.state_dim) throw DomainError("scaling dimension mismatch");

    std::vector<Region> regions;
    std::vector<AffineLaw> laws;
    regions.reserve(p.regions.size());
    laws.reserve(p.laws.size());

    Vec scaled_row(p.state_dim);
    for (std::size_t i = 0; i < p.regions.size(); ++i) {
        const Region& r = p.regions[i];
        Matrix H(r.H.rows(), r.H.cols());
        Vec K(r.K.size());
        for (std::size_t row = 0; row < r.H.rows(); ++row) {
            for (std::size_t l = 0; l < p.state_dim; ++l)
                scaled_row[l] = r.H(row, l) / s.diag[l];  // h D^-1
            const double c = std::fmax(kernels::one_norm(scaled_row), std::fabs(r.K[row]));
            if (c == 0.0)
                throw DomainError("region " + std::to_string(i + 1) + ", row " +
                                  std::to_string(row + 1) + " is degenerate");
            for (std::size_t l = 0; l < p.state_dim; ++l) H(row, l) = scaled_row[l] / c;
            K[row] = r.K[row] / c;
        }
        regions.push_back(make_region(std::move(H), std::move(K)));

        const AffineLaw& law = p.laws[i];
        Matrix F(law.F.rows(), law.F.cols());
        for (std::size_t row = 0; row < law.F.rows(); ++row)
            for (std::size_t l = 0; l < p.state_dim; ++l)
                F(row, l) = law.F(row, l) / s.diag[l];  // F D^-1
        laws.push_back(AffineLaw{std::move(F), law.G});
    }

    StateBox box;
    box.lo.reserve(p.state_dim);
    box.hi.reserve(p.state_dim);
    for (std::size_t l = 0; l < p.state_dim; ++l) {
        box.lo.push_back(p.box.lo[l] * s.diag[l]);
        box.hi.push_back(p.box.hi[l] * s.diag[l]);
    }

    return assemble_partition(p.state_dim, p.input_dim, std::move(regions), std::move(laws),
                              std::move(box));
}

double rescaled_delta_bound(double eps, std::size_t n) {
    const double nd = static_cast<double>(n);
    return eps * (nd + 2.0 + nd * eps);
}

double rescaled_control_bound(const Matrix& F_upper, const Matrix& F_lower, const Hyperplane& hp,
                              const ScalingTransform& s, std::span<const double> x, double eps,
                              double eps1) {
    const std::size_t n = x.size();
    const double nn = kernels::dot(hp.normal, hp.normal);
    if (nn == 0.0) throw DomainError("hyperplane normal is the zero vector");
    const double delta = rescaled_delta_bound(eps, n);

    // ||(F_upper - F_lower) D^-1 h'||_inf
    double kink = 0.0;
    Vec diff(n);
    for (std::size_t r = 0; r < F_upper.rows(); ++r) {
        for (std::size_t l = 0; l < n; ++l)
            diff[l] = (F_upper(r, l) - F_lower(r, l)) / s.diag[l];
        kink = std::fmax(kink, std::fabs(kernels::dot(diff, hp.normal)));
    }

    // ||F_upper D^-1||_inf
    double gain = 0.0;
    for (std::size_t r = 0; r < F_upper.rows(); ++r) {
        double row_sum = 0.0;
        for (std::size_t l = 0; l < n; ++l) row_sum += std::fabs(F_upper(r, l) / s.diag[l]);
        gain = std::fmax(gain, row_sum);
    }

    const double nd = static_cast<double>(n);
    return delta / nn * kink + eps * gain + nd * eps1 * kernels::inf_norm(x) + nd * eps * eps1 +
           eps1;
}

}  // namespace empcq
