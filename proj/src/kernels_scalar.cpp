// Scalar reference kernels.
//
// Reductions accumulate in four independent lanes (lane j takes elements
// j, j+4, j+8, ...) and combine as (l0+l1)+(l2+l3). The AVX2 variants keep
// exactly this order, which is what makes the backends bit-identical.

#include <cmath>

#include "kernels_impl.hpp"

namespace empcq::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        l0 += a[i] * b[i];
        l1 += a[i + 1] * b[i + 1];
        l2 += a[i + 2] * b[i + 2];
        l3 += a[i + 3] * b[i + 3];
    }
    double lanes[4] = {l0, l1, l2, l3};
    for (std::size_t j = 0; i < n; ++i, ++j) lanes[j] += a[i] * b[i];
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double one_norm_scalar(const double* v, std::size_t n) {
    double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        l0 += std::fabs(v[i]);
        l1 += std::fabs(v[i + 1]);
        l2 += std::fabs(v[i + 2]);
        l3 += std::fabs(v[i + 3]);
    }
    double lanes[4] = {l0, l1, l2, l3};
    for (std::size_t j = 0; i < n; ++i, ++j) lanes[j] += std::fabs(v[i]);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double inf_norm_scalar(const double* v, std::size_t n) {
    double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        l0 = std::fmax(l0, std::fabs(v[i]));
        l1 = std::fmax(l1, std::fabs(v[i + 1]));
        l2 = std::fmax(l2, std::fabs(v[i + 2]));
        l3 = std::fmax(l3, std::fabs(v[i + 3]));
    }
    double lanes[4] = {l0, l1, l2, l3};
    for (std::size_t j = 0; i < n; ++i, ++j) lanes[j] = std::fmax(lanes[j], std::fabs(v[i]));
    return std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
}

void axpy_scalar(double* y, double s, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += s * x[i];
}

void snap_scalar(double* dst, const double* src, std::size_t n, double scale, double inv_scale) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = std::nearbyint(src[i] * scale) * inv_scale;
}

void min_max_scalar(const double* v, std::size_t n, double* mn, double* mx) {
    if (n == 0) {
        *mn = 0.0;
        *mx = 0.0;
        return;
    }
    double lo[4] = {v[0], v[0], v[0], v[0]};
    double hi[4] = {v[0], v[0], v[0], v[0]};
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        for (std::size_t j = 0; j < 4; ++j) {
            lo[j] = std::fmin(lo[j], v[i + j]);
            hi[j] = std::fmax(hi[j], v[i + j]);
        }
    }
    for (std::size_t j = 0; i < n; ++i, ++j) {
        lo[j] = std::fmin(lo[j], v[i]);
        hi[j] = std::fmax(hi[j], v[i]);
    }
    *mn = std::fmin(std::fmin(lo[0], lo[1]), std::fmin(lo[2], lo[3]));
    *mx = std::fmax(std::fmax(hi[0], hi[1]), std::fmax(hi[2], hi[3]));
}

void matvec_cols_scalar(const double* cols, const double* x, std::size_t n, std::size_t nrows,
                        double* out) {
    for (std::size_t r = 0; r < nrows; ++r) out[r] = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        const double s = x[l];
        const double* col = cols + l * nrows;
        for (std::size_t r = 0; r < nrows; ++r) out[r] += s * col[r];
    }
}

const Backend kScalar = {
    "scalar",        dot_scalar,     one_norm_scalar,    inf_norm_scalar,
    axpy_scalar,     snap_scalar,    min_max_scalar,     matvec_cols_scalar,
};

}  // namespace

const Backend* scalar_backend() { return &kScalar; }

}  // namespace empcq::kernels
