// AVX2 kernel variants. Mirrors the scalar reference lane-for-lane: vector
// lane j holds exactly the scalar reference's lane-j partial, tails are
// folded into the extracted lanes in the same order, and the cross-lane
// combine uses the same (l0+l1)+(l2+l3) tree. Multiplies and adds stay
// separate (no FMA) so results match the contraction-free scalar build.

#include "kernels_impl.hpp"

#if defined(EMPCQ_HAVE_AVX2) && defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace empcq::kernels {
namespace {

inline __m256d abs_pd(__m256d v) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFll));
    return _mm256_and_pd(v, mask);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (std::size_t j = 0; i < n; ++i, ++j) lanes[j] += a[i] * b[i];
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double one_norm_avx2(const double* v, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) acc = _mm256_add_pd(acc, abs_pd(_mm256_loadu_pd(v + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (std::size_t j = 0; i < n; ++i, ++j) lanes[j] += std::fabs(v[i]);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double inf_norm_avx2(const double* v, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) acc = _mm256_max_pd(acc, abs_pd(_mm256_loadu_pd(v + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (std::size_t j = 0; i < n; ++i, ++j) lanes[j] = std::fmax(lanes[j], std::fabs(v[i]));
    return std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
}

void axpy_avx2(double* y, double s, const double* x, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        const __m256d prod = _mm256_mul_pd(vs, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += s * x[i];
}

void snap_avx2(double* dst, const double* src, std::size_t n, double scale, double inv_scale) {
    const __m256d vscale = _mm256_set1_pd(scale);
    const __m256d vinv = _mm256_set1_pd(inv_scale);
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        __m256d v = _mm256_mul_pd(_mm256_loadu_pd(src + i), vscale);
        v = _mm256_round_pd(v, _MM_FROUND_CUR_DIRECTION | _MM_FROUND_NO_EXC);
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(v, vinv));
    }
    for (; i < n; ++i) dst[i] = std::nearbyint(src[i] * scale) * inv_scale;
}

void min_max_avx2(const double* v, std::size_t n, double* mn, double* mx) {
    if (n == 0) {
        *mn = 0.0;
        *mx = 0.0;
        return;
    }
    __m256d vlo = _mm256_set1_pd(v[0]);
    __m256d vhi = vlo;
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        const __m256d val = _mm256_loadu_pd(v + i);
        vlo = _mm256_min_pd(vlo, val);
        vhi = _mm256_max_pd(vhi, val);
    }
    alignas(32) double lo[4], hi[4];
    _mm256_store_pd(lo, vlo);
    _mm256_store_pd(hi, vhi);
    for (std::size_t j = 0; i < n; ++i, ++j) {
        lo[j] = std::fmin(lo[j], v[i]);
        hi[j] = std::fmax(hi[j], v[i]);
    }
    *mn = std::fmin(std::fmin(lo[0], lo[1]), std::fmin(lo[2], lo[3]));
    *mx = std::fmax(std::fmax(hi[0], hi[1]), std::fmax(hi[2], hi[3]));
}

void matvec_cols_avx2(const double* cols, const double* x, std::size_t n, std::size_t nrows,
                      double* out) {
    for (std::size_t r = 0; r < nrows; ++r) out[r] = 0.0;
    const std::size_t r4 = nrows & ~std::size_t{3};
    for (std::size_t l = 0; l < n; ++l) {
        const __m256d vs = _mm256_set1_pd(x[l]);
        const double* col = cols + l * nrows;
        std::size_t r = 0;
        for (; r < r4; r += 4) {
            const __m256d prod = _mm256_mul_pd(vs, _mm256_loadu_pd(col + r));
            _mm256_storeu_pd(out + r, _mm256_add_pd(_mm256_loadu_pd(out + r), prod));
        }
        for (; r < nrows; ++r) out[r] += x[l] * col[r];
    }
}

const Backend kAvx2 = {
    "avx2",       dot_avx2,     one_norm_avx2,    inf_norm_avx2,
    axpy_avx2,    snap_avx2,    min_max_avx2,     matvec_cols_avx2,
};

}  // namespace

const Backend* avx2_backend_if_supported() {
    return __builtin_cpu_supports("avx2") ? &kAvx2 : nullptr;
}

}  // namespace empcq::kernels

#endif  // EMPCQ_HAVE_AVX2 && __AVX2__
