#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace empcq::kernels {

// Arithmetic inner loops used throughout the library: inner products, norm
// reductions, grid snapping, and column-major constraint evaluation.
//
// Every operation has a scalar reference implementation and, on x86-64, an
// AVX2 variant selected once at startup from CPUID. The two produce
// bit-identical results: the scalar reference accumulates in the same
// four-lane order the vector code uses, and kernel translation units are
// compiled without FP contraction. The active backend can be pinned with
// force_backend() or the EMPCQ_KERNELS environment variable ("scalar",
// "avx2").
struct Backend {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*one_norm)(const double* v, std::size_t n);
    double (*inf_norm)(const double* v, std::size_t n);
    // y[i] += s * x[i]
    void (*axpy)(double* y, double s, const double* x, std::size_t n);
    // dst[i] = rint(src[i] * scale) * inv_scale, round-to-nearest-even
    void (*snap)(double* dst, const double* src, std::size_t n, double scale, double inv_scale);
    void (*min_max)(const double* v, std::size_t n, double* mn, double* mx);
    // out[r] = sum_l x[l] * cols[l*nrows + r]; cols is a column-major block
    void (*matvec_cols)(const double* cols, const double* x, std::size_t n, std::size_t nrows,
                        double* out);
};

const Backend& active();
bool force_backend(std::string_view name);
std::vector<const Backend*> available_backends();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline double one_norm(std::span<const double> v) {
    return active().one_norm(v.data(), v.size());
}

inline double inf_norm(std::span<const double> v) {
    return active().inf_norm(v.data(), v.size());
}

inline void axpy(std::span<double> y, double s, std::span<const double> x) {
    active().axpy(y.data(), s, x.data(), y.size());
}

inline void snap_to_grid(std::span<double> dst, std::span<const double> src, double scale,
                         double inv_scale) {
    active().snap(dst.data(), src.data(), src.size(), scale, inv_scale);
}

inline std::pair<double, double> min_max(std::span<const double> v) {
    double mn = 0.0, mx = 0.0;
    active().min_max(v.data(), v.size(), &mn, &mx);
    return {mn, mx};
}

inline void matvec_colmajor(std::span<const double> cols, std::span<const double> x,
                            std::size_t nrows, std::span<double> out) {
    active().matvec_cols(cols.data(), x.data(), x.size(), nrows, out.data());
}

}  // namespace empcq::kernels
