#pragma once

#include "empcq/kernels.hpp"

namespace empcq::kernels {

const Backend* scalar_backend();

#if defined(EMPCQ_HAVE_AVX2)
// nullptr when the CPU lacks AVX2.
const Backend* avx2_backend_if_supported();
#endif

}  // namespace empcq::kernels
