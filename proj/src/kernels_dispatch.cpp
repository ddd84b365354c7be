#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace empcq::kernels {
namespace {

const Backend* g_active = nullptr;

const Backend* pick_default() {
    if (const char* env = std::getenv("EMPCQ_KERNELS")) {
        const std::string_view want(env);
        for (const Backend* b : available_backends())
            if (want == b->name) return b;
    }
#if defined(EMPCQ_HAVE_AVX2)
    if (const Backend* b = avx2_backend_if_supported()) return b;
#endif
    return scalar_backend();
}

}  // namespace

std::vector<const Backend*> available_backends() {
    std::vector<const Backend*> out;
    out.push_back(scalar_backend());
#if defined(EMPCQ_HAVE_AVX2)
    if (const Backend* b = avx2_backend_if_supported()) out.push_back(b);
#endif
    return out;
}

const Backend& active() {
    if (!g_active) g_active = pick_default();
    return *g_active;
}

bool force_backend(std::string_view name) {
    for (const Backend* b : available_backends()) {
        if (name == b->name) {
            g_active = b;
            return true;
        }
    }
    return false;
}

}  // namespace empcq::kernels
