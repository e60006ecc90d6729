#include "intonarank/kernels.hpp"

#include <cstdlib>
#include <string>

namespace intonarank::kernels {

std::vector<const Backend*> available_backends() {
    std::vector<const Backend*> out{&scalar_backend()};
#if defined(INTONARANK_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        out.push_back(&avx2_backend());
    }
#endif
#if defined(INTONARANK_HAVE_NEON)
    out.push_back(&neon_backend());
#endif
    return out;
}

const Backend* backend_by_name(std::string_view name) {
    for (const Backend* b : available_backends()) {
        if (name == b->name) return b;
    }
    return nullptr;
}

namespace {

const Backend& pick_active() {
    if (const char* env = std::getenv("INTONARANK_KERNELS")) {
        if (const Backend* b = backend_by_name(env)) return *b;
        // Unknown or unavailable name falls through to auto-detection.
    }
    const auto backends = available_backends();
    return *backends.back();
}

}  // namespace

const Backend& active() {
    static const Backend& backend = pick_active();
    return backend;
}

}  // namespace intonarank::kernels
