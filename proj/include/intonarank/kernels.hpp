#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace intonarank::kernels {

// One backend = one implementation of the arithmetic inner loops everything
// else is built on. All kernels operate on contiguous doubles.
struct Backend {
    const char* name;
    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i a[i]^2
    double (*sumsq)(const double* a, std::size_t n);
    // sum_i (a[i]-b[i])^2
    double (*sumsqdiff)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const Backend& scalar_backend();
#if defined(INTONARANK_HAVE_AVX2)
const Backend& avx2_backend();
#endif
#if defined(INTONARANK_HAVE_NEON)
const Backend& neon_backend();
#endif

// All backends compiled into this binary, scalar first.
std::vector<const Backend*> available_backends();

// nullptr when the name is unknown or the backend is unavailable here.
const Backend* backend_by_name(std::string_view name);

// Backend picked once at first use: the best ISA the CPU supports, or the
// one named in INTONARANK_KERNELS (scalar|avx2|neon).
const Backend& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().dot(a.data(), b.data(), a.size());
}

inline double sumsq(std::span<const double> a) {
    return active().sumsq(a.data(), a.size());
}

inline double sumsqdiff(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().sumsqdiff(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace intonarank::kernels
