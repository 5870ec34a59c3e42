#pragma once

#include <cstddef>
#include <string_view>

namespace rieszlab::kernels {

// Vertex-space inner loops behind the spectral calculus and norm code.
// Scalar implementations are the reference; the AVX2 variants are selected
// at runtime when the CPU supports them and are equivalence-tested against
// the scalar ones. Every variant uses a fixed reduction order, so a given
// backend is bit-reproducible run to run.

struct Backend {
    const char* name;
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i a[i] * b[i] * w[i]
    double (*dot3)(const double* a, const double* b, const double* w, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out[i] = a[i] * b[i]
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    // sum_i w[i] * |f[i]|^p for integer p >= 1
    double (*wpow_int)(const double* f, const double* w, int p, std::size_t n);
};

const Backend& scalar_backend();

/// Null when the build or the CPU lacks AVX2.
const Backend* avx2_backend();

/// Active backend: AVX2 when available unless overridden by
/// force_backend() or the RIESZLAB_KERNELS environment variable
/// ("scalar", "avx2", "auto").
const Backend& active();

/// Override selection; throws std::invalid_argument for unknown names or
/// when "avx2" is requested on a machine without it.
void force_backend(std::string_view name);

inline double dot(const double* a, const double* b, std::size_t n) {
    return active().dot(a, b, n);
}
inline double dot3(const double* a, const double* b, const double* w, std::size_t n) {
    return active().dot3(a, b, w, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}
inline void mul(const double* a, const double* b, double* out, std::size_t n) {
    active().mul(a, b, out, n);
}
inline double wpow_int(const double* f, const double* w, int p, std::size_t n) {
    return active().wpow_int(f, w, p, n);
}

} // namespace rieszlab::kernels
