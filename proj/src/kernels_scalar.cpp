#include "rieszlab/kernels.hpp"

#include <cmath>

namespace rieszlab::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double dot3_scalar(const double* a, const double* b, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i] * w[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

double wpow_int_scalar(const double* f, const double* w, int p, std::size_t n) {
    double acc = 0.0;
    switch (p) {
        case 1:
            for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::fabs(f[i]);
            break;
        case 2:
            for (std::size_t i = 0; i < n; ++i) acc += w[i] * f[i] * f[i];
            break;
        case 3:
            for (std::size_t i = 0; i < n; ++i) acc += w[i] * f[i] * f[i] * std::fabs(f[i]);
            break;
        case 4:
            for (std::size_t i = 0; i < n; ++i) {
                const double s = f[i] * f[i];
                acc += w[i] * s * s;
            }
            break;
        default:
            for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::pow(std::fabs(f[i]), p);
            break;
    }
    return acc;
}

} // namespace

const Backend& scalar_backend() {
    static const Backend backend{"scalar", dot_scalar, dot3_scalar, axpy_scalar,
                                 mul_scalar, wpow_int_scalar};
    return backend;
}

} // namespace rieszlab::kernels
