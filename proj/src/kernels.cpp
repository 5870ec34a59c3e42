#include "rieszlab/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace rieszlab::kernels {

#if defined(RIESZLAB_HAVE_AVX2_SOURCE)
const Backend* avx2_backend_impl();
#endif

const Backend* avx2_backend() {
#if defined(RIESZLAB_HAVE_AVX2_SOURCE) && (defined(__GNUC__) || defined(__clang__))
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return avx2_backend_impl();
    }
#endif
    return nullptr;
}

namespace {

std::atomic<const Backend*> g_active{nullptr};

const Backend* select_default() {
    if (const char* env = std::getenv("RIESZLAB_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return &scalar_backend();
        if (want == "avx2" && avx2_backend() != nullptr) return avx2_backend();
        // "auto" or anything unusable falls through to detection.
    }
    if (const Backend* simd = avx2_backend()) return simd;
    return &scalar_backend();
}

} // namespace

const Backend& active() {
    const Backend* current = g_active.load(std::memory_order_acquire);
    if (current == nullptr) {
        current = select_default();
        g_active.store(current, std::memory_order_release);
    }
    return *current;
}

void force_backend(std::string_view name) {
    if (name == "scalar") {
        g_active.store(&scalar_backend(), std::memory_order_release);
        return;
    }
    if (name == "avx2") {
        const Backend* simd = avx2_backend();
        if (simd == nullptr) throw std::invalid_argument("avx2 kernels unavailable on this machine");
        g_active.store(simd, std::memory_order_release);
        return;
    }
    if (name == "auto") {
        g_active.store(select_default(), std::memory_order_release);
        return;
    }
    throw std::invalid_argument("unknown kernel backend: " + std::string(name));
}

} // namespace rieszlab::kernels
