#include "tsr/kernels.hpp"

#include "kernels_impl.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace tsr::kernels {

namespace {

constexpr KernelTable kScalar{"scalar", Backend::Scalar, scalar::dot, scalar::axpy, scalar::gemm_nn, scalar::gemm_nt, scalar::gemm_tn};

#if defined(TSR_HAVE_AVX2)
constexpr KernelTable kAvx2{"avx2", Backend::Avx2, avx2::dot, avx2::axpy, avx2::gemm_nn, avx2::gemm_nt, avx2::gemm_tn};
#endif

bool cpu_has_avx2() noexcept {
#if defined(TSR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_table() noexcept {
    const char* env = std::getenv("TSR_KERNELS");
    if (env && std::string_view(env) == "scalar") return &kScalar;
    if (avx2_supported()) return avx2_table();
    return &kScalar;
}

const KernelTable*& current() noexcept {
    static const KernelTable* table = initial_table();
    return table;
}

} // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if defined(TSR_HAVE_AVX2)
    return &kAvx2;
#else
    return nullptr;
#endif
}

bool avx2_supported() noexcept {
    static const bool ok = avx2_table() != nullptr && cpu_has_avx2();
    return ok;
}

const KernelTable& active() noexcept { return *current(); }

void set_backend(Backend backend) {
    if (backend == Backend::Scalar) {
        current() = &kScalar;
        return;
    }
    if (!avx2_supported()) throw std::runtime_error("AVX2 kernels are not available on this CPU/build");
    current() = avx2_table();
}

const char* backend_name(Backend backend) noexcept { return backend == Backend::Avx2 ? "avx2" : "scalar"; }

} // namespace tsr::kernels
