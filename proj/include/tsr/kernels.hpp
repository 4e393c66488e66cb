#pragma once

#include <cstddef>

// Dense double-precision kernels behind the regressor. Every kernel has a
// portable scalar reference and, on x86-64, an AVX2+FMA variant compiled in
// its own translation unit and selected at runtime from CPUID.
//
// All matrices are row-major and densely packed. `accumulate` adds into C
// instead of overwriting it.

namespace tsr::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
    const char* name;
    Backend backend;

    double (*dot)(const double* a, const double* b, std::size_t n);
    /// y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    /// C[m x n] = A[m x k] * B[k x n]
    void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c, bool accumulate);
    /// C[m x n] = A[m x k] * B[n x k]^T
    void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c, bool accumulate);
    /// C[m x n] = A[k x m]^T * B[k x n]
    void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c, bool accumulate);
};

[[nodiscard]] const KernelTable& scalar_table() noexcept;

/// nullptr when the build has no AVX2 translation unit.
[[nodiscard]] const KernelTable* avx2_table() noexcept;

/// True when the AVX2 table exists and the CPU reports AVX2 and FMA.
[[nodiscard]] bool avx2_supported() noexcept;

/// Table used by the regressor. Defaults to the widest supported backend;
/// the TSR_KERNELS environment variable ("scalar" or "avx2") overrides it.
[[nodiscard]] const KernelTable& active() noexcept;

/// Throws std::runtime_error when the backend is unavailable on this CPU.
void set_backend(Backend backend);

[[nodiscard]] const char* backend_name(Backend backend) noexcept;

} // namespace tsr::kernels
