// Compiled with -mavx2 -mfma; only reached through the runtime dispatcher
// after CPUID confirms support.

#include "kernels_impl.hpp"

#include <immintrin.h>

#include <algorithm>

namespace tsr::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// c_row[j..] (+)= sum_p a(p) * b_row(p)[j..] for one output row, with A
// accessed through a stride so the same loop serves A and A^T.
inline void row_update(std::size_t n, std::size_t k, const double* a, std::size_t a_stride, const double* b,
                       std::size_t b_stride, double* c, bool accumulate) {
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
        __m256d c0 = accumulate ? _mm256_loadu_pd(c + j) : _mm256_setzero_pd();
        __m256d c1 = accumulate ? _mm256_loadu_pd(c + j + 4) : _mm256_setzero_pd();
        __m256d c2 = accumulate ? _mm256_loadu_pd(c + j + 8) : _mm256_setzero_pd();
        __m256d c3 = accumulate ? _mm256_loadu_pd(c + j + 12) : _mm256_setzero_pd();
        for (std::size_t p = 0; p < k; ++p) {
            const __m256d av = _mm256_broadcast_sd(a + p * a_stride);
            const double* bp = b + p * b_stride + j;
            c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp), c0);
            c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 4), c1);
            c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 8), c2);
            c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 12), c3);
        }
        _mm256_storeu_pd(c + j, c0);
        _mm256_storeu_pd(c + j + 4, c1);
        _mm256_storeu_pd(c + j + 8, c2);
        _mm256_storeu_pd(c + j + 12, c3);
    }
    for (; j + 4 <= n; j += 4) {
        __m256d c0 = accumulate ? _mm256_loadu_pd(c + j) : _mm256_setzero_pd();
        for (std::size_t p = 0; p < k; ++p) {
            c0 = _mm256_fmadd_pd(_mm256_broadcast_sd(a + p * a_stride), _mm256_loadu_pd(b + p * b_stride + j), c0);
        }
        _mm256_storeu_pd(c + j, c0);
    }
    for (; j < n; ++j) {
        double s = accumulate ? c[j] : 0.0;
        for (std::size_t p = 0; p < k; ++p) s += a[p * a_stride] * b[p * b_stride + j];
        c[j] = s;
    }
}

} // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
    }
    for (; i + 4 <= n; i += 4) s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) row_update(n, k, a + i * k, 1, b, n, c + i * n, accumulate);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) row_update(n, k, a + i, m, b, n, c + i * n, accumulate);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            const double* b0 = b + j * k;
            const double* b1 = b0 + k;
            const double* b2 = b1 + k;
            const double* b3 = b2 + k;
            __m256d s0 = _mm256_setzero_pd();
            __m256d s1 = _mm256_setzero_pd();
            __m256d s2 = _mm256_setzero_pd();
            __m256d s3 = _mm256_setzero_pd();
            std::size_t p = 0;
            for (; p + 4 <= k; p += 4) {
                const __m256d av = _mm256_loadu_pd(ai + p);
                s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), s0);
                s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), s1);
                s2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), s2);
                s3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), s3);
            }
            double r[4] = {hsum(s0), hsum(s1), hsum(s2), hsum(s3)};
            for (; p < k; ++p) {
                r[0] += ai[p] * b0[p];
                r[1] += ai[p] * b1[p];
                r[2] += ai[p] * b2[p];
                r[3] += ai[p] * b3[p];
            }
            for (int q = 0; q < 4; ++q) ci[j + q] = accumulate ? ci[j + q] + r[q] : r[q];
        }
        for (; j < n; ++j) {
            const double v = dot(ai, b + j * k, k);
            ci[j] = accumulate ? ci[j] + v : v;
        }
    }
}

} // namespace tsr::kernels::avx2
