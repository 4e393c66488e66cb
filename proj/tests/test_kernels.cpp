#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tsr/kernels.hpp"
#include "tsr/random.hpp"
#include "tsr/tensor.hpp"

#include <cmath>
#include <vector>

using namespace tsr::kernels;

namespace {

std::vector<double> random_vec(tsr::Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

// Triple loop straight from the definitions, independent of both tables.
void naive(std::size_t m, std::size_t n, std::size_t k, const std::vector<double>& a, bool ta,
           const std::vector<double>& b, bool tb, std::vector<double>& c) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            long double s = 0.0L;
            for (std::size_t p = 0; p < k; ++p) {
                const double x = ta ? a[p * m + i] : a[i * k + p];
                const double y = tb ? b[j * k + p] : b[p * n + j];
                s += static_cast<long double>(x) * y;
            }
            c[i * n + j] += static_cast<double>(s);
        }
    }
}

double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
    return d;
}

std::vector<const KernelTable*> tables() {
    std::vector<const KernelTable*> out = {&scalar_table()};
    if (avx2_supported()) out.push_back(avx2_table());
    return out;
}

const std::size_t kShapes[][3] = {{1, 1, 1}, {3, 5, 7}, {4, 4, 4}, {17, 33, 9}, {64, 64, 64}, {7, 128, 64},
                                  {50, 4, 64}, {5, 19, 1}, {1, 64, 3}, {31, 2, 130}};

} // namespace

TEST_CASE("every table matches the naive definitions") {
    tsr::Rng rng(1, 1);
    for (const KernelTable* t : tables()) {
        CAPTURE(t->name);
        for (const auto& s : kShapes) {
            const std::size_t m = s[0], n = s[1], k = s[2];
            const auto a = random_vec(rng, m * k);
            const auto b = random_vec(rng, k * n);
            const auto init = random_vec(rng, m * n);
            for (int mode = 0; mode < 3; ++mode) {
                for (bool acc : {false, true}) {
                    std::vector<double> got = init;
                    std::vector<double> want = acc ? init : std::vector<double>(m * n, 0.0);
                    if (mode == 0) {
                        t->gemm_nn(m, n, k, a.data(), b.data(), got.data(), acc);
                        naive(m, n, k, a, false, b, false, want);
                    } else if (mode == 1) {
                        t->gemm_nt(m, n, k, a.data(), b.data(), got.data(), acc);
                        naive(m, n, k, a, false, b, true, want);
                    } else {
                        t->gemm_tn(m, n, k, a.data(), b.data(), got.data(), acc);
                        naive(m, n, k, a, true, b, false, want);
                    }
                    CHECK(max_abs_diff(got, want) < 1e-12 * static_cast<double>(k + 1));
                }
            }
        }
        for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 16u, 63u, 257u}) {
            const auto x = random_vec(rng, n);
            auto y = random_vec(rng, n);
            long double s = 0.0L;
            for (std::size_t i = 0; i < n; ++i) s += static_cast<long double>(x[i]) * y[i];
            CHECK(std::abs(t->dot(x.data(), y.data(), n) - static_cast<double>(s)) < 1e-13 * static_cast<double>(n + 1));
            auto want = y;
            for (std::size_t i = 0; i < n; ++i) want[i] += 0.75 * x[i];
            t->axpy(0.75, x.data(), y.data(), n);
            CHECK(max_abs_diff(y, want) < 1e-15);
        }
    }
}

TEST_CASE("avx2 and scalar variants agree") {
    if (!avx2_supported()) {
        MESSAGE("AVX2 not available on this CPU; equivalence check skipped");
        return;
    }
    const KernelTable& s = scalar_table();
    const KernelTable& v = *avx2_table();
    CHECK(v.backend == Backend::Avx2);
    tsr::Rng rng(2, 2);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = static_cast<std::size_t>(rng.uniform_int(1, 70));
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, 70));
        const auto k = static_cast<std::size_t>(rng.uniform_int(1, 70));
        const auto a = random_vec(rng, m * k);
        const auto b = random_vec(rng, k * n);
        std::vector<double> c1(m * n);
        std::vector<double> c2(m * n);
        s.gemm_nn(m, n, k, a.data(), b.data(), c1.data(), false);
        v.gemm_nn(m, n, k, a.data(), b.data(), c2.data(), false);
        CHECK(max_abs_diff(c1, c2) < 1e-12);
        s.gemm_tn(m, n, k, a.data(), b.data(), c1.data(), false);
        v.gemm_tn(m, n, k, a.data(), b.data(), c2.data(), false);
        CHECK(max_abs_diff(c1, c2) < 1e-12);
        const auto bt = random_vec(rng, n * k);
        s.gemm_nt(m, n, k, a.data(), bt.data(), c1.data(), true);
        v.gemm_nt(m, n, k, a.data(), bt.data(), c2.data(), true);
        CHECK(max_abs_diff(c1, c2) < 1e-12);
    }
}

TEST_CASE("backend selection") {
    const Backend initial = active().backend;
    set_backend(Backend::Scalar);
    CHECK(active().backend == Backend::Scalar);
    if (avx2_supported()) {
        set_backend(Backend::Avx2);
        CHECK(active().backend == Backend::Avx2);
    } else {
        CHECK_THROWS(set_backend(Backend::Avx2));
    }
    set_backend(initial);
    CHECK(std::string(backend_name(Backend::Scalar)) == "scalar");
}

TEST_CASE("matmul wrappers") {
    tsr::Matrix a(2, 3);
    tsr::Matrix b(3, 2);
    for (std::size_t i = 0; i < 6; ++i) {
        a.data()[i] = static_cast<double>(i + 1);
        b.data()[i] = static_cast<double>(6 - i);
    }
    tsr::Matrix c(2, 2);
    tsr::matmul(a, b, c);
    // [1 2 3; 4 5 6] * [6 5; 4 3; 2 1]
    CHECK(c(0, 0) == 20.0);
    CHECK(c(0, 1) == 14.0);
    CHECK(c(1, 0) == 56.0);
    CHECK(c(1, 1) == 41.0);
    tsr::matmul(a, b, c, true);
    CHECK(c(1, 1) == 82.0);
    tsr::Matrix ct(3, 3);
    tsr::matmul_tn(a, a, ct);
    CHECK(ct(0, 0) == 17.0);
    tsr::Matrix cn(2, 2);
    tsr::matmul_nt(a, a, cn);
    CHECK(cn(0, 1) == 32.0);
}
