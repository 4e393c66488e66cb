#include "tsr/tensor.hpp"

#include "tsr/kernels.hpp"

namespace tsr {

void matmul(ConstMatView a, ConstMatView b, MatView c, bool accumulate) {
    assert(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols);
    kernels::active().gemm_nn(a.rows, b.cols, a.cols, a.data, b.data, c.data, accumulate);
}

void matmul_nt(ConstMatView a, ConstMatView b, MatView c, bool accumulate) {
    assert(a.cols == b.cols && c.rows == a.rows && c.cols == b.rows);
    kernels::active().gemm_nt(a.rows, b.rows, a.cols, a.data, b.data, c.data, accumulate);
}

void matmul_tn(ConstMatView a, ConstMatView b, MatView c, bool accumulate) {
    assert(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols);
    kernels::active().gemm_tn(a.cols, b.cols, a.rows, a.data, b.data, c.data, accumulate);
}

} // namespace tsr
