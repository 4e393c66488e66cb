#include "tsr/error.hpp"
#include "tsr/regressor.hpp"

#include <cmath>
#include <string>

namespace tsr::regressor {

namespace {

enum Col : std::size_t { RS = 0, RE = 1, CS = 2, CE = 3 };

void push_sign(KinkTrace* trace, double v) {
    if (trace) trace->push_back(static_cast<std::int8_t>((v > 0.0) - (v < 0.0)));
}

double sign(double v) noexcept { return static_cast<double>((v > 0.0) - (v < 0.0)); }

void check_shape(ConstMatView pred, std::size_t n, const char* what) {
    if (pred.cols != 4) throw LengthMismatch(std::string(what) + ": predictions must have 4 columns");
    if (pred.rows != n) {
        throw LengthMismatch(std::string(what) + ": " + std::to_string(pred.rows) + " predictions for " +
                             std::to_string(n) + " cells");
    }
}

void prepare_grad(Matrix* grad, ConstMatView pred) {
    if (grad && (grad->rows() != pred.rows || grad->cols() != 4)) grad->reset(pred.rows, 4);
}

// max(pred(j, end) - pred(i, start) + 1, 0) summed over pairs.
double hinge_sum(ConstMatView pred, std::span<const IndexPair> pairs, std::size_t start, std::size_t end,
                 Matrix* grad, KinkTrace* trace) {
    double total = 0.0;
    for (const IndexPair& p : pairs) {
        const double arg = pred(p.j, end) - pred(p.i, start) + 1.0;
        push_sign(trace, arg);
        if (arg <= 0.0) continue;
        total += arg;
        if (grad) {
            (*grad)(p.j, end) += 1.0;
            (*grad)(p.i, start) -= 1.0;
        }
    }
    return total;
}

} // namespace

double loss_inter(ConstMatView pred, std::span<const IndexPair> horizontal, std::span<const IndexPair> vertical,
                  Matrix* grad, KinkTrace* trace) {
    if (pred.cols != 4) throw LengthMismatch("loss_inter: predictions must have 4 columns");
    for (auto pairs : {horizontal, vertical}) {
        for (const IndexPair& p : pairs) {
            if (p.i >= pred.rows || p.j >= pred.rows) {
                throw IndexError("loss_inter: pair (" + std::to_string(p.i) + ", " + std::to_string(p.j) +
                                 ") out of range for " + std::to_string(pred.rows) + " cells");
            }
        }
    }
    prepare_grad(grad, pred);
    return hinge_sum(pred, horizontal, CS, CE, grad, trace) + hinge_sum(pred, vertical, RS, RE, grad, trace);
}

double loss_intra(ConstMatView pred, std::span<const LogicalLocation> truth, Matrix* grad, KinkTrace* trace) {
    check_shape(pred, truth.size(), "loss_intra");
    prepare_grad(grad, pred);
    double total = 0.0;
    auto term = [&](std::size_t i, std::size_t s, std::size_t e, double target) {
        const double arg = (pred(i, s) - pred(i, e)) - target;
        push_sign(trace, arg);
        total += std::abs(arg);
        if (grad) {
            const double g = sign(arg);
            (*grad)(i, s) += g;
            (*grad)(i, e) -= g;
        }
    };
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const LogicalLocation& l = truth[i];
        if (l.r_e != l.r_s) term(i, RS, RE, static_cast<double>(l.r_s) - static_cast<double>(l.r_e));
        if (l.c_e != l.c_s) term(i, CS, CE, static_cast<double>(l.c_s) - static_cast<double>(l.c_e));
    }
    return total;
}

double loss_l1(ConstMatView pred, std::span<const LogicalLocation> truth, Matrix* grad, KinkTrace* trace) {
    check_shape(pred, truth.size(), "loss_l1");
    if (truth.empty()) return 0.0;
    prepare_grad(grad, pred);
    const double inv_n = 1.0 / static_cast<double>(truth.size());
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const LogicalLocation& l = truth[i];
        const double target[4] = {static_cast<double>(l.r_s), static_cast<double>(l.r_e), static_cast<double>(l.c_s),
                                  static_cast<double>(l.c_e)};
        for (std::size_t k = 0; k < 4; ++k) {
            const double diff = pred(i, k) - target[k];
            push_sign(trace, diff);
            total += std::abs(diff);
            if (grad) (*grad)(i, k) += inv_n * sign(diff);
        }
    }
    return total * inv_n;
}

double loss_log(ConstMatView base, ConstMatView stacked, std::span<const LogicalLocation> truth, Matrix* grad_base,
                Matrix* grad_stacked, KinkTrace* trace) {
    check_shape(base, truth.size(), "loss_log");
    check_shape(stacked, truth.size(), "loss_log");
    return loss_l1(base, truth, grad_base, trace) + loss_l1(stacked, truth, grad_stacked, trace);
}

LossBreakdown total_loss(ConstMatView base, ConstMatView stacked, std::span<const LogicalLocation> truth,
                         std::span<const IndexPair> horizontal, std::span<const IndexPair> vertical, LossFlags flags,
                         Matrix* grad_base, Matrix* grad_stacked, KinkTrace* trace) {
    LossBreakdown out;
    out.log = loss_log(base, stacked, truth, grad_base, grad_stacked, trace);
    out.inter = loss_inter(stacked, horizontal, vertical, flags.inter ? grad_stacked : nullptr, trace);
    out.intra = loss_intra(stacked, truth, flags.intra ? grad_stacked : nullptr, trace);
    out.total = out.log + (flags.inter ? out.inter : 0.0) + (flags.intra ? out.intra : 0.0);
    return out;
}

} // namespace tsr::regressor
