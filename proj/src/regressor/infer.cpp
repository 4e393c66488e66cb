#include "tsr/error.hpp"
#include "tsr/random.hpp"
#include "tsr/regressor.hpp"

#include <algorithm>
#include <cmath>

namespace tsr::regressor {

LogicalLocation round_location(std::span<const double, 4> raw) noexcept {
    auto r = [](double v) {
        const double x = std::max(std::round(v), 0.0);
        return x > 1e9 ? 1000000000 : static_cast<int>(x);
    };
    LogicalLocation l{r(raw[0]), r(raw[1]), r(raw[2]), r(raw[3])};
    l.r_e = std::max(l.r_e, l.r_s);
    l.c_e = std::max(l.c_e, l.c_s);
    return l;
}

InferResult infer(const Model& model, const TableGrid& grid) {
    const Sample s = make_inputs(grid, model.config().d);
    InferResult out;
    out.raw = model.predict(s).stacked;
    out.locations.reserve(out.raw.rows());
    for (std::size_t i = 0; i < out.raw.rows(); ++i) {
        out.locations.push_back(round_location(std::span<const double, 4>(out.raw.row(i).data(), 4)));
    }
    return out;
}

TableGrid infer_grid(const Model& model, const TableGrid& grid) {
    const InferResult r = infer(model, grid);
    TableGrid out = grid;
    for (std::size_t i = 0; i < out.cells.size(); ++i) out.cells[i].logical = r.locations[i];
    return out;
}

double heldout_accuracy(const Model& model, const std::vector<Sample>& samples) {
    std::size_t correct = 0;
    std::size_t total = 0;
    for (const Sample& s : samples) {
        const Matrix pred = model.predict(s).stacked;
        for (std::size_t i = 0; i < s.truth.size(); ++i) {
            const LogicalLocation l = round_location(std::span<const double, 4>(pred.row(i).data(), 4));
            correct += l == s.truth[i] ? 1 : 0;
            ++total;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

GradCheckResult grad_check(Model& model, const Sample& sample, double epsilon, std::size_t n_params,
                           std::uint64_t seed) {
    ParamStore& store = model.params();
    store.zero_grad();
    KinkTrace base_trace;
    model.loss_and_grad(sample, true, &base_trace);
    const std::vector<double> analytic(store.grads().begin(), store.grads().end());

    std::vector<std::size_t> pool(store.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    Rng rng(seed, 0x6C4E);
    const std::size_t n = std::min(n_params, pool.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pool.size() - i) - 1));
        std::swap(pool[i], pool[j]);
    }

    // In the kink-free region the loss is linear in the outputs, so the
    // central difference is taken on the outputs and weighted by the output
    // gradient. This avoids cancelling two large loss totals.
    const Prediction at = model.predict(sample);
    Matrix g_base(at.base.rows(), 4);
    Matrix g_stacked(at.stacked.rows(), 4);
    (void)model.output_loss(sample, at.base, at.stacked, &g_base, &g_stacked);

    GradCheckResult result;
    std::span<double> values = store.values();
    KinkTrace plus_trace;
    KinkTrace minus_trace;
    auto probe = [&](KinkTrace& trace) {
        trace.clear();
        Prediction p = model.predict(sample, &trace);
        (void)model.output_loss(sample, p.base, p.stacked, nullptr, nullptr, &trace);
        return p;
    };
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t p = pool[k];
        const double saved = values[p];
        values[p] = saved + epsilon;
        const Prediction plus = probe(plus_trace);
        values[p] = saved - epsilon;
        const Prediction minus = probe(minus_trace);
        values[p] = saved;
        if (plus_trace != base_trace || minus_trace != base_trace) {
            ++result.excluded;
            continue;
        }
        long double diff = 0.0L;
        for (std::size_t i = 0; i < g_base.size(); ++i) {
            diff += static_cast<long double>(g_base.data()[i]) * (plus.base.data()[i] - minus.base.data()[i]);
            diff += static_cast<long double>(g_stacked.data()[i]) * (plus.stacked.data()[i] - minus.stacked.data()[i]);
        }
        const double numeric = static_cast<double>(diff / (2.0L * epsilon));
        const double a = analytic[p];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
        result.max_rel_error = std::max(result.max_rel_error, rel);
        ++result.checked;
    }
    store.zero_grad();
    return result;
}

} // namespace tsr::regressor
