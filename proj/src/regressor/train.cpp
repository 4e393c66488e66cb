#include "tsr/error.hpp"
#include "tsr/kernels.hpp"
#include "tsr/random.hpp"
#include "tsr/regressor.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace tsr::regressor {

namespace {

class Adam {
public:
    Adam(std::size_t n, const RegressorConfig& c) : m_(n, 0.0), v_(n, 0.0), config_(c) {}

    void step(std::span<double> params, std::span<const double> grads, double lr) {
        ++t_;
        const double b1 = config_.adam_beta1;
        const double b2 = config_.adam_beta2;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = grads[i];
            m_[i] = flush(b1 * m_[i] + (1.0 - b1) * g);
            v_[i] = flush(b2 * v_[i] + (1.0 - b2) * g * g);
            params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.adam_eps);
        }
    }

private:
    // Moments of parameters that stop receiving gradient decay into
    // subnormals, which are very slow on x86.
    static double flush(double x) noexcept { return std::abs(x) < std::numeric_limits<double>::min() ? 0.0 : x; }

    std::vector<double> m_;
    std::vector<double> v_;
    const RegressorConfig& config_;
    long long t_ = 0;
};

void clip(std::span<double> grads, double max_norm) {
    if (max_norm <= 0.0) return;
    const double norm = std::sqrt(kernels::active().dot(grads.data(), grads.data(), grads.size()));
    if (norm <= max_norm) return;
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
}

std::vector<Sample> samples_of(const std::vector<TableGrid>& grids, int d, const char* what) {
    std::vector<Sample> out;
    out.reserve(grids.size());
    for (std::size_t i = 0; i < grids.size(); ++i) {
        try {
            out.push_back(make_sample(grids[i], d));
        } catch (const Error& e) {
            throw InvalidGrid(std::string(what) + " table " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

} // namespace

TrainResult train(const std::vector<TableGrid>& dataset, const std::vector<TableGrid>& heldout,
                  const RegressorConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    if (dataset.empty()) throw EmptyInput("training set is empty");
    const std::vector<Sample> train_set = samples_of(dataset, config.d, "training");
    const std::vector<Sample> held_set = samples_of(heldout, config.d, "held-out");

    TrainResult result{Model(config), {}};
    Model& model = result.model;
    ParamStore& store = model.params();
    Adam adam(store.size(), config);
    Rng order_rng(config.seed, 0x0DE5);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(order_rng.uniform_int(0, static_cast<int>(i) - 1))]);
        }
        const double lr = config.lr_at(epoch);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        for (std::size_t idx : order) {
            store.zero_grad();
            const LossBreakdown loss = model.loss_and_grad(train_set[idx], true);
            if (!std::isfinite(loss.total)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << ", table " << idx << ": log=" << loss.log
                    << " inter=" << loss.inter << " intra=" << loss.intra;
                throw NonFiniteLoss(msg.str());
            }
            clip(store.grads(), config.grad_clip);
            adam.step(store.values(), store.grads(), lr);
            rec.loss_log += loss.log;
            rec.loss_inter += loss.inter;
            rec.loss_intra += loss.intra;
        }
        const auto n = static_cast<double>(train_set.size());
        rec.loss_log /= n;
        rec.loss_inter /= n;
        rec.loss_intra /= n;
        if (!held_set.empty()) rec.heldout_acc_all = heldout_accuracy(model, held_set);
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return result;
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history, const RegressorConfig& config) {
    out << "# config " << config_to_json(config) << '\n';
    out << "epoch,lr,loss_log,loss_inter,loss_intra,heldout_acc_all\n";
    out.precision(17);
    for (const EpochRecord& r : history) {
        out << r.epoch << ',' << r.lr << ',' << r.loss_log << ',' << r.loss_inter << ',' << r.loss_intra << ',';
        if (r.heldout_acc_all) out << *r.heldout_acc_all;
        out << '\n';
    }
}

} // namespace tsr::regressor
