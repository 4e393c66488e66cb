#include "tsr/error.hpp"
#include "tsr/regressor.hpp"

#include <json.hpp>

namespace tsr::regressor {

double RegressorConfig::lr_at(int epoch) const noexcept {
    double rate = lr;
    for (double f : decay_at) {
        if (static_cast<double>(epoch) >= f * static_cast<double>(epochs)) rate *= decay_factor;
    }
    return rate;
}

void RegressorConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); };
    if (d <= 0) fail("d", "must be positive");
    if (heads <= 0) fail("heads", "must be positive");
    if (d % heads != 0) fail("heads", "must divide d");
    if (d % 4 != 0) fail("d", "must be a multiple of 4");
    if (layers_base < 1) fail("layers_base", "must be at least 1");
    if (layers_stack < 1) fail("layers_stack", "must be at least 1");
    if (ffn < 0) fail("ffn", "must be non-negative");
    if (epochs < 0) fail("epochs", "must be non-negative");
    if (!(lr > 0.0)) fail("lr", "must be positive");
    if (!(decay_factor > 0.0)) fail("decay_factor", "must be positive");
    for (double f : decay_at) {
        if (!(f >= 0.0 && f <= 1.0)) fail("decay_at", "fractions must lie in [0,1]");
    }
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) fail("adam_beta1", "must lie in [0,1)");
    if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) fail("adam_beta2", "must lie in [0,1)");
    if (!(adam_eps > 0.0)) fail("adam_eps", "must be positive");
    if (!(grad_clip >= 0.0)) fail("grad_clip", "must be non-negative");
}

std::string config_to_json(const RegressorConfig& c) {
    const nlohmann::json j = {
        {"d", c.d},
        {"heads", c.heads},
        {"layers_base", c.layers_base},
        {"layers_stack", c.layers_stack},
        {"ffn", c.ffn_width()},
        {"cascade", c.cascade},
        {"epochs", c.epochs},
        {"lr", c.lr},
        {"decay_at", c.decay_at},
        {"decay_factor", c.decay_factor},
        {"adam_beta1", c.adam_beta1},
        {"adam_beta2", c.adam_beta2},
        {"adam_eps", c.adam_eps},
        {"grad_clip", c.grad_clip},
        {"loss_inter", c.loss_flags.inter},
        {"loss_intra", c.loss_flags.intra},
        {"seed", c.seed},
    };
    return j.dump();
}

RegressorConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("regressor config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("regressor config: expected a JSON object");
    RegressorConfig c;
    auto get = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(field);
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(std::string(key) + ": wrong type");
        }
    };
    get("d", c.d);
    get("heads", c.heads);
    get("layers_base", c.layers_base);
    get("layers_stack", c.layers_stack);
    get("ffn", c.ffn);
    get("cascade", c.cascade);
    get("epochs", c.epochs);
    get("lr", c.lr);
    get("decay_at", c.decay_at);
    get("decay_factor", c.decay_factor);
    get("adam_beta1", c.adam_beta1);
    get("adam_beta2", c.adam_beta2);
    get("adam_eps", c.adam_eps);
    get("grad_clip", c.grad_clip);
    get("loss_inter", c.loss_flags.inter);
    get("loss_intra", c.loss_flags.intra);
    get("seed", c.seed);
    c.validate();
    return c;
}

} // namespace tsr::regressor
