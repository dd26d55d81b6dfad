#include "stim/optimizer.hpp"

#include <cmath>

namespace stim {

OptimizerKind optimizer_kind_from_string(const std::string& name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "adamw") return OptimizerKind::AdamW;
    throw ConfigError("unknown optimizer: " + name);
}

void Optimizer::step(ParamStore& params) {
    for (const std::string& path : params.paths()) {
        VarPtr p = params.get(path);
        Tensor& w = p->value;
        const Tensor& g = p->grad;
        if (!g.all_finite())
            throw TrainingError("non-finite gradient for parameter " + path);

        if (config_.kind == OptimizerKind::Sgd) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                double grad = g.data[i] + config_.weight_decay * w.data[i];
                w.data[i] -= config_.lr * grad;
            }
            continue;
        }

        Moments& mom = state_[path];
        if (mom.t == 0) {
            mom.m = Tensor::zeros(w.shape);
            mom.v = Tensor::zeros(w.shape);
        }
        mom.t += 1;
        const double b1 = config_.beta1, b2 = config_.beta2;
        const double bc1 = 1.0 - std::pow(b1, static_cast<double>(mom.t));
        const double bc2 = 1.0 - std::pow(b2, static_cast<double>(mom.t));
        for (std::size_t i = 0; i < w.size(); ++i) {
            mom.m.data[i] = b1 * mom.m.data[i] + (1.0 - b1) * g.data[i];
            mom.v.data[i] = b2 * mom.v.data[i] + (1.0 - b2) * g.data[i] * g.data[i];
            const double mhat = mom.m.data[i] / bc1;
            const double vhat = mom.v.data[i] / bc2;
            w.data[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
            if (config_.kind == OptimizerKind::AdamW && config_.weight_decay > 0.0)
                w.data[i] -= config_.lr * config_.weight_decay * w.data[i];
        }
    }
}

}  // namespace stim
