#pragma once

#include <map>
#include <string>

#include "stim/nn.hpp"

namespace stim {

enum class OptimizerKind { Sgd, Adam, AdamW };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled for AdamW, L2-coupled for SGD
};

OptimizerKind optimizer_kind_from_string(const std::string& name);

// Applies one update to every parameter in the store using the gradients
// accumulated by the last backward pass. Moments are kept per parameter path.
class Optimizer {
  public:
    explicit Optimizer(OptimizerConfig config) : config_(config) {}

    void step(ParamStore& params);
    const OptimizerConfig& config() const { return config_; }

  private:
    struct Moments {
        Tensor m;
        Tensor v;
        std::size_t t = 0;
    };
    OptimizerConfig config_;
    std::map<std::string, Moments> state_;
};

}  // namespace stim
