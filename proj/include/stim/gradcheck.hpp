#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stim/nn.hpp"

namespace stim {

struct GradCheckEntry {
    std::string path;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_err = 0.0;

    bool passes(double tolerance) const { return max_rel_err < tolerance; }
};

// Compares analytic gradients against central finite differences for every
// element of every parameter in the store. `loss_fn` must rebuild the graph
// and return the scalar loss node each time it is called.
GradCheckReport grad_check(const std::function<VarPtr()>& loss_fn,
                           ParamStore& params, double epsilon = 1e-5);

// Adds uniform(+-scale) noise to every parameter. Zero-initialized biases can
// leave relu pre-activations sitting exactly on the kink (e.g. when a whole
// hidden row dies), where finite differences straddle a non-differentiable
// point and disagree with any valid subgradient. Call this before grad_check.
void jitter_params(ParamStore& params, std::mt19937_64& rng,
                   double scale = 0.05);

}  // namespace stim
