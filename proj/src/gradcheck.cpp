#include "stim/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace stim {

GradCheckReport grad_check(const std::function<VarPtr()>& loss_fn,
                           ParamStore& params, double epsilon) {
    params.zero_grads();
    VarPtr loss = loss_fn();
    backward(loss);

    // Snapshot analytic gradients before the finite-difference passes.
    std::vector<Tensor> analytic;
    for (const std::string& path : params.paths())
        analytic.push_back(params.get(path)->grad);

    GradCheckReport report;
    std::size_t pi = 0;
    for (const std::string& path : params.paths()) {
        VarPtr p = params.get(path);
        GradCheckEntry entry{path, 0.0};
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double orig = p->value.data[i];
            p->value.data[i] = orig + epsilon;
            const double up = loss_fn()->value.data[0];
            p->value.data[i] = orig - epsilon;
            const double down = loss_fn()->value.data[0];
            p->value.data[i] = orig;
            const double fd = (up - down) / (2.0 * epsilon);
            const double an = analytic[pi].data[i];
            const double denom = std::max({std::abs(an), std::abs(fd), 1.0});
            entry.max_rel_err = std::max(entry.max_rel_err,
                                         std::abs(an - fd) / denom);
        }
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.entries.push_back(std::move(entry));
        ++pi;
    }
    return report;
}

void jitter_params(ParamStore& params, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (const std::string& path : params.paths()) {
        VarPtr p = params.get(path);
        for (double& v : p->value.data) v += dist(rng);
    }
}

}  // namespace stim
