#include "stim/hmin.hpp"

namespace stim {

void HminConfig::validate() const {
    if (heads < 1) throw ConfigError("hmin: heads must be >= 1");
    if (d_k < 1 || d_q < 1) throw ConfigError("hmin: d_k and d_q must be >= 1");
}

HminUnit::HminUnit(ParamStore* store, const std::string& path, HminConfig config,
                   std::mt19937_64& rng)
    : config_(config) {
    (void)rng;
    config_.validate();
    query_net_ = FeedForwardBlock(store, path + "/dnn_q", config_.hidden, config_.d_k);
    for (std::size_t h = 0; h < config_.heads; ++h)
        head_nets_.emplace_back(store, path + "/dnn_h" + std::to_string(h),
                                config_.hidden, config_.d_k);
}

void HminUnit::bind(std::size_t key_width, std::mt19937_64& rng) {
    query_net_.bind(config_.d_q, rng);
    for (auto& net : head_nets_) net.bind(key_width, rng);
}

HminResult HminUnit::attend(const VarPtr& keys, const VarPtr& query,
                            const VarPtr& mask, const std::vector<bool>& valid,
                            std::size_t batch, std::size_t length) const {
    if (keys->value.rows() != batch * length)
        throw DimensionError("hmin_attend: keys must have B*L rows");
    if (mask->value.rows() != batch || mask->value.cols() != length)
        throw DimensionError("hmin_attend: mask must be [B,L]");

    // Shallow interaction: cosine similarity of the projected query against
    // every key, scaled by the refined mask.
    VarPtr q_hat = ops::l2norm_rows(query_net_.forward(query));
    VarPtr q_tiled = ops::tile_rows(q_hat, length);
    VarPtr k_hat = ops::l2norm_rows(keys);
    VarPtr sims = ops::reshape(ops::rowwise_dot(q_tiled, k_hat), batch, length);
    VarPtr masked = ops::mul(sims, mask);
    VarPtr weights = ops::softmax_rows_masked(masked, valid);

    // Deep interaction: per-head value network, attention pooling, concat.
    std::vector<VarPtr> heads;
    heads.reserve(head_nets_.size());
    for (const auto& net : head_nets_)
        heads.push_back(ops::attention_pool(weights, net.forward(keys)));

    HminResult result;
    result.output = ops::concat_cols(heads);
    result.empty_rows.assign(batch, true);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t l = 0; l < length; ++l)
            if (valid[b * length + l]) {
                result.empty_rows[b] = false;
                break;
            }
    return result;
}

VarPtr spatio_temporal_concat(const std::vector<VarPtr>& outputs) {
    if (outputs.empty())
        throw DimensionError("spatio_temporal_concat: no outputs");
    return ops::concat_cols(outputs);
}

}  // namespace stim
