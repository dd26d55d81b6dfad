#pragma once

#include "stim/nn.hpp"

namespace stim {

struct HminConfig {
    std::size_t heads = 2;
    std::size_t d_k = 8;
    std::size_t d_q = 8;
    std::vector<std::size_t> hidden{8, 4};

    void validate() const;  // throws ConfigError
    std::size_t output_dim() const { return heads * d_k; }
};

struct HminResult {
    VarPtr output;                 // [B, H*d_k]
    std::vector<bool> empty_rows;  // rows where every position was padding
};

// Two-stage attention: cosine similarity between the projected/normalized
// query and normalized keys, scaled by the refined mask and softmaxed over
// valid positions, then pooled through one value network per head.
class HminUnit {
  public:
    HminUnit() = default;
    HminUnit(ParamStore* store, const std::string& path, HminConfig config,
             std::mt19937_64& rng);

    void bind(std::size_t key_width, std::mt19937_64& rng);

    // keys: [B*L, d_k]; query: [B, d_q]; mask: [B, L] refined mask values;
    // valid: row-major B*L padding mask. All-padding rows yield zeros.
    HminResult attend(const VarPtr& keys, const VarPtr& query,
                      const VarPtr& mask, const std::vector<bool>& valid,
                      std::size_t batch, std::size_t length) const;

    const HminConfig& config() const { return config_; }

  private:
    HminConfig config_;
    FeedForwardBlock query_net_;
    std::vector<FeedForwardBlock> head_nets_;
};

// Fixed material-major, query-minor concatenation of the 15 (or fewer)
// per-(mask, query) outputs.
VarPtr spatio_temporal_concat(const std::vector<VarPtr>& outputs);

}  // namespace stim
