#pragma once

#include "json.hpp"

#include "stim/checkpoint.hpp"
#include "stim/forgetting.hpp"
#include "stim/hmin.hpp"
#include "stim/optimizer.hpp"
#include "stim/query_moe.hpp"

namespace stim {

enum class Task { Ctr, Ctcvr, Both };
Task task_from_string(const std::string& name);
std::string to_string(Task t);

// Query-MoE ablations: M1 concat-projection query, M2 weighted expert sum
// (no holiday), M3 adds the holiday factor, M4 adds the pairwise queries.
enum class MoeVariant { M1, M2, M3, M4 };
MoeVariant moe_variant_from_string(const std::string& name);
std::string to_string(MoeVariant v);

struct ModelConfig {
    std::uint64_t seed = 0;
    int k = 64;
    std::size_t embedding_dim = 8;
    std::size_t vocab_items = 1000;
    std::size_t vocab_categories = 100;
    std::size_t vocab_shops = 200;
    Task task = Task::Ctr;
    MaskParams masks;
    MaskVariant ablation_n = MaskVariant::N4;
    MoeVariant ablation_m = MoeVariant::M4;
    MoEConfig moe;
    HminConfig hmin;
    std::vector<std::size_t> head_hidden{64, 32};
    bool gsu_only = false;  // GSU-compression-only baseline (mean pooling)

    void validate() const;
    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
    // Stable hash of the canonical config JSON.
    std::string fingerprint() const;
};

// End-to-end STIM: embeddings -> GSU -> forgetting masks -> Query MoE ->
// HMIN -> prediction head(s).
class StimModel {
  public:
    explicit StimModel(ModelConfig config);

    struct Output {
        VarPtr yhat_ctr;             // null unless task includes CTR
        VarPtr yhat_ctcvr;           // null unless task includes CTCVR
        std::vector<std::size_t> empty_rows;  // all-padding after GSU
    };

    Output forward(const std::vector<const Row*>& batch);
    VarPtr loss(const Output& out, const std::vector<const Row*>& batch) const;

    // One optimizer step; returns the batch loss. Throws TrainingError with a
    // row diagnostic when the loss goes non-finite.
    double train_step(const std::vector<const Row*>& batch, Optimizer& optimizer);

    // Forward-only scores for a task ("ctr" or "ctcvr").
    std::vector<double> predict(const std::vector<const Row*>& batch, Task task);

    const ModelConfig& config() const { return config_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    void save(const std::string& path) const;
    static StimModel load(const std::string& path);

  private:
    VarPtr features(const std::vector<const Row*>& batch,
                    std::vector<std::size_t>* empty_rows);

    ModelConfig config_;
    ParamStore params_;

    EmbeddingTable emb_item_, emb_category_, emb_shop_;
    EmbeddingTable emb_hour_, emb_weekday_, emb_geo_group_, emb_holiday_;
    FeedForwardBlock key_proj_;
    FeedForwardBlock refiner_;      // single layer, 3 -> 3, sigmoid
    FeedForwardBlock m1_query_;     // M1 concat-projection query
    QueryMoe moe_;
    HminUnit hmin_;
    FeedForwardBlock head_ctr_;
    FeedForwardBlock head_ctcvr_;
};

}  // namespace stim
