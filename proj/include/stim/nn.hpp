#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "stim/autograd.hpp"

namespace stim {

// Named, insertion-ordered registry of trainable parameters. Paths are
// slash-separated (e.g. "moe/expert_time/l0/W") and drive the checkpoint
// layout and gradient-check reports.
class ParamStore {
  public:
    VarPtr create(const std::string& path, Tensor init);
    VarPtr get(const std::string& path) const;
    bool contains(const std::string& path) const;
    void zero_grads();

    const std::vector<std::string>& paths() const { return order_; }
    std::size_t total_elements() const;

  private:
    std::map<std::string, VarPtr> params_;
    std::vector<std::string> order_;
};

enum class Activation { Relu, Sigmoid, Softmax, Identity };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

// Fully connected stack. Hidden widths default to {8, 4}; the input width is
// bound on the first forward call and enforced afterwards. Weights use
// uniform(+-sqrt(6/(fan_in+fan_out))) init, biases start at zero.
class FeedForwardBlock {
  public:
    FeedForwardBlock() = default;
    FeedForwardBlock(ParamStore* store, std::string path,
                     std::vector<std::size_t> hidden_widths,
                     std::size_t output_width,
                     Activation hidden_act = Activation::Relu,
                     Activation output_act = Activation::Identity);

    // Creates the parameters for a known input width. Optional; forward()
    // binds lazily if this was never called.
    void bind(std::size_t input_width, std::mt19937_64& rng);

    VarPtr forward(const VarPtr& x, std::mt19937_64& rng);
    VarPtr forward(const VarPtr& x) const;  // requires prior bind()

    bool bound() const { return bound_; }
    std::size_t output_width() const { return output_width_; }

  private:
    VarPtr apply(const VarPtr& x) const;

    ParamStore* store_ = nullptr;
    std::string path_;
    std::vector<std::size_t> hidden_widths_{8, 4};
    std::size_t output_width_ = 1;
    Activation hidden_act_ = Activation::Relu;
    Activation output_act_ = Activation::Identity;
    std::size_t input_width_ = 0;
    bool bound_ = false;
    std::vector<VarPtr> weights_;
    std::vector<VarPtr> biases_;
};

// Id-feature embedding matrix. Row 0 is the out-of-vocabulary bucket; any id
// outside [1, vocab) maps there, so lookup is total.
class EmbeddingTable {
  public:
    EmbeddingTable() = default;
    EmbeddingTable(ParamStore* store, const std::string& path,
                   std::size_t vocab, std::size_t dim, std::mt19937_64& rng);

    std::size_t index_of(std::int64_t id) const;
    VarPtr lookup(const VarPtr& /*unused*/, const std::vector<std::int64_t>& ids) const;
    VarPtr lookup(const std::vector<std::int64_t>& ids) const;

    std::size_t dim() const { return dim_; }
    std::size_t vocab() const { return vocab_; }

  private:
    VarPtr table_;
    std::size_t vocab_ = 0;
    std::size_t dim_ = 0;
};

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng);

}  // namespace stim
