#include "stim/nn.hpp"

#include <cmath>

namespace stim {

VarPtr ParamStore::create(const std::string& path, Tensor init) {
    if (params_.count(path))
        throw ConfigError("duplicate parameter path: " + path);
    auto p = leaf(std::move(init));
    params_[path] = p;
    order_.push_back(path);
    return p;
}

VarPtr ParamStore::get(const std::string& path) const {
    auto it = params_.find(path);
    if (it == params_.end())
        throw ConfigError("unknown parameter path: " + path);
    return it->second;
}

bool ParamStore::contains(const std::string& path) const {
    return params_.count(path) != 0;
}

void ParamStore::zero_grads() {
    for (auto& [_, p] : params_) p->zero_grad();
}

std::size_t ParamStore::total_elements() const {
    std::size_t n = 0;
    for (const auto& [_, p] : params_) n += p->value.size();
    return n;
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "softmax") return Activation::Softmax;
    if (name == "identity") return Activation::Identity;
    throw ConfigError("unknown activation: " + name);
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Softmax: return "softmax";
        case Activation::Identity: return "identity";
    }
    return "identity";
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor t = Tensor::zeros({fan_in, fan_out});
    for (double& v : t.data) v = dist(rng);
    return t;
}

namespace {

VarPtr activate(const VarPtr& x, Activation a) {
    switch (a) {
        case Activation::Relu: return ops::relu(x);
        case Activation::Sigmoid: return ops::sigmoid(x);
        case Activation::Softmax: return ops::softmax_rows(x);
        case Activation::Identity: return x;
    }
    return x;
}

}  // namespace

FeedForwardBlock::FeedForwardBlock(ParamStore* store, std::string path,
                                   std::vector<std::size_t> hidden_widths,
                                   std::size_t output_width,
                                   Activation hidden_act, Activation output_act)
    : store_(store),
      path_(std::move(path)),
      hidden_widths_(std::move(hidden_widths)),
      output_width_(output_width),
      hidden_act_(hidden_act),
      output_act_(output_act) {}

void FeedForwardBlock::bind(std::size_t input_width, std::mt19937_64& rng) {
    if (bound_) {
        if (input_width != input_width_)
            throw DimensionError(path_ + ": input width " +
                                 std::to_string(input_width) +
                                 " conflicts with bound width " +
                                 std::to_string(input_width_));
        return;
    }
    input_width_ = input_width;
    std::vector<std::size_t> widths = hidden_widths_;
    widths.push_back(output_width_);
    std::size_t in = input_width;
    for (std::size_t l = 0; l < widths.size(); ++l) {
        const std::string prefix = path_ + "/l" + std::to_string(l);
        weights_.push_back(store_->create(prefix + "/W",
                                          glorot_uniform(in, widths[l], rng)));
        biases_.push_back(store_->create(prefix + "/b",
                                         Tensor::zeros({1, widths[l]})));
        in = widths[l];
    }
    bound_ = true;
}

VarPtr FeedForwardBlock::forward(const VarPtr& x, std::mt19937_64& rng) {
    if (!bound_) bind(x->value.cols(), rng);
    return apply(x);
}

VarPtr FeedForwardBlock::forward(const VarPtr& x) const {
    if (!bound_)
        throw DimensionError(path_ + ": forward before input width binding");
    return apply(x);
}

VarPtr FeedForwardBlock::apply(const VarPtr& x) const {
    if (x->value.cols() != input_width_)
        throw DimensionError(path_ + ": input width " +
                             std::to_string(x->value.cols()) +
                             " != bound width " + std::to_string(input_width_));
    VarPtr h = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        h = ops::add_rowvec(ops::matmul(h, weights_[l]), biases_[l]);
        const bool last = (l + 1 == weights_.size());
        h = activate(h, last ? output_act_ : hidden_act_);
    }
    return h;
}

EmbeddingTable::EmbeddingTable(ParamStore* store, const std::string& path,
                               std::size_t vocab, std::size_t dim,
                               std::mt19937_64& rng)
    : vocab_(vocab), dim_(dim) {
    table_ = store->create(path, glorot_uniform(vocab, dim, rng));
}

std::size_t EmbeddingTable::index_of(std::int64_t id) const {
    if (id < 1 || static_cast<std::size_t>(id) >= vocab_) return 0;  // OOV bucket
    return static_cast<std::size_t>(id);
}

VarPtr EmbeddingTable::lookup(const std::vector<std::int64_t>& ids) const {
    std::vector<std::size_t> idx(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) idx[i] = index_of(ids[i]);
    return ops::gather_rows(table_, idx);
}

VarPtr EmbeddingTable::lookup(const VarPtr&, const std::vector<std::int64_t>& ids) const {
    return lookup(ids);
}

}  // namespace stim
