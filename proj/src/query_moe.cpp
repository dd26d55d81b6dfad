#include "stim/query_moe.hpp"

#include <algorithm>
#include <set>

namespace stim {

MoePart moe_part_from_string(const std::string& name) {
    if (name == "hour") return MoePart::Hour;
    if (name == "week") return MoePart::Week;
    if (name == "loc") return MoePart::Loc;
    if (name == "item") return MoePart::Item;
    throw ConfigError("unknown MoE part: " + name);
}

std::string to_string(MoePart p) {
    switch (p) {
        case MoePart::Hour: return "hour";
        case MoePart::Week: return "week";
        case MoePart::Loc: return "loc";
        case MoePart::Item: return "item";
    }
    return "?";
}

void MoEConfig::validate() const {
    if (alpha_holiday < 0.0) throw ConfigError("moe: alpha_holiday must be >= 0");
    if (d_q < 1) throw ConfigError("moe: d_q must be >= 1");
    if (pairs.size() != 4) throw ConfigError("moe: pair set must have exactly 4 entries");
    std::set<std::pair<int, int>> seen;
    for (const auto& [a, b] : pairs) {
        if (a == b) throw ConfigError("moe: pair must combine two distinct parts");
        const std::pair<int, int> key = std::minmax(static_cast<int>(a),
                                                    static_cast<int>(b));
        if (!seen.insert(key).second)
            throw ConfigError("moe: duplicate pair " + to_string(a) + "-" + to_string(b));
    }
}

QueryMoe::QueryMoe(ParamStore* store, const std::string& path, MoEConfig config,
                   std::mt19937_64& rng)
    : config_(std::move(config)) {
    (void)rng;
    config_.validate();
    const auto& h = config_.expert_hidden;
    const std::size_t dq = config_.d_q;
    expert_time_ = FeedForwardBlock(store, path + "/expert_time", h, dq);
    expert_loc_ = FeedForwardBlock(store, path + "/expert_loc", h, dq);
    expert_item_ = FeedForwardBlock(store, path + "/expert_item", h, dq);
    expert_hour_ = FeedForwardBlock(store, path + "/expert_hour", h, dq);
    expert_week_ = FeedForwardBlock(store, path + "/expert_week", h, dq);
    gate_hour_ = FeedForwardBlock(store, path + "/gate_hour", h, 1,
                                  Activation::Relu, Activation::Sigmoid);
    gate_week_ = FeedForwardBlock(store, path + "/gate_week", h, 1,
                                  Activation::Relu, Activation::Sigmoid);
    gate_loc_ = FeedForwardBlock(store, path + "/gate_loc", h, 1,
                                 Activation::Relu, Activation::Sigmoid);
    gate_item_ = FeedForwardBlock(store, path + "/gate_item", h, 1,
                                  Activation::Relu, Activation::Sigmoid);
}

void QueryMoe::bind(std::size_t x_width, std::size_t hour_width,
                    std::size_t week_width, std::size_t loc_width,
                    std::size_t item_width, std::mt19937_64& rng) {
    expert_time_.bind(x_width, rng);
    expert_loc_.bind(x_width, rng);
    expert_item_.bind(x_width, rng);
    expert_hour_.bind(config_.d_q, rng);
    expert_week_.bind(config_.d_q, rng);
    gate_hour_.bind(hour_width, rng);
    gate_week_.bind(week_width, rng);
    gate_loc_.bind(loc_width, rng);
    gate_item_.bind(item_width, rng);
}

QueryBundle QueryMoe::forward(const VarPtr& x, const VarPtr& x_hour,
                              const VarPtr& x_week, const VarPtr& x_loc,
                              const VarPtr& x_item,
                              const std::vector<double>& holiday) const {
    const std::size_t B = x->value.rows();
    if (holiday.size() != B)
        throw DimensionError("moe_forward: holiday flag count mismatch");

    VarPtr h_time = expert_time_.forward(x);
    VarPtr h_loc = expert_loc_.forward(x);
    VarPtr h_item = expert_item_.forward(x);
    VarPtr h_hour = expert_hour_.forward(h_time);
    VarPtr h_week = expert_week_.forward(h_time);

    VarPtr w_hour = gate_hour_.forward(x_hour);
    VarPtr w_week = gate_week_.forward(x_week);
    VarPtr w_loc = gate_loc_.forward(x_loc);
    VarPtr w_item = gate_item_.forward(x_item);

    // Holiday enhancement on the week gate (Eq.-10 pathway).
    Tensor boost = Tensor::zeros({B, 1});
    for (std::size_t i = 0; i < B; ++i)
        boost.at(i, 0) = config_.alpha_holiday * holiday[i];
    VarPtr w_week_enh = ops::add_const(w_week, std::move(boost));

    QueryBundle out;
    out.h_week = h_week;
    out.parts[static_cast<std::size_t>(MoePart::Hour)] = ops::scale_rows(h_hour, w_hour);
    out.parts[static_cast<std::size_t>(MoePart::Week)] = ops::scale_rows(h_week, w_week_enh);
    out.parts[static_cast<std::size_t>(MoePart::Loc)] = ops::scale_rows(h_loc, w_loc);
    out.parts[static_cast<std::size_t>(MoePart::Item)] = ops::scale_rows(h_item, w_item);

    VarPtr q1 = ops::add(
        ops::add(out.parts[static_cast<std::size_t>(MoePart::Hour)],
                 out.parts[static_cast<std::size_t>(MoePart::Week)]),
        ops::add(out.parts[static_cast<std::size_t>(MoePart::Loc)],
                 out.parts[static_cast<std::size_t>(MoePart::Item)]));
    out.queries.push_back(q1);
    for (VarPtr& q : pairwise_queries(out.parts, config_.pairs))
        out.queries.push_back(std::move(q));
    return out;
}

std::vector<VarPtr> pairwise_queries(
    const std::array<VarPtr, 4>& parts,
    const std::vector<std::pair<MoePart, MoePart>>& pairs) {
    std::set<std::pair<int, int>> seen;
    std::vector<VarPtr> out;
    for (const auto& [a, b] : pairs) {
        const std::pair<int, int> key = std::minmax(static_cast<int>(a),
                                                    static_cast<int>(b));
        if (!seen.insert(key).second)
            throw ConfigError("pairwise_queries: duplicate pair");
        out.push_back(ops::add(parts[static_cast<std::size_t>(a)],
                               parts[static_cast<std::size_t>(b)]));
    }
    return out;
}

}  // namespace stim
