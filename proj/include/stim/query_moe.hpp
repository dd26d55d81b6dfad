#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "stim/nn.hpp"

namespace stim {

// The four weighted parts the pairwise queries are built from.
enum class MoePart { Hour, Week, Loc, Item };
MoePart moe_part_from_string(const std::string& name);
std::string to_string(MoePart p);

struct MoEConfig {
    double alpha_holiday = 0.5;
    std::size_t d_q = 8;
    std::vector<std::size_t> expert_hidden{8, 4};
    // Exactly four unordered pairs; defaults cover the temporal-item /
    // spatial-item couplings plus hour-loc.
    std::vector<std::pair<MoePart, MoePart>> pairs{
        {MoePart::Hour, MoePart::Item},
        {MoePart::Week, MoePart::Item},
        {MoePart::Loc, MoePart::Item},
        {MoePart::Hour, MoePart::Loc}};

    void validate() const;  // throws ConfigError
};

struct QueryBundle {
    std::vector<VarPtr> queries;  // Q1..Q5 (or fewer under ablation)
    // Weighted parts, kept for the holiday-identity check and ablations.
    std::array<VarPtr, 4> parts{};  // indexed by MoePart
    VarPtr h_week;                  // raw week expert output
};

// Dense gated mixture of experts over the request context. Three base
// experts read the full context; hour/week sub-experts refine the time
// expert; four sigmoid gates (one scalar each, broadcast) read their own
// context slice. The week gate gets +alpha_holiday on holidays.
class QueryMoe {
  public:
    QueryMoe() = default;
    QueryMoe(ParamStore* store, const std::string& path, MoEConfig config,
             std::mt19937_64& rng);

    void bind(std::size_t x_width, std::size_t hour_width,
              std::size_t week_width, std::size_t loc_width,
              std::size_t item_width, std::mt19937_64& rng);

    // x is the full context [B, d_x]; the slices are its disjoint sub-views;
    // holiday is the 0/1 indicator per row.
    QueryBundle forward(const VarPtr& x, const VarPtr& x_hour,
                        const VarPtr& x_week, const VarPtr& x_loc,
                        const VarPtr& x_item,
                        const std::vector<double>& holiday) const;

    const MoEConfig& config() const { return config_; }

  private:
    MoEConfig config_;
    FeedForwardBlock expert_time_, expert_loc_, expert_item_;
    FeedForwardBlock expert_hour_, expert_week_;
    FeedForwardBlock gate_hour_, gate_week_, gate_loc_, gate_item_;
};

// Each output is the sum of its pair's two weighted parts.
std::vector<VarPtr> pairwise_queries(
    const std::array<VarPtr, 4>& parts,
    const std::vector<std::pair<MoePart, MoePart>>& pairs);

}  // namespace stim
