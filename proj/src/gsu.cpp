#include "stim/gsu.hpp"

#include "stim/errors.hpp"

namespace stim {

CompressedSequence gsu_search(const std::vector<BehaviorEvent>& sequence,
                              std::int64_t target_category_id, int k) {
    if (k < 1) throw DomainError("gsu_search: k must be >= 1");
    CompressedSequence out;
    out.k = k;
    out.events.resize(static_cast<std::size_t>(k));
    out.valid.assign(static_cast<std::size_t>(k), false);

    std::vector<const BehaviorEvent*> matches;
    for (const BehaviorEvent& e : sequence)
        if (e.category_id == target_category_id) matches.push_back(&e);

    // Keep the k most recent matches; the input is chronological.
    const std::size_t take = std::min(matches.size(), static_cast<std::size_t>(k));
    const std::size_t first = matches.size() - take;
    for (std::size_t i = 0; i < take; ++i) {
        out.events[i] = *matches[first + i];
        out.valid[i] = true;
    }
    return out;
}

}  // namespace stim
