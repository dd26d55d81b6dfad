#pragma once

#include "stim/events.hpp"

namespace stim {

// Length-k target-conditioned compression of a behavior sequence. Valid
// events keep chronological order (oldest first); padding sits at the tail.
struct CompressedSequence {
    std::vector<BehaviorEvent> events;  // size k; padding slots are default events
    std::vector<bool> valid;            // size k
    int k = 0;

    int valid_count() const {
        int n = 0;
        for (bool v : valid) n += v ? 1 : 0;
        return n;
    }
};

// Hard search: keep events whose category matches the target's category, the
// k most recent when more than k match, padded at the tail otherwise.
CompressedSequence gsu_search(const std::vector<BehaviorEvent>& sequence,
                              std::int64_t target_category_id, int k);

}  // namespace stim
