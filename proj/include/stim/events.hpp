#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stim {

// One user action. weekday is 0 = Monday .. 6 = Sunday.
struct BehaviorEvent {
    std::int64_t item_id = 0;
    std::int64_t category_id = 0;
    std::int64_t shop_id = 0;
    std::int64_t timestamp = 0;
    int hour_of_day = 0;
    int weekday = 0;
    std::string geohash6;
    std::optional<double> price;
};

struct BehaviorSequence {
    std::vector<BehaviorEvent> events;  // chronological, oldest first
};

// The query moment plus the target item.
struct RequestContext {
    std::int64_t timestamp = 0;
    int hour_of_day = 0;
    int weekday = 0;
    std::string geohash6;
    int is_holiday = 0;
    std::int64_t item_id = 0;
    std::int64_t category_id = 0;
    std::int64_t shop_id = 0;
};

// One training/eval sample.
struct Row {
    std::int64_t user_id = 0;
    BehaviorSequence sequence;
    RequestContext request;
    double label_ctr = 0.0;
    double label_ctcvr = 0.0;
};

}  // namespace stim
