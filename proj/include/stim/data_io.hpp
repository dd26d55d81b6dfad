#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "stim/context.hpp"
#include "stim/events.hpp"

namespace stim {

// Column-name mapping for the tabular (Ele.me-style) schema. List columns
// must be length-aligned per row.
struct DatasetSchema {
    std::string user = "user_id";
    std::string item = "item_id";
    std::string category = "category_1_id";
    std::string shop = "shop_id";
    std::string req_time = "times";
    std::string req_hour = "hours";
    std::string req_weekday = "weekdays";
    std::string req_geo = "geohash6";       // falls back to geohash12, truncated
    std::string item_list = "item_id_list";
    std::string cat_list = "category_1_id_list";
    std::string shop_list = "shop_id_list";
    std::string geo_list = "shop_geohash6_list";
    std::string timediff_list = "timediff_list";
    std::string hours_list = "hours_list";
    std::string weekdays_list = "weekdays_list";
    std::string price_list = "price_list";
    std::string label_ctr = "click";
    std::string label_ctcvr = "conversion";
    char list_delimiter = ';';
};

struct LoadReport {
    std::size_t rows_ok = 0;
    std::size_t rows_rejected = 0;
    std::vector<std::string> errors;  // "<line>: <message>"
};

// Streaming CSV load. Malformed rows are collected in the report (with line
// numbers) rather than aborting, up to `max_errors`; beyond that the load
// fails with DataError. A calendar, when given, sets the request holiday flag.
std::vector<Row> load_csv(const std::string& path, const DatasetSchema& schema,
                          const HolidayCalendar* calendar = nullptr,
                          LoadReport* report = nullptr,
                          std::size_t max_errors = 100);

// JSONL alternative: one request per line with native arrays.
std::vector<Row> load_jsonl(const std::string& path,
                            const HolidayCalendar* calendar = nullptr,
                            LoadReport* report = nullptr,
                            std::size_t max_errors = 100);

void write_csv(const std::string& path, const std::vector<Row>& rows,
               const DatasetSchema& schema = {});
void write_jsonl(const std::string& path, const std::vector<Row>& rows);

nlohmann::json row_to_json(const Row& row);
Row row_from_json(const nlohmann::json& j);

// Train rows have request timestamps <= boundary (inclusive tie rule); test
// rows fall in (boundary, boundary + 1 day].
std::pair<std::vector<Row>, std::vector<Row>> time_split(
    const std::vector<Row>& rows, std::int64_t boundary);

// Synthetic dataset with planted spatiotemporal periodicity. Every user has
// a preferred category / hour group / geo group; the click label is positive
// with probability p_signal when the target category and request hour group
// both match the user's preference, 1 - p_signal otherwise. Histories visit
// the preferred groups periodically so review points exist at request time.
struct SyntheticSpec {
    int n_users = 200;
    int n_items = 500;
    int n_categories = 20;
    int n_shops = 100;
    int min_len = 8;
    int max_len = 60;
    int rows = 1000;
    double p_signal = 0.9;        // must be in (0.5, 1]
    double noise_rate = 0.15;     // off-preference history events
    double p_conversion = 0.5;    // conversion probability given click
    double drift_rate = 0.0;      // share of users whose hour preference drifted
    int days = 8;                 // request timestamps span this many days

    void validate() const;
    double design_positive_rate() const;
    nlohmann::json to_json() const;
    static SyntheticSpec from_json(const nlohmann::json& j);
    static SyntheticSpec load(const std::string& path);
};

// Deterministic given (spec, seed). Rows come out ordered by request time.
std::vector<Row> generate_synthetic(const SyntheticSpec& spec,
                                    std::uint64_t seed);

// Boundary timestamp that puts the last day of a generated dataset in test.
std::int64_t synthetic_split_boundary(const SyntheticSpec& spec);

}  // namespace stim
