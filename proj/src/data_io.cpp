#include "stim/data_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "stim/errors.hpp"

namespace stim {

namespace {

// 2024-01-01 (a Monday) as days since the epoch; synthetic timestamps hang
// off this so derived weekday/hour stay consistent.
constexpr std::int64_t kBaseDay = 19723;
constexpr std::int64_t kSecondsPerDay = 86400;

int hour_of(std::int64_t ts) {
    return static_cast<int>((ts % kSecondsPerDay) / 3600);
}

int weekday_of(std::int64_t ts) {
    return static_cast<int>(((ts / kSecondsPerDay) + 3) % 7);  // epoch day 0 = Thu
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> split_list(const std::string& cell, char delim) {
    if (cell.empty()) return {};
    return split(cell, delim);
}

std::int64_t parse_i64(const std::string& s, const char* what) {
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw DataError(std::string("bad ") + what + " value \"" + s + "\"");
    }
    if (pos != s.size())
        throw DataError(std::string("bad ") + what + " value \"" + s + "\"");
    return v;
}

double parse_f64(const std::string& s, const char* what) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw DataError(std::string("bad ") + what + " value \"" + s + "\"");
    }
    if (pos != s.size())
        throw DataError(std::string("bad ") + what + " value \"" + s + "\"");
    return v;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void record_error(LoadReport* report, std::size_t line, const std::string& msg,
                  std::size_t max_errors, const std::string& path) {
    if (report) {
        report->rows_rejected += 1;
        report->errors.push_back(std::to_string(line) + ": " + msg);
        if (report->errors.size() > max_errors)
            throw DataError(path + ": too many malformed rows (" +
                            std::to_string(report->errors.size()) + ")");
    } else {
        throw DataError(path + ":" + std::to_string(line) + ": " + msg);
    }
}

}  // namespace

std::vector<Row> load_csv(const std::string& path, const DatasetSchema& schema,
                          const HolidayCalendar* calendar, LoadReport* report,
                          std::size_t max_errors) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset: " + path);

    std::string header;
    if (!std::getline(in, header)) throw DataError(path + ": empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const auto cols = split(header, ',');
    auto col_index = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<int>(i);
        return -1;
    };
    auto require_col = [&](const std::string& name) {
        const int idx = col_index(name);
        if (idx < 0) throw DataError(path + ": missing column " + name);
        return idx;
    };

    const int c_user = require_col(schema.user);
    const int c_item = require_col(schema.item);
    const int c_cat = require_col(schema.category);
    const int c_shop = require_col(schema.shop);
    const int c_time = require_col(schema.req_time);
    const int c_hour = require_col(schema.req_hour);
    const int c_wd = require_col(schema.req_weekday);
    int c_geo = col_index(schema.req_geo);
    bool truncate_geo = false;
    if (c_geo < 0) {
        c_geo = require_col("geohash12");  // Ele.me ships geohash12
        truncate_geo = true;
    }
    const int c_ilist = require_col(schema.item_list);
    const int c_clist = require_col(schema.cat_list);
    const int c_slist = require_col(schema.shop_list);
    const int c_glist = require_col(schema.geo_list);
    const int c_tlist = require_col(schema.timediff_list);
    const int c_hlist = require_col(schema.hours_list);
    const int c_wlist = require_col(schema.weekdays_list);
    const int c_plist = col_index(schema.price_list);
    const int c_click = require_col(schema.label_ctr);
    const int c_conv = col_index(schema.label_ctcvr);

    std::vector<Row> rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            const auto f = split(line, ',');
            if (f.size() != cols.size())
                throw DataError("expected " + std::to_string(cols.size()) +
                                " fields, got " + std::to_string(f.size()));
            Row row;
            row.user_id = parse_i64(f[c_user], "user_id");
            row.request.item_id = parse_i64(f[c_item], "item_id");
            row.request.category_id = parse_i64(f[c_cat], "category_id");
            row.request.shop_id = parse_i64(f[c_shop], "shop_id");
            row.request.timestamp = parse_i64(f[c_time], "times");
            row.request.hour_of_day = static_cast<int>(parse_i64(f[c_hour], "hours"));
            row.request.weekday = static_cast<int>(parse_i64(f[c_wd], "weekdays"));
            row.request.geohash6 =
                truncate_geo ? f[c_geo].substr(0, 6) : f[c_geo];
            row.label_ctr = parse_f64(f[c_click], "click");
            row.label_ctcvr = c_conv >= 0 ? parse_f64(f[c_conv], "conversion") : 0.0;
            row.request.is_holiday =
                calendar ? calendar->is_holiday(row.request.timestamp) : 0;

            const auto items = split_list(f[c_ilist], schema.list_delimiter);
            const auto cats = split_list(f[c_clist], schema.list_delimiter);
            const auto shops = split_list(f[c_slist], schema.list_delimiter);
            const auto geos = split_list(f[c_glist], schema.list_delimiter);
            const auto tds = split_list(f[c_tlist], schema.list_delimiter);
            const auto hrs = split_list(f[c_hlist], schema.list_delimiter);
            const auto wds = split_list(f[c_wlist], schema.list_delimiter);
            const auto prices = c_plist >= 0
                                    ? split_list(f[c_plist], schema.list_delimiter)
                                    : std::vector<std::string>{};
            const std::size_t n = items.size();
            if (cats.size() != n || shops.size() != n || geos.size() != n ||
                tds.size() != n || hrs.size() != n || wds.size() != n ||
                (c_plist >= 0 && !prices.empty() && prices.size() != n))
                throw DataError("length-misaligned behavior lists (item_id_list has " +
                                std::to_string(n) + " entries)");
            for (std::size_t i = 0; i < n; ++i) {
                BehaviorEvent ev;
                ev.item_id = parse_i64(items[i], "item_id_list");
                ev.category_id = parse_i64(cats[i], "category_1_id_list");
                ev.shop_id = parse_i64(shops[i], "shop_id_list");
                ev.timestamp =
                    row.request.timestamp - parse_i64(tds[i], "timediff_list");
                ev.hour_of_day = static_cast<int>(parse_i64(hrs[i], "hours_list"));
                ev.weekday = static_cast<int>(parse_i64(wds[i], "weekdays_list"));
                ev.geohash6 = geos[i];
                if (!prices.empty())
                    ev.price = parse_f64(prices[i], "price_list");
                row.sequence.events.push_back(std::move(ev));
            }
            // Oldest first.
            std::stable_sort(row.sequence.events.begin(), row.sequence.events.end(),
                             [](const BehaviorEvent& a, const BehaviorEvent& b) {
                                 return a.timestamp < b.timestamp;
                             });
            rows.push_back(std::move(row));
            if (report) report->rows_ok += 1;
        } catch (const DataError& e) {
            record_error(report, lineno, e.what(), max_errors, path);
        }
    }
    return rows;
}

nlohmann::json row_to_json(const Row& row) {
    nlohmann::json behaviors = nlohmann::json::array();
    for (const BehaviorEvent& ev : row.sequence.events) {
        nlohmann::json b = {{"item_id", ev.item_id},
                            {"category_id", ev.category_id},
                            {"shop_id", ev.shop_id},
                            {"timestamp", ev.timestamp},
                            {"hour", ev.hour_of_day},
                            {"weekday", ev.weekday},
                            {"geohash6", ev.geohash6}};
        if (ev.price) b["price"] = *ev.price;
        behaviors.push_back(std::move(b));
    }
    return {{"user_id", row.user_id},
            {"request", {{"timestamp", row.request.timestamp},
                         {"hour", row.request.hour_of_day},
                         {"weekday", row.request.weekday},
                         {"geohash6", row.request.geohash6},
                         {"is_holiday", row.request.is_holiday},
                         {"item_id", row.request.item_id},
                         {"category_id", row.request.category_id},
                         {"shop_id", row.request.shop_id}}},
            {"behaviors", behaviors},
            {"click", row.label_ctr},
            {"conversion", row.label_ctcvr}};
}

Row row_from_json(const nlohmann::json& j) {
    Row row;
    try {
        row.user_id = j.at("user_id").get<std::int64_t>();
        const auto& rq = j.at("request");
        row.request.timestamp = rq.at("timestamp").get<std::int64_t>();
        row.request.hour_of_day = rq.at("hour").get<int>();
        row.request.weekday = rq.at("weekday").get<int>();
        row.request.geohash6 = rq.at("geohash6").get<std::string>();
        row.request.is_holiday = rq.value("is_holiday", 0);
        row.request.item_id = rq.at("item_id").get<std::int64_t>();
        row.request.category_id = rq.at("category_id").get<std::int64_t>();
        row.request.shop_id = rq.at("shop_id").get<std::int64_t>();
        for (const auto& b : j.at("behaviors")) {
            BehaviorEvent ev;
            ev.item_id = b.at("item_id").get<std::int64_t>();
            ev.category_id = b.at("category_id").get<std::int64_t>();
            ev.shop_id = b.at("shop_id").get<std::int64_t>();
            ev.timestamp = b.at("timestamp").get<std::int64_t>();
            ev.hour_of_day = b.at("hour").get<int>();
            ev.weekday = b.at("weekday").get<int>();
            ev.geohash6 = b.at("geohash6").get<std::string>();
            if (b.contains("price")) ev.price = b.at("price").get<double>();
            row.sequence.events.push_back(std::move(ev));
        }
        row.label_ctr = j.at("click").get<double>();
        row.label_ctcvr = j.value("conversion", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed row: ") + e.what());
    }
    return row;
}

std::vector<Row> load_jsonl(const std::string& path,
                            const HolidayCalendar* calendar, LoadReport* report,
                            std::size_t max_errors) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset: " + path);
    std::vector<Row> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) throw DataError("invalid JSON");
            Row row = row_from_json(j);
            if (calendar)
                row.request.is_holiday = calendar->is_holiday(row.request.timestamp);
            rows.push_back(std::move(row));
            if (report) report->rows_ok += 1;
        } catch (const DataError& e) {
            record_error(report, lineno, e.what(), max_errors, path);
        }
    }
    return rows;
}

void write_csv(const std::string& path, const std::vector<Row>& rows,
               const DatasetSchema& schema) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    const char d = schema.list_delimiter;
    out << schema.user << ',' << schema.item << ',' << schema.category << ','
        << schema.shop << ',' << schema.req_time << ',' << schema.req_hour << ','
        << schema.req_weekday << ',' << schema.req_geo << ',' << schema.label_ctr
        << ',' << schema.label_ctcvr << ',' << schema.item_list << ','
        << schema.cat_list << ',' << schema.shop_list << ',' << schema.geo_list
        << ',' << schema.timediff_list << ',' << schema.hours_list << ','
        << schema.weekdays_list << ',' << schema.price_list << '\n';
    for (const Row& r : rows) {
        out << r.user_id << ',' << r.request.item_id << ','
            << r.request.category_id << ',' << r.request.shop_id << ','
            << r.request.timestamp << ',' << r.request.hour_of_day << ','
            << r.request.weekday << ',' << r.request.geohash6 << ','
            << r.label_ctr << ',' << r.label_ctcvr;
        auto list = [&](auto&& field) {
            out << ',';
            for (std::size_t i = 0; i < r.sequence.events.size(); ++i) {
                if (i) out << d;
                field(r.sequence.events[i]);
            }
        };
        list([&](const BehaviorEvent& e) { out << e.item_id; });
        list([&](const BehaviorEvent& e) { out << e.category_id; });
        list([&](const BehaviorEvent& e) { out << e.shop_id; });
        list([&](const BehaviorEvent& e) { out << e.geohash6; });
        list([&](const BehaviorEvent& e) { out << (r.request.timestamp - e.timestamp); });
        list([&](const BehaviorEvent& e) { out << e.hour_of_day; });
        list([&](const BehaviorEvent& e) { out << e.weekday; });
        list([&](const BehaviorEvent& e) { out << fmt_double(e.price.value_or(0.0)); });
        out << '\n';
    }
}

void write_jsonl(const std::string& path, const std::vector<Row>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (const Row& r : rows) out << row_to_json(r).dump() << '\n';
}

std::pair<std::vector<Row>, std::vector<Row>> time_split(
    const std::vector<Row>& rows, std::int64_t boundary) {
    std::vector<Row> train, test;
    for (const Row& r : rows) {
        if (r.request.timestamp <= boundary)
            train.push_back(r);
        else if (r.request.timestamp <= boundary + kSecondsPerDay)
            test.push_back(r);
    }
    return {std::move(train), std::move(test)};
}

void SyntheticSpec::validate() const {
    if (n_users < 1 || n_items < 2 || n_categories < 2 || n_shops < 2)
        throw ConfigError("synthetic: need >=1 user and >=2 items/categories/shops");
    if (min_len < 0 || max_len < min_len)
        throw ConfigError("synthetic: bad sequence length range");
    if (rows < 1) throw ConfigError("synthetic: rows must be >= 1");
    if (p_signal <= 0.5 || p_signal > 1.0)
        throw ConfigError("synthetic: p_signal must lie in (0.5, 1]");
    if (noise_rate < 0.0 || noise_rate > 1.0)
        throw ConfigError("synthetic: noise_rate must lie in [0,1]");
    if (drift_rate < 0.0 || drift_rate > 1.0)
        throw ConfigError("synthetic: drift_rate must lie in [0,1]");
    if (days < 2) throw ConfigError("synthetic: days must be >= 2");
}

double SyntheticSpec::design_positive_rate() const {
    // Target category matches w.p. 1/2, request hour group w.p. 1/2.
    const double p_match = 0.25;
    return p_match * p_signal + (1.0 - p_match) * (1.0 - p_signal);
}

nlohmann::json SyntheticSpec::to_json() const {
    return {{"n_users", n_users},       {"n_items", n_items},
            {"n_categories", n_categories}, {"n_shops", n_shops},
            {"min_len", min_len},       {"max_len", max_len},
            {"rows", rows},             {"p_signal", p_signal},
            {"noise_rate", noise_rate}, {"p_conversion", p_conversion},
            {"drift_rate", drift_rate}, {"days", days}};
}

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
    SyntheticSpec s;
    try {
        s.n_users = j.value("n_users", s.n_users);
        s.n_items = j.value("n_items", s.n_items);
        s.n_categories = j.value("n_categories", s.n_categories);
        s.n_shops = j.value("n_shops", s.n_shops);
        s.min_len = j.value("min_len", s.min_len);
        s.max_len = j.value("max_len", s.max_len);
        s.rows = j.value("rows", s.rows);
        s.p_signal = j.value("p_signal", s.p_signal);
        s.noise_rate = j.value("noise_rate", s.noise_rate);
        s.p_conversion = j.value("p_conversion", s.p_conversion);
        s.drift_rate = j.value("drift_rate", s.drift_rate);
        s.days = j.value("days", s.days);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed synthetic spec: ") + e.what());
    }
    s.validate();
    return s;
}

SyntheticSpec SyntheticSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open synthetic spec: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError(path + ": invalid JSON");
    return from_json(j);
}

namespace {

const int kMorningHours[] = {3, 4, 5, 6, 7, 8, 9, 10};
const int kMiddayHours[] = {11, 12, 13, 14, 15, 16};
const int kNightHours[] = {17, 18, 19, 20, 21, 22, 23, 0, 1, 2};

int hour_in_group(int group, std::mt19937_64& rng) {
    switch (group) {
        case 0: return kMorningHours[rng() % 8];
        case 1: return kMiddayHours[rng() % 6];
        default: return kNightHours[rng() % 10];
    }
}

std::string geohash_in_group(int group, std::mt19937_64& rng) {
    const std::string alpha = kGeohashAlphabet;
    std::string g(6, '0');
    if (group == 0) {
        do {
            g[0] = alpha[rng() % 32];
        } while (g[0] == 'w');
    } else {
        g[0] = 'w';
        g[1] = group == 1 ? alpha[rng() % 18] : alpha[18 + rng() % 14];
    }
    for (std::size_t i = (group == 0 ? 1u : 2u); i < 6; ++i)
        g[i] = alpha[rng() % 32];
    return g;
}

struct UserPrefs {
    std::int64_t pref_category;
    int pref_hour_group;      // current preference (drives the label)
    int pref_geo_group;
    int old_hour_group;       // pre-drift preference
    std::int64_t switch_offset;  // days before a request the preference switched
};

UserPrefs prefs_for(std::int64_t user, const SyntheticSpec& spec,
                    std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(user + 1)));
    UserPrefs p;
    p.pref_category = 1 + static_cast<std::int64_t>(rng() % (spec.n_categories - 1));
    p.pref_hour_group = static_cast<int>(rng() % 3);
    p.pref_geo_group = static_cast<int>(rng() % 3);
    // Drifted users switched hour-group preference a few days before the
    // request window; only their recent history reflects the current one.
    const bool drifted =
        static_cast<double>(rng() % 1000000) / 1000000.0 < spec.drift_rate;
    if (drifted) {
        p.old_hour_group = (p.pref_hour_group + 1 + static_cast<int>(rng() % 2)) % 3;
        // The switch sits a per-user number of days before each request,
        // uniform over the middle of the 28-day lookback. The post-switch
        // share of the history is then symmetric around one half on every
        // request day, so an order-free hour histogram cannot tell the
        // current group from the old one (a 30/70 split is equally likely
        // either way round); only recency ordering can.
        p.switch_offset = 4 + static_cast<std::int64_t>(rng() % 21);
    } else {
        p.old_hour_group = p.pref_hour_group;
        p.switch_offset = 100;  // beyond the lookback: always current
    }
    return p;
}

}  // namespace

std::int64_t synthetic_split_boundary(const SyntheticSpec& spec) {
    return (kBaseDay + spec.days) * kSecondsPerDay - 1;
}

std::vector<Row> generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Row> rows;
    rows.reserve(static_cast<std::size_t>(spec.rows));
    for (int n = 0; n < spec.rows; ++n) {
        Row row;
        row.user_id = 1 + static_cast<std::int64_t>(rng() % spec.n_users);
        const UserPrefs prefs = prefs_for(row.user_id, spec, seed);

        // Request moment.
        const std::int64_t day = kBaseDay + 1 + static_cast<std::int64_t>(rng() % spec.days);
        const bool hour_match = (rng() & 1) != 0;
        int req_hour;
        if (hour_match) {
            req_hour = hour_in_group(prefs.pref_hour_group, rng);
        } else {
            // For drifted users the non-matching hour lands in the old
            // group, so the request hour always falls inside one of the two
            // groups present in the history and an order-free histogram
            // cannot rule the mismatch out by group absence alone.
            int other = static_cast<int>(rng() % 2);
            int group = prefs.old_hour_group != prefs.pref_hour_group
                            ? prefs.old_hour_group
                            : (prefs.pref_hour_group + 1 + other) % 3;
            req_hour = hour_in_group(group, rng);
        }
        row.request.timestamp = day * kSecondsPerDay + req_hour * 3600 +
                                static_cast<std::int64_t>(rng() % 3600);
        row.request.hour_of_day = hour_of(row.request.timestamp);
        row.request.weekday = weekday_of(row.request.timestamp);
        const bool geo_match = (rng() & 1) != 0;
        const int req_geo_group =
            geo_match ? prefs.pref_geo_group
                      : (prefs.pref_geo_group + 1 + static_cast<int>(rng() % 2)) % 3;
        row.request.geohash6 = geohash_in_group(req_geo_group, rng);

        // Target item.
        const bool cat_match = (rng() & 1) != 0;
        if (cat_match) {
            row.request.category_id = prefs.pref_category;
        } else {
            std::int64_t c;
            do {
                c = 1 + static_cast<std::int64_t>(rng() % (spec.n_categories - 1));
            } while (c == prefs.pref_category);
            row.request.category_id = c;
        }
        row.request.item_id = 1 + static_cast<std::int64_t>(rng() % (spec.n_items - 1));
        row.request.shop_id = 1 + static_cast<std::int64_t>(rng() % (spec.n_shops - 1));

        // History: periodic visits to the preferred groups, plus noise.
        const int len = spec.min_len +
                        static_cast<int>(rng() % (spec.max_len - spec.min_len + 1));
        for (int i = 0; i < len; ++i) {
            BehaviorEvent ev;
            const bool noise = unit(rng) < spec.noise_rate;
            if (noise) {
                ev.category_id = 1 + static_cast<std::int64_t>(rng() % (spec.n_categories - 1));
                ev.geohash6 = geohash_in_group(static_cast<int>(rng() % 3), rng);
            } else {
                ev.category_id = prefs.pref_category;
                ev.geohash6 = geohash_in_group(prefs.pref_geo_group, rng);
            }
            const std::int64_t days_back = 1 + static_cast<std::int64_t>(rng() % 28);
            const int hist_group = days_back > prefs.switch_offset
                                       ? prefs.old_hour_group
                                       : prefs.pref_hour_group;
            const int ev_hour = noise ? static_cast<int>(rng() % 24)
                                      : hour_in_group(hist_group, rng);
            ev.timestamp = (day - days_back) * kSecondsPerDay + ev_hour * 3600 +
                           static_cast<std::int64_t>(rng() % 3600);
            ev.hour_of_day = hour_of(ev.timestamp);
            ev.weekday = weekday_of(ev.timestamp);
            ev.item_id = 1 + static_cast<std::int64_t>(rng() % (spec.n_items - 1));
            ev.shop_id = 1 + static_cast<std::int64_t>(rng() % (spec.n_shops - 1));
            ev.price = static_cast<double>(rng() % 10000) / 100.0;
            row.sequence.events.push_back(std::move(ev));
        }
        std::stable_sort(row.sequence.events.begin(), row.sequence.events.end(),
                         [](const BehaviorEvent& a, const BehaviorEvent& b) {
                             return a.timestamp < b.timestamp;
                         });

        const bool match = cat_match && hour_match;
        const double p_click = match ? spec.p_signal : 1.0 - spec.p_signal;
        row.label_ctr = unit(rng) < p_click ? 1.0 : 0.0;
        row.label_ctcvr =
            row.label_ctr > 0.5 && unit(rng) < spec.p_conversion ? 1.0 : 0.0;
        rows.push_back(std::move(row));
    }

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.request.timestamp < b.request.timestamp;
    });
    return rows;
}

}  // namespace stim
