#include "stim/context.hpp"

#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>

#include "stim/errors.hpp"

namespace stim {

HourGroup assign_hour_group(int hour_of_day) {
    if (hour_of_day < 0 || hour_of_day > 23)
        throw DomainError("hour_of_day out of range: " + std::to_string(hour_of_day));
    if (hour_of_day >= 3 && hour_of_day <= 10) return HourGroup::Morning;
    if (hour_of_day >= 11 && hour_of_day <= 16) return HourGroup::Midday;
    return HourGroup::Night;  // 17-23 and 0-2
}

WeekGroup assign_week_group(int weekday) {
    if (weekday < 0 || weekday > 6)
        throw DomainError("weekday out of range: " + std::to_string(weekday));
    return weekday <= 4 ? WeekGroup::Weekday : WeekGroup::Weekend;
}

namespace {

int alphabet_index(char c) {
    const char* p = std::strchr(kGeohashAlphabet, c);
    if (!p || c == '\0')
        throw DomainError(std::string("invalid geohash character: '") + c + "'");
    return static_cast<int>(p - kGeohashAlphabet);
}

}  // namespace

GeoGroup assign_geo_group(const std::string& geohash6) {
    if (geohash6.size() != 6)
        throw DomainError("geohash6 must have length 6, got \"" + geohash6 + "\"");
    // Only the first two characters carry grouping information; validate just
    // those so partially dirty upstream strings still classify.
    alphabet_index(geohash6[0]);
    alphabet_index(geohash6[1]);
    if (geohash6[0] != 'w') return GeoGroup::NonW;
    // "0-j" covers alphabet positions 0..17 ('0' through 'j'), "k-z" the rest.
    return alphabet_index(geohash6[1]) <= 17 ? GeoGroup::W0j : GeoGroup::Wkz;
}

GroupAssignment assign_groups(int hour_of_day, int weekday,
                              const std::string& geohash6) {
    return {assign_hour_group(hour_of_day), assign_week_group(weekday),
            assign_geo_group(geohash6)};
}

std::string to_string(HourGroup g) {
    switch (g) {
        case HourGroup::Morning: return "morning";
        case HourGroup::Midday: return "midday";
        case HourGroup::Night: return "night";
    }
    return "?";
}

std::string to_string(WeekGroup g) {
    return g == WeekGroup::Weekday ? "weekday" : "weekend";
}

std::string to_string(GeoGroup g) {
    switch (g) {
        case GeoGroup::NonW: return "non_w";
        case GeoGroup::W0j: return "w_0j";
        case GeoGroup::Wkz: return "w_kz";
    }
    return "?";
}

std::string geohash_encode(double lat, double lon, int precision) {
    if (lat < -90.0 || lat > 90.0)
        throw DomainError("latitude out of range: " + std::to_string(lat));
    if (lon < -180.0 || lon > 180.0)
        throw DomainError("longitude out of range: " + std::to_string(lon));
    if (precision < 1 || precision > 12)
        throw DomainError("geohash precision must be in [1,12]");

    double lat_min = -90.0, lat_max = 90.0;
    double lon_min = -180.0, lon_max = 180.0;
    std::string out;
    out.reserve(static_cast<std::size_t>(precision));
    int idx = 0, bit = 0;
    bool even = true;  // even bits bisect longitude
    while (static_cast<int>(out.size()) < precision) {
        if (even) {
            const double mid = (lon_min + lon_max) / 2.0;
            if (lon >= mid) {
                idx = idx * 2 + 1;
                lon_min = mid;
            } else {
                idx = idx * 2;
                lon_max = mid;
            }
        } else {
            const double mid = (lat_min + lat_max) / 2.0;
            if (lat >= mid) {
                idx = idx * 2 + 1;
                lat_min = mid;
            } else {
                idx = idx * 2;
                lat_max = mid;
            }
        }
        even = !even;
        if (++bit == 5) {
            out += kGeohashAlphabet[idx];
            idx = 0;
            bit = 0;
        }
    }
    return out;
}

GeohashBox geohash_decode(const std::string& hash) {
    if (hash.empty() || hash.size() > 12)
        throw DomainError("geohash length must be in [1,12]");
    GeohashBox box{-90.0, 90.0, -180.0, 180.0};
    bool even = true;
    for (char c : hash) {
        const int idx = alphabet_index(c);
        for (int b = 4; b >= 0; --b) {
            const int bit = (idx >> b) & 1;
            if (even) {
                const double mid = (box.lon_min + box.lon_max) / 2.0;
                (bit ? box.lon_min : box.lon_max) = mid;
            } else {
                const double mid = (box.lat_min + box.lat_max) / 2.0;
                (bit ? box.lat_min : box.lat_max) = mid;
            }
            even = !even;
        }
    }
    return box;
}

void HolidayCalendar::add(const std::string& iso_date) {
    dates_.insert(iso_date);
}

HolidayCalendar HolidayCalendar::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open holiday calendar: " + path);
    HolidayCalendar cal;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        cal.add(line.substr(first, last - first + 1));
    }
    return cal;
}

int HolidayCalendar::is_holiday(const std::string& iso_date) const {
    return dates_.count(iso_date) ? 1 : 0;
}

int HolidayCalendar::is_holiday(std::int64_t timestamp) const {
    return is_holiday(iso_date_from_timestamp(timestamp));
}

std::string iso_date_from_timestamp(std::int64_t timestamp) {
    const std::time_t t = static_cast<std::time_t>(timestamp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday);
    return buf;
}

}  // namespace stim
