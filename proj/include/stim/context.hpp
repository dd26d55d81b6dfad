#pragma once

#include <cstdint>
#include <set>
#include <string>

namespace stim {

// Daily-time partition: Morning 3:00-10:00, Midday 11:00-16:00, Night
// 17:00-2:00 (wraps past midnight).
enum class HourGroup { Morning, Midday, Night };
enum class WeekGroup { Weekday, Weekend };

// Geohash6 partition: (1) first char != 'w'; (2) 'w' + second char in 0-j;
// (3) 'w' + second char in k-z. Ranges follow base-32 alphabet order.
enum class GeoGroup { NonW, W0j, Wkz };

struct GroupAssignment {
    HourGroup hour_group;
    WeekGroup week_group;
    GeoGroup geo_group;
};

inline constexpr const char* kGeohashAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";

HourGroup assign_hour_group(int hour_of_day);
WeekGroup assign_week_group(int weekday);  // 0 = Monday .. 6 = Sunday
GeoGroup assign_geo_group(const std::string& geohash6);
GroupAssignment assign_groups(int hour_of_day, int weekday,
                              const std::string& geohash6);

std::string to_string(HourGroup g);
std::string to_string(WeekGroup g);
std::string to_string(GeoGroup g);

// Standard public geohash codec over the base-32 alphabet above.
std::string geohash_encode(double lat, double lon, int precision);

struct GeohashBox {
    double lat_min, lat_max, lon_min, lon_max;
    double lat_center() const { return (lat_min + lat_max) / 2.0; }
    double lon_center() const { return (lon_min + lon_max) / 2.0; }
    bool contains(double lat, double lon) const {
        return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
    }
};

GeohashBox geohash_decode(const std::string& hash);

// Set of holiday dates; lookup is total (unknown date -> 0).
class HolidayCalendar {
  public:
    HolidayCalendar() = default;

    void add(const std::string& iso_date);
    // One ISO-8601 date per line; '#' starts a comment; blank lines ignored.
    static HolidayCalendar load(const std::string& path);

    int is_holiday(const std::string& iso_date) const;
    // Convenience for epoch-second timestamps (UTC day).
    int is_holiday(std::int64_t timestamp) const;

    std::size_t size() const { return dates_.size(); }

  private:
    std::set<std::string> dates_;
};

std::string iso_date_from_timestamp(std::int64_t timestamp);

}  // namespace stim
