#include "stim/forgetting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stim/errors.hpp"

namespace stim {

CurveFamily curve_family_from_string(const std::string& name) {
    if (name == "exponential") return CurveFamily::Exponential;
    if (name == "power") return CurveFamily::Power;
    if (name == "logarithmic") return CurveFamily::Logarithmic;
    throw ConfigError("unknown curve family: " + name);
}

std::string to_string(CurveFamily f) {
    switch (f) {
        case CurveFamily::Exponential: return "exponential";
        case CurveFamily::Power: return "power";
        case CurveFamily::Logarithmic: return "logarithmic";
    }
    return "?";
}

std::string to_string(Material m) {
    switch (m) {
        case Material::Hour: return "hour";
        case Material::Week: return "week";
        case Material::Geo: return "geo";
    }
    return "?";
}

void CurveParams::validate() const {
    if (S <= 0.0) throw ConfigError("curve: S must be > 0");
    if (I < 0.0) throw ConfigError("curve: I must be >= 0");
    if (R_init <= 0.0 || R_init > 1.0 || R_final <= 0.0 || R_final > 1.0)
        throw ConfigError("curve: R_init and R_final must lie in (0,1]");
    if (R_init > R_final) throw ConfigError("curve: R_init must be <= R_final");
    if (family == CurveFamily::Power && k_p < 0.0)
        throw ConfigError("curve: power family needs k_p >= 0");
    if (family == CurveFamily::Logarithmic && c_l <= 0.0)
        throw ConfigError("curve: logarithmic family needs c_l > 0");
}

double base_retention(double t, const CurveParams& params) {
    if (t < 0.0) throw DomainError("base_retention: t must be >= 0");
    double r = 0.0;
    switch (params.family) {
        case CurveFamily::Exponential:
            r = std::exp(-t / params.S);
            break;
        case CurveFamily::Power:
            r = std::pow(1.0 + params.k_p * t, params.m_p);
            break;
        case CurveFamily::Logarithmic:
            if (t + params.c_l <= 0.0)
                throw ConfigError("base_retention: t + c_l must be > 0");
            r = params.a_l - params.b_l * std::log(t + params.c_l);
            break;
    }
    return std::clamp(r, 0.0, 1.0);
}

std::vector<std::pair<double, double>> review_retention_schedule(
    const CurveParams& params, int n, bool identical_peaks) {
    if (n < 1) throw DomainError("review_retention_schedule: n must be >= 1");
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        double r;
        if (identical_peaks || i == 1) {
            r = params.R_final;
        } else if (i == n) {
            r = params.R_init;  // exact endpoint, no rounding residue
        } else {
            r = params.R_final - (params.R_final - params.R_init) *
                                     static_cast<double>(i - 1) /
                                     static_cast<double>(n - 1);
        }
        const double d = (1.0 + static_cast<double>(i) * params.I) / params.S;
        out.emplace_back(r, d);
    }
    return out;
}

namespace {

bool in_request_group(const BehaviorEvent& e, const RequestContext& req,
                      Material material) {
    switch (material) {
        case Material::Hour:
            return assign_hour_group(e.hour_of_day) ==
                   assign_hour_group(req.hour_of_day);
        case Material::Week:
            return assign_week_group(e.weekday) == assign_week_group(req.weekday);
        case Material::Geo:
            return assign_geo_group(e.geohash6) == assign_geo_group(req.geohash6);
    }
    return false;
}

}  // namespace

ReviewSchedule find_review_points(const CompressedSequence& seq,
                                  const RequestContext& request,
                                  Material material) {
    ReviewSchedule sched;
    sched.material = material;
    // Most recent first: valid events sit at the front, newest has the
    // highest valid index.
    for (int j = seq.k - 1; j >= 0; --j) {
        if (!seq.valid[static_cast<std::size_t>(j)]) continue;
        if (in_request_group(seq.events[static_cast<std::size_t>(j)], request,
                             material))
            sched.positions.push_back(j);
    }
    return sched;
}

std::vector<double> curve_times(const CompressedSequence& seq,
                                const RequestContext& request,
                                TimeMapping mapping) {
    std::vector<double> t(static_cast<std::size_t>(seq.k), 0.0);
    int last_valid = -1;
    for (int j = 0; j < seq.k; ++j)
        if (seq.valid[static_cast<std::size_t>(j)]) last_valid = j;
    if (last_valid < 0) return t;

    if (mapping == TimeMapping::Index) {
        for (int j = 0; j <= last_valid; ++j)
            t[static_cast<std::size_t>(j)] = static_cast<double>(last_valid - j);
        return t;
    }

    double gap_min = 0.0, gap_max = 0.0;
    std::vector<double> gaps(static_cast<std::size_t>(seq.k), 0.0);
    bool first = true;
    for (int j = 0; j <= last_valid; ++j) {
        if (!seq.valid[static_cast<std::size_t>(j)]) continue;
        const double gap = std::max(
            0.0, static_cast<double>(request.timestamp -
                                     seq.events[static_cast<std::size_t>(j)].timestamp));
        gaps[static_cast<std::size_t>(j)] = gap;
        if (first) {
            gap_min = gap_max = gap;
            first = false;
        } else {
            gap_min = std::min(gap_min, gap);
            gap_max = std::max(gap_max, gap);
        }
    }
    if (gap_max > gap_min) {
        const double scale = static_cast<double>(seq.k) / (gap_max - gap_min);
        for (int j = 0; j <= last_valid; ++j)
            if (seq.valid[static_cast<std::size_t>(j)])
                t[static_cast<std::size_t>(j)] =
                    (gaps[static_cast<std::size_t>(j)] - gap_min) * scale;
    }
    return t;
}

std::vector<double> retention_trajectory(const CompressedSequence& seq,
                                         const ReviewSchedule& schedule,
                                         const CurveParams& params,
                                         const std::vector<double>& times,
                                         bool identical_peaks) {
    params.validate();
    const int n = schedule.count();
    const auto rd = n > 0 ? review_retention_schedule(params, n, identical_peaks)
                          : std::vector<std::pair<double, double>>{};

    // Review times grow with the schedule index (most recent first).
    std::vector<double> review_t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        review_t[static_cast<std::size_t>(i)] =
            times[static_cast<std::size_t>(schedule.positions[static_cast<std::size_t>(i)])];

    std::vector<double> out(static_cast<std::size_t>(seq.k), 0.0);
    for (int j = 0; j < seq.k; ++j) {
        if (!seq.valid[static_cast<std::size_t>(j)]) continue;
        const double t = times[static_cast<std::size_t>(j)];

        // A review position takes its peak exactly.
        int own = -1;
        for (int i = 0; i < n; ++i)
            if (schedule.positions[static_cast<std::size_t>(i)] == j) own = i;
        if (own >= 0) {
            out[static_cast<std::size_t>(j)] = rd[static_cast<std::size_t>(own)].first;
            continue;
        }

        int seg = -1;  // last review crossed walking back to time t
        for (int i = 0; i < n; ++i)
            if (review_t[static_cast<std::size_t>(i)] <= t) seg = i;
        if (seg < 0) {
            out[static_cast<std::size_t>(j)] = base_retention(t, params);
        } else {
            const auto& [r, d] = rd[static_cast<std::size_t>(seg)];
            out[static_cast<std::size_t>(j)] = std::clamp(
                r * std::exp(-(t - review_t[static_cast<std::size_t>(seg)]) * d),
                0.0, 1.0);
        }
    }
    return out;
}

std::vector<double> normalize_mask(const std::vector<double>& raw,
                                   const std::vector<bool>& valid) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (std::size_t j = 0; j < raw.size(); ++j) {
        if (!valid[j]) continue;
        if (first) {
            lo = hi = raw[j];
            first = false;
        } else {
            lo = std::min(lo, raw[j]);
            hi = std::max(hi, raw[j]);
        }
    }
    std::vector<double> out(raw.size(), 0.0);
    if (first) return out;  // all padding
    for (std::size_t j = 0; j < raw.size(); ++j) {
        if (!valid[j]) continue;
        out[j] = hi > lo ? (raw[j] - lo) / (hi - lo) : 1.0;
    }
    return out;
}

MaskVariant mask_variant_from_string(const std::string& name) {
    if (name == "N1") return MaskVariant::N1;
    if (name == "N2") return MaskVariant::N2;
    if (name == "N3") return MaskVariant::N3;
    if (name == "N4") return MaskVariant::N4;
    throw ConfigError("unknown mask variant: " + name);
}

std::string to_string(MaskVariant v) {
    switch (v) {
        case MaskVariant::N1: return "N1";
        case MaskVariant::N2: return "N2";
        case MaskVariant::N3: return "N3";
        case MaskVariant::N4: return "N4";
    }
    return "?";
}

namespace {

std::vector<double> material_mask(const CompressedSequence& seq,
                                  const RequestContext& request,
                                  const CurveParams& params, Material material,
                                  const std::vector<double>& times,
                                  MaskVariant variant) {
    ReviewSchedule sched;
    sched.material = material;
    if (variant != MaskVariant::N1)
        sched = find_review_points(seq, request, material);
    const auto raw = retention_trajectory(seq, sched, params, times,
                                          variant == MaskVariant::N2);
    return normalize_mask(raw, seq.valid);
}

}  // namespace

MaskSet build_masks(const CompressedSequence& seq, const RequestContext& request,
                    const MaskParams& params, MaskVariant variant) {
    const auto times = curve_times(seq, request, params.mapping);
    MaskSet out;
    out.valid = seq.valid;
    out.m_hour = material_mask(seq, request, params.hour, Material::Hour, times, variant);
    out.m_week = material_mask(seq, request, params.week, Material::Week, times, variant);
    out.m_geo = material_mask(seq, request, params.geo, Material::Geo, times, variant);
    return out;
}

std::vector<TrajectoryRow> dump_trajectory(const CompressedSequence& seq,
                                           const RequestContext& request,
                                           const MaskParams& params) {
    const auto times = curve_times(seq, request, params.mapping);
    std::vector<TrajectoryRow> rows;
    for (Material material : {Material::Hour, Material::Week, Material::Geo}) {
        const CurveParams& cp = material == Material::Hour  ? params.hour
                                : material == Material::Week ? params.week
                                                              : params.geo;
        const auto sched = find_review_points(seq, request, material);
        const auto retention = retention_trajectory(seq, sched, cp, times);
        for (int j = 0; j < seq.k; ++j) {
            TrajectoryRow row{};
            row.position = j;
            row.material = material;
            row.t = times[static_cast<std::size_t>(j)];
            row.retention = retention[static_cast<std::size_t>(j)];
            row.review = std::find(sched.positions.begin(), sched.positions.end(),
                                   j) != sched.positions.end();
            row.gap = seq.valid[static_cast<std::size_t>(j)]
                          ? static_cast<double>(
                                request.timestamp -
                                seq.events[static_cast<std::size_t>(j)].timestamp)
                          : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows) {
    std::ostringstream out;
    out << "position,gap,t,material,retention,review\n";
    for (const auto& r : rows) {
        out << r.position << ',' << r.gap << ',' << r.t << ','
            << to_string(r.material) << ',' << r.retention << ','
            << (r.review ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace stim
