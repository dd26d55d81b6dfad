#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stim/context.hpp"
#include "stim/gsu.hpp"

namespace stim {

enum class CurveFamily { Exponential, Power, Logarithmic };

CurveFamily curve_family_from_string(const std::string& name);
std::string to_string(CurveFamily f);

// Forgetting-curve hyperparameters. The exponential family is the default;
// power/logarithmic use (k_p, m_p) and (a_l, b_l, c_l) respectively. Review
// restarts always decay exponentially with rate D_i = (1 + i*I)/S.
struct CurveParams {
    CurveFamily family = CurveFamily::Exponential;
    double S = 20.0;       // time constant
    double I = 2.0;        // review-interval coefficient
    double R_init = 0.4;   // oldest-review peak
    double R_final = 0.9;  // most-recent-review peak
    double k_p = 1.0;
    double m_p = -1.0;
    double a_l = 1.0;
    double b_l = 0.2;
    double c_l = 1.0;

    void validate() const;  // throws ConfigError
};

enum class Material { Hour, Week, Geo };
std::string to_string(Material m);

// Review positions for one material, most recent first. Positions index into
// the compressed sequence and are always valid (non-padding).
struct ReviewSchedule {
    Material material = Material::Hour;
    std::vector<int> positions;

    int count() const { return static_cast<int>(positions.size()); }
};

// Base retention without reviews, clamped to [0,1].
double base_retention(double t, const CurveParams& params);

// (R_i, D_i) for i = 1..n: peaks interpolate from R_final down to R_init,
// decay rates D_i = (1 + i*I)/S grow with i. `identical_peaks` is the N2
// ablation (every R_i = R_final).
std::vector<std::pair<double, double>> review_retention_schedule(
    const CurveParams& params, int n, bool identical_peaks = false);

// Positions whose event falls in the same material group as the request.
ReviewSchedule find_review_points(const CompressedSequence& seq,
                                  const RequestContext& request,
                                  Material material);

enum class TimeMapping { RescaledGap, Index };

// Per-position curve time: raw gaps (request - event) affinely rescaled onto
// [0, k] over the valid positions (most recent -> 0), or a pure index count
// back from the most recent event. Padding positions get 0 (unused).
std::vector<double> curve_times(const CompressedSequence& seq,
                                const RequestContext& request,
                                TimeMapping mapping = TimeMapping::RescaledGap);

// Retention per position: base curve before the first review point, then
// R_i * exp(-(t - t_review_i) * D_i) past review point i. Padding -> 0.
std::vector<double> retention_trajectory(
    const CompressedSequence& seq, const ReviewSchedule& schedule,
    const CurveParams& params, const std::vector<double>& times,
    bool identical_peaks = false);

// Min-max rescale over valid positions to [0,1]; all-equal valid values map
// to 1.0; padding stays 0.
std::vector<double> normalize_mask(const std::vector<double>& raw,
                                   const std::vector<bool>& valid);

// Per-material curve configuration for the full mask pipeline.
struct MaskParams {
    CurveParams hour;
    CurveParams week;
    CurveParams geo;
    TimeMapping mapping = TimeMapping::RescaledGap;
};

// Masking-module ablations (N4 = full model).
enum class MaskVariant { N1, N2, N3, N4 };
MaskVariant mask_variant_from_string(const std::string& name);
std::string to_string(MaskVariant v);

struct MaskSet {
    std::vector<double> m_hour;
    std::vector<double> m_week;
    std::vector<double> m_geo;
    std::vector<bool> valid;
};

// Raw normalized masks for the three materials. N1 skips review points; N2
// flattens every review peak to R_final. (N3 affects the refiner downstream,
// not the raw masks.)
MaskSet build_masks(const CompressedSequence& seq, const RequestContext& request,
                    const MaskParams& params, MaskVariant variant = MaskVariant::N4);

struct TrajectoryRow {
    int position;
    double gap;      // raw seconds between event and request
    double t;        // rescaled curve time
    Material material;
    double retention;
    bool review;
};

// One row per (position, material); feeds the `mask-dump` CSV.
std::vector<TrajectoryRow> dump_trajectory(const CompressedSequence& seq,
                                           const RequestContext& request,
                                           const MaskParams& params);

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows);

}  // namespace stim
