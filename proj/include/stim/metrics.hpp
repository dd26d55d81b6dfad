#pragma once

#include <cstdint>
#include <vector>

#include "stim/events.hpp"

namespace stim {

// Rank-statistic AUC with the tie correction (tied scores count 1/2).
// Throws UndefinedMetricError when all labels belong to one class.
double auc(const std::vector<double>& scores, const std::vector<double>& labels);

// Impression-weighted mean of per-user AUC. Users whose labels are all one
// class are excluded from both numerator and weight; if every user is
// excluded the metric is undefined.
double gauc(const std::vector<double>& scores, const std::vector<double>& labels,
            const std::vector<std::int64_t>& users);

struct MetricsReport {
    double auc = 0.0;
    double gauc = 0.0;
    std::size_t n_rows = 0;
    std::size_t n_positive = 0;
};

MetricsReport compute_metrics(const std::vector<double>& scores,
                              const std::vector<double>& labels,
                              const std::vector<std::int64_t>& users);

// Rows whose usable behavior count (after GSU compression for the request's
// target category, capped at k) is below `threshold`.
std::vector<std::size_t> cold_start_slice(const std::vector<Row>& rows, int k,
                                          int threshold = 10);

// Two-sided paired t-test p-value for matched samples a, b (e.g. metric per
// seed). Returns 1.0 when the differences are all zero.
double paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace stim
