#include "stim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "stim/errors.hpp"
#include "stim/gsu.hpp"

namespace stim {

double auc(const std::vector<double>& scores, const std::vector<double>& labels) {
    if (scores.size() != labels.size())
        throw DimensionError("auc: scores/labels size mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (double y : labels) n_pos += y > 0.5 ? 1 : 0;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw UndefinedMetricError("auc undefined: labels are single-class");

    // Average rank per tie group, then the Mann-Whitney identity.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] > 0.5) pos_rank_sum += avg_rank;
        i = j;
    }
    return (pos_rank_sum - 0.5 * static_cast<double>(n_pos) *
                               static_cast<double>(n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double gauc(const std::vector<double>& scores, const std::vector<double>& labels,
            const std::vector<std::int64_t>& users) {
    if (scores.size() != labels.size() || scores.size() != users.size())
        throw DimensionError("gauc: input size mismatch");
    std::map<std::int64_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < users.size(); ++i) groups[users[i]].push_back(i);

    double weighted = 0.0;
    double weight = 0.0;
    for (const auto& [user, idx] : groups) {
        bool has_pos = false, has_neg = false;
        for (std::size_t i : idx) (labels[i] > 0.5 ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg) continue;  // per-user AUC undefined: skip
        std::vector<double> s, y;
        s.reserve(idx.size());
        y.reserve(idx.size());
        for (std::size_t i : idx) {
            s.push_back(scores[i]);
            y.push_back(labels[i]);
        }
        const double w = static_cast<double>(idx.size());
        weighted += w * auc(s, y);
        weight += w;
    }
    if (weight == 0.0)
        throw UndefinedMetricError("gauc undefined: no user has both classes");
    return weighted / weight;
}

MetricsReport compute_metrics(const std::vector<double>& scores,
                              const std::vector<double>& labels,
                              const std::vector<std::int64_t>& users) {
    MetricsReport r;
    r.n_rows = labels.size();
    for (double y : labels) r.n_positive += y > 0.5 ? 1 : 0;
    r.auc = auc(scores, labels);
    r.gauc = gauc(scores, labels, users);
    return r;
}

std::vector<std::size_t> cold_start_slice(const std::vector<Row>& rows, int k,
                                          int threshold) {
    std::vector<std::size_t> slice;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const CompressedSequence cs =
            gsu_search(rows[i].sequence.events, rows[i].request.category_id, k);
        if (static_cast<int>(cs.valid_count()) < threshold) slice.push_back(i);
    }
    return slice;
}

namespace {

// Regularized incomplete beta via Lentz's continued fraction; used for the
// Student-t CDF.
double betacf(double a, double b, double x) {
    constexpr double eps = 3e-14, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw DimensionError("paired_t_test: sample size mismatch");
    const std::size_t n = a.size();
    if (n < 2)
        throw UndefinedMetricError("paired_t_test needs at least 2 pairs");
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);
    if (var == 0.0) return mean == 0.0 ? 1.0 : 0.0;
    const double t = mean / std::sqrt(var / static_cast<double>(n));
    const double df = static_cast<double>(n - 1);
    // Two-sided: P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2).
    return incbeta(df / 2.0, 0.5, df / (df + t * t));
}

}  // namespace stim
