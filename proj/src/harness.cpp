#include "stim/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

namespace stim {

namespace {

std::vector<const Row*> pointers(const std::vector<Row>& rows,
                                 const std::vector<std::size_t>& idx,
                                 std::size_t begin, std::size_t end) {
    std::vector<const Row*> batch;
    batch.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) batch.push_back(&rows[idx[i]]);
    return batch;
}

Task eval_task(const ModelConfig& config) {
    return config.task == Task::Ctcvr ? Task::Ctcvr : Task::Ctr;
}

std::vector<double> eval_labels(const std::vector<Row>& rows, Task task) {
    std::vector<double> y;
    y.reserve(rows.size());
    for (const Row& r : rows)
        y.push_back(task == Task::Ctcvr ? r.label_ctcvr : r.label_ctr);
    return y;
}

}  // namespace

double train_model(StimModel& model, const std::vector<Row>& train,
                   const TrainOptions& options) {
    if (train.empty()) throw DataError("train_model: empty training set");
    if (options.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (options.epochs < 1) throw ConfigError("train: epochs must be >= 1");

    Optimizer optimizer(options.optimizer);
    std::mt19937_64 shuffle_rng(model.config().seed ^ 0xC0FFEEULL);
    std::vector<std::size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), 0);

    double epoch_loss = 0.0;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        if (options.shuffle) std::shuffle(idx.begin(), idx.end(), shuffle_rng);
        double loss_sum = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < idx.size();
             start += options.batch_size) {
            const std::size_t stop =
                std::min(idx.size(), start + options.batch_size);
            const double loss =
                model.train_step(pointers(train, idx, start, stop), optimizer);
            loss_sum += loss;
            ++n_batches;
            if (options.log_every > 0 &&
                n_batches % static_cast<std::size_t>(options.log_every) == 0)
                std::printf("epoch %d batch %zu loss %.5f\n", epoch + 1,
                            n_batches, loss);
        }
        epoch_loss = loss_sum / static_cast<double>(n_batches);
        if (options.log_every > 0)
            std::printf("epoch %d mean loss %.5f\n", epoch + 1, epoch_loss);
    }
    return epoch_loss;
}

std::vector<double> predict_rows(StimModel& model, const std::vector<Row>& rows,
                                 Task task) {
    std::vector<double> scores;
    scores.reserve(rows.size());
    constexpr std::size_t kEvalBatch = 512;
    std::vector<std::size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t start = 0; start < rows.size(); start += kEvalBatch) {
        const std::size_t stop = std::min(rows.size(), start + kEvalBatch);
        const auto out =
            model.predict(pointers(rows, idx, start, stop), task);
        scores.insert(scores.end(), out.begin(), out.end());
    }
    return scores;
}

MetricsReport evaluate_model(StimModel& model, const std::vector<Row>& rows,
                             Task task) {
    if (rows.empty()) throw DataError("evaluate_model: empty evaluation set");
    const std::vector<double> scores = predict_rows(model, rows, task);
    const std::vector<double> labels = eval_labels(rows, task);
    std::vector<std::int64_t> users;
    users.reserve(rows.size());
    for (const Row& r : rows) users.push_back(r.user_id);
    return compute_metrics(scores, labels, users);
}

MetricsReport evaluate_cold_start(StimModel& model, const std::vector<Row>& rows,
                                  Task task, int threshold) {
    const auto slice = cold_start_slice(rows, model.config().k, threshold);
    std::vector<Row> subset;
    subset.reserve(slice.size());
    for (std::size_t i : slice) subset.push_back(rows[i]);
    if (subset.empty())
        throw UndefinedMetricError("cold-start slice is empty");
    return evaluate_model(model, subset, task);
}

std::string AblationTable::to_csv() const {
    std::ostringstream out;
    out << "variant,auc,gauc,n_rows,n_positive,train_loss\n";
    char buf[160];
    for (const AblationRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%zu,%zu,%.6f\n",
                      r.variant.c_str(), r.metrics.auc, r.metrics.gauc,
                      r.metrics.n_rows, r.metrics.n_positive, r.train_loss);
        out << buf;
    }
    return out.str();
}

std::string AblationTable::pretty() const {
    std::size_t w = 8;
    for (const AblationRow& r : rows) w = std::max(w, r.variant.size());
    std::ostringstream out;
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%-*s  %8s  %8s  %8s  %10s\n",
                  static_cast<int>(w), "variant", "auc", "gauc", "rows",
                  "train_loss");
    out << buf;
    for (const AblationRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-*s  %8.4f  %8.4f  %8zu  %10.4f\n",
                      static_cast<int>(w), r.variant.c_str(), r.metrics.auc,
                      r.metrics.gauc, r.metrics.n_rows, r.train_loss);
        out << buf;
    }
    return out.str();
}

namespace {

AblationRow run_variant(const ModelConfig& config, const std::string& name,
                        const std::vector<Row>& train,
                        const std::vector<Row>& test,
                        const TrainOptions& options) {
    StimModel model(config);
    AblationRow row;
    row.variant = name;
    row.train_loss = train_model(model, train, options);
    row.metrics = evaluate_model(model, test, eval_task(config));
    return row;
}

void set_family(ModelConfig& config, CurveFamily family) {
    config.masks.hour.family = family;
    config.masks.week.family = family;
    config.masks.geo.family = family;
}

}  // namespace

AblationTable run_ablation_suite(const ModelConfig& base,
                                 const std::vector<Row>& train,
                                 const std::vector<Row>& test,
                                 const std::string& family,
                                 const TrainOptions& options) {
    AblationTable table;
    table.family = family;
    if (family == "curve") {
        for (CurveFamily f : {CurveFamily::Exponential, CurveFamily::Power,
                              CurveFamily::Logarithmic}) {
            ModelConfig config = base;
            set_family(config, f);
            table.rows.push_back(
                run_variant(config, to_string(f), train, test, options));
        }
    } else if (family == "N") {
        for (MaskVariant v :
             {MaskVariant::N1, MaskVariant::N2, MaskVariant::N3, MaskVariant::N4}) {
            ModelConfig config = base;
            config.ablation_n = v;
            table.rows.push_back(
                run_variant(config, to_string(v), train, test, options));
        }
    } else if (family == "M") {
        for (MoeVariant v :
             {MoeVariant::M1, MoeVariant::M2, MoeVariant::M3, MoeVariant::M4}) {
            ModelConfig config = base;
            config.ablation_m = v;
            table.rows.push_back(
                run_variant(config, to_string(v), train, test, options));
        }
    } else if (family == "grid") {
        for (double r_init : {0.2, 0.4, 0.6}) {
            for (double r_final : {0.7, 0.9}) {
                if (r_init > r_final) continue;
                for (double s : {10.0, 20.0}) {
                    for (double i : {1.0, 2.0}) {
                        ModelConfig config = base;
                        for (CurveParams* p : {&config.masks.hour,
                                               &config.masks.week,
                                               &config.masks.geo}) {
                            p->R_init = r_init;
                            p->R_final = r_final;
                            p->S = s;
                            p->I = i;
                        }
                        char name[80];
                        std::snprintf(name, sizeof(name),
                                      "Rinit=%.1f,Rfinal=%.1f,S=%g,I=%g",
                                      r_init, r_final, s, i);
                        table.rows.push_back(
                            run_variant(config, name, train, test, options));
                    }
                }
            }
        }
    } else {
        throw ConfigError("unknown ablation family: " + family +
                          " (expected curve, N, M, or grid)");
    }
    return table;
}

int SeedComparison::wins_a() const {
    int wins = 0;
    for (std::size_t i = 0; i < auc_a.size(); ++i)
        if (auc_a[i] > auc_b[i]) ++wins;
    return wins;
}

SeedComparison compare_over_seeds(const ModelConfig& config_a,
                                  const ModelConfig& config_b,
                                  const std::vector<Row>& train,
                                  const std::vector<Row>& test,
                                  const std::vector<std::uint64_t>& seeds,
                                  const TrainOptions& options) {
    SeedComparison cmp;
    cmp.seeds = seeds;
    for (std::uint64_t seed : seeds) {
        for (const auto* config : {&config_a, &config_b}) {
            ModelConfig c = *config;
            c.seed = seed;
            StimModel model(c);
            train_model(model, train, options);
            const double a = evaluate_model(model, test, eval_task(c)).auc;
            (config == &config_a ? cmp.auc_a : cmp.auc_b).push_back(a);
        }
    }
    cmp.p_value = paired_t_test(cmp.auc_a, cmp.auc_b);
    return cmp;
}

}  // namespace stim
