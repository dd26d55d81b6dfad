#pragma once

#include <string>
#include <vector>

#include "stim/data_io.hpp"
#include "stim/metrics.hpp"
#include "stim/model.hpp"

namespace stim {

struct TrainOptions {
    int epochs = 1;
    std::size_t batch_size = 256;
    OptimizerConfig optimizer;
    bool shuffle = true;
    int log_every = 0;  // batches between progress lines; 0 = quiet
};

// Mini-batch training over `train`; returns the mean loss of the last epoch.
double train_model(StimModel& model, const std::vector<Row>& train,
                   const TrainOptions& options);

std::vector<double> predict_rows(StimModel& model, const std::vector<Row>& rows,
                                 Task task);

MetricsReport evaluate_model(StimModel& model, const std::vector<Row>& rows,
                             Task task);

// Evaluation restricted to requests with few usable behaviors (valid count
// after GSU below `threshold`).
MetricsReport evaluate_cold_start(StimModel& model, const std::vector<Row>& rows,
                                  Task task, int threshold = 10);

struct AblationRow {
    std::string variant;
    MetricsReport metrics;
    double train_loss = 0.0;
};

struct AblationTable {
    std::string family;
    std::vector<AblationRow> rows;

    std::string to_csv() const;     // header: variant,auc,gauc,n_rows,n_positive,train_loss
    std::string pretty() const;     // aligned human-readable table
};

// Trains one model per variant of the requested family on identical data and
// seed, evaluates each on `test`. Families: "curve" (exponential / power /
// logarithmic), "N" (N1..N4), "M" (M1..M4), "grid" (R_init x R_final x S x I,
// keeping only R_init <= R_final). Deterministic given (config, data).
AblationTable run_ablation_suite(const ModelConfig& base,
                                 const std::vector<Row>& train,
                                 const std::vector<Row>& test,
                                 const std::string& family,
                                 const TrainOptions& options);

struct SeedComparison {
    std::vector<std::uint64_t> seeds;
    std::vector<double> auc_a;  // variant A per seed
    std::vector<double> auc_b;  // variant B per seed
    double p_value = 1.0;       // paired t-test, two-sided

    int wins_a() const;  // seeds where A strictly beats B
};

// Repeats train+eval for two configs across seeds (fresh model per seed, same
// data) and reports the paired significance. Used for N4-vs-N1 style checks.
SeedComparison compare_over_seeds(const ModelConfig& config_a,
                                  const ModelConfig& config_b,
                                  const std::vector<Row>& train,
                                  const std::vector<Row>& test,
                                  const std::vector<std::uint64_t>& seeds,
                                  const TrainOptions& options);

}  // namespace stim
