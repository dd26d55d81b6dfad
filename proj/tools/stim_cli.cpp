#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "stim/data_io.hpp"
#include "stim/harness.hpp"
#include "stim/model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw stim::ConfigError("cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw stim::ConfigError(path + ": invalid JSON");
    return j;
}

struct RunConfig {
    stim::ModelConfig model;
    stim::TrainOptions train;
};

RunConfig load_run_config(const std::string& path) {
    const json j = load_json_file(path);
    RunConfig rc;
    rc.model = stim::ModelConfig::from_json(j.contains("model") ? j["model"] : j);
    if (j.contains("train")) {
        const json& t = j["train"];
        try {
            rc.train.epochs = t.value("epochs", rc.train.epochs);
            rc.train.batch_size = t.value("batch_size", rc.train.batch_size);
            rc.train.optimizer.lr = t.value("learning_rate", rc.train.optimizer.lr);
            rc.train.optimizer.weight_decay =
                t.value("weight_decay", rc.train.optimizer.weight_decay);
            rc.train.log_every = t.value("log_every", rc.train.log_every);
            if (t.contains("optimizer"))
                rc.train.optimizer.kind = stim::optimizer_kind_from_string(
                    t["optimizer"].get<std::string>());
        } catch (const json::exception& e) {
            throw stim::ConfigError(std::string("bad train section: ") + e.what());
        }
    }
    return rc;
}

// A data directory holds train/test splits as JSONL (preferred) or CSV.
std::vector<stim::Row> load_split(const std::string& dir, const std::string& split,
                                  const stim::HolidayCalendar* calendar) {
    const fs::path jsonl = fs::path(dir) / (split + ".jsonl");
    const fs::path csv = fs::path(dir) / (split + ".csv");
    stim::LoadReport report;
    std::vector<stim::Row> rows;
    if (fs::exists(jsonl))
        rows = stim::load_jsonl(jsonl.string(), calendar, &report);
    else if (fs::exists(csv))
        rows = stim::load_csv(csv.string(), stim::DatasetSchema{}, calendar, &report);
    else
        throw stim::DataError("no " + split + ".jsonl or " + split + ".csv in " + dir);
    if (report.rows_rejected > 0) {
        std::fprintf(stderr, "warning: rejected %zu malformed rows\n",
                     report.rows_rejected);
        for (const auto& e : report.errors) std::fprintf(stderr, "  %s\n", e.c_str());
    }
    if (rows.empty()) throw stim::DataError(dir + ": " + split + " split is empty");
    return rows;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw stim::DataError("cannot open for writing: " + path);
    out << text;
}

int run(int argc, char** argv) {
    CLI::App app{"Spatiotemporal periodic interest model: training and evaluation"};
    app.require_subcommand(1);

    // gen-synth
    auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic dataset");
    std::string gen_spec, gen_out;
    std::uint64_t gen_seed = 0;
    gen->add_option("--spec", gen_spec, "Synthetic spec JSON (optional)");
    gen->add_option("--seed", gen_seed, "RNG seed")->required();
    gen->add_option("--out", gen_out, "Output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "Train a model");
    std::string train_config, train_data, train_out, train_holidays;
    train->add_option("--config", train_config, "Model/train config JSON")->required();
    train->add_option("--data", train_data, "Data directory")->required();
    train->add_option("--out", train_out, "Checkpoint output path")->required();
    train->add_option("--holidays", train_holidays, "Holiday calendar file");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    std::string eval_ckpt, eval_data, eval_holidays;
    bool eval_cold = false;
    eval->add_option("--ckpt", eval_ckpt, "Checkpoint path")->required();
    eval->add_option("--data", eval_data, "Data directory")->required();
    eval->add_option("--holidays", eval_holidays, "Holiday calendar file");
    eval->add_flag("--cold-start", eval_cold,
                   "Also report the short-history slice");

    // mask-dump
    auto* dump = app.add_subcommand("mask-dump",
                                    "Dump retention trajectories for one request");
    std::string dump_config, dump_request, dump_out;
    dump->add_option("--config", dump_config, "Model config JSON")->required();
    dump->add_option("--request", dump_request, "Single-row JSON file")->required();
    dump->add_option("--out", dump_out, "Output CSV path")->required();

    // ablate
    auto* ablate = app.add_subcommand("ablate", "Run an ablation family");
    std::string ab_config, ab_data, ab_family, ab_out;
    ablate->add_option("--config", ab_config, "Model/train config JSON")->required();
    ablate->add_option("--data", ab_data, "Data directory")->required();
    ablate->add_option("--family", ab_family, "curve, N, M, or grid")->required();
    ablate->add_option("--out", ab_out, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (gen->parsed()) {
        stim::SyntheticSpec spec;
        if (!gen_spec.empty()) spec = stim::SyntheticSpec::load(gen_spec);
        const auto rows = stim::generate_synthetic(spec, gen_seed);
        const auto [train_rows, test_rows] =
            stim::time_split(rows, stim::synthetic_split_boundary(spec));
        fs::create_directories(gen_out);
        const fs::path out(gen_out);
        stim::write_csv((out / "train.csv").string(), train_rows);
        stim::write_csv((out / "test.csv").string(), test_rows);
        stim::write_jsonl((out / "train.jsonl").string(), train_rows);
        stim::write_jsonl((out / "test.jsonl").string(), test_rows);
        std::printf("wrote %zu train rows, %zu test rows to %s\n",
                    train_rows.size(), test_rows.size(), gen_out.c_str());
        std::printf("design positive rate %.4f\n", spec.design_positive_rate());
        return 0;
    }

    if (train->parsed()) {
        RunConfig rc = load_run_config(train_config);
        stim::HolidayCalendar calendar;
        const stim::HolidayCalendar* cal = nullptr;
        if (!train_holidays.empty()) {
            calendar = stim::HolidayCalendar::load(train_holidays);
            cal = &calendar;
        }
        const auto rows = load_split(train_data, "train", cal);
        stim::StimModel model(rc.model);
        const double loss = stim::train_model(model, rows, rc.train);
        model.save(train_out);
        std::printf("trained on %zu rows, final mean loss %.5f\n", rows.size(),
                    loss);
        std::printf("checkpoint: %s (config %s)\n", train_out.c_str(),
                    rc.model.fingerprint().c_str());
        return 0;
    }

    if (eval->parsed()) {
        stim::StimModel model = stim::StimModel::load(eval_ckpt);
        stim::HolidayCalendar calendar;
        const stim::HolidayCalendar* cal = nullptr;
        if (!eval_holidays.empty()) {
            calendar = stim::HolidayCalendar::load(eval_holidays);
            cal = &calendar;
        }
        const auto rows = load_split(eval_data, "test", cal);
        const stim::Task task = model.config().task == stim::Task::Ctcvr
                                    ? stim::Task::Ctcvr
                                    : stim::Task::Ctr;
        const auto report = stim::evaluate_model(model, rows, task);
        std::printf("rows %zu positives %zu\n", report.n_rows, report.n_positive);
        std::printf("auc %.6f\n", report.auc);
        std::printf("gauc %.6f\n", report.gauc);
        if (eval_cold) {
            const auto slice =
                stim::cold_start_slice(rows, model.config().k, 10);
            std::printf("cold_start_rows %zu\n", slice.size());
            try {
                const auto cold = stim::evaluate_cold_start(model, rows, task, 10);
                std::printf("cold_start_auc %.6f\n", cold.auc);
                std::printf("cold_start_gauc %.6f\n", cold.gauc);
            } catch (const stim::UndefinedMetricError& e) {
                std::printf("cold_start_auc undefined (%s)\n", e.what());
            }
        }
        return 0;
    }

    if (dump->parsed()) {
        const RunConfig rc = load_run_config(dump_config);
        const stim::Row row = stim::row_from_json(load_json_file(dump_request));
        const auto compressed = stim::gsu_search(
            row.sequence.events, row.request.category_id, rc.model.k);
        const auto rows =
            stim::dump_trajectory(compressed, row.request, rc.model.masks);
        write_text(dump_out, stim::trajectory_csv(rows));
        std::printf("wrote %zu trajectory rows to %s\n", rows.size(),
                    dump_out.c_str());
        return 0;
    }

    if (ablate->parsed()) {
        const RunConfig rc = load_run_config(ab_config);
        const auto train_rows = load_split(ab_data, "train", nullptr);
        const auto test_rows = load_split(ab_data, "test", nullptr);
        const auto table = stim::run_ablation_suite(rc.model, train_rows,
                                                    test_rows, ab_family,
                                                    rc.train);
        write_text(ab_out, table.to_csv());
        std::printf("%s", table.pretty().c_str());
        std::printf("wrote %s\n", ab_out.c_str());
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const stim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const stim::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
