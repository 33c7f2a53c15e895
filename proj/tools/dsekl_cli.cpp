// Command-line front end: training, prediction and the benchmark protocols.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dsekl/baselines.hpp"
#include "dsekl/bench.hpp"
#include "dsekl/data_io.hpp"
#include "dsekl/model_io.hpp"
#include "dsekl/model_selection.hpp"
#include "dsekl/optimizer.hpp"
#include "dsekl/parallel.hpp"

namespace fs = std::filesystem;
using namespace dsekl;

namespace {

/// Resolves a dataset path, falling back to $DSEKL_DATA_DIR.
std::string resolve_data_path(const std::string& path) {
    if (fs::exists(path)) return path;
    if (const char* root = std::getenv("DSEKL_DATA_DIR")) {
        const fs::path candidate = fs::path(root) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    throw std::runtime_error("dataset file '" + path + "' not found (also looked under $DSEKL_DATA_DIR)");
}

Dataset load_dataset(const std::string& path, std::optional<std::size_t> dim) {
    LibsvmOptions opts;
    opts.dim = dim;
    return load_libsvm(resolve_data_path(path), opts);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

struct GridFlags {
    std::vector<double> lambda;
    std::vector<double> sigma;
    std::vector<double> eta0;
    std::vector<std::size_t> i_values;
    std::vector<std::size_t> j_values;

    void add(CLI::App* cmd) {
        cmd->add_option("--lambda-grid", lambda, "Regularization grid (default 1e-6..1e6, 13 points)")->delimiter(',');
        cmd->add_option("--sigma-grid", sigma, "RBF bandwidth grid (default 1e-6..1e6, 13 points)")->delimiter(',');
        cmd->add_option("--eta0-grid", eta0, "Step-size grid (default 1e-4..1e4, 9 points)")->delimiter(',');
        cmd->add_option("--I-grid", i_values, "Gradient batch sizes")->delimiter(',');
        cmd->add_option("--J-grid", j_values, "Expansion sizes")->delimiter(',');
    }

    SearchSpace space() const {
        SearchSpace s;
        if (!lambda.empty()) s.lambda_grid = lambda;
        if (!sigma.empty()) s.sigma_grid = sigma;
        if (!eta0.empty()) s.eta0_grid = eta0;
        if (!i_values.empty()) s.grad_batch_grid = i_values;
        if (!j_values.empty()) s.expansion_grid = j_values;
        return s;
    }
};

struct BudgetFlags {
    Budget budget;
    std::string schedule = "iter";

    void add(CLI::App* cmd) {
        cmd->add_option("--epochs", budget.max_epochs, "Training epochs")->capture_default_str();
        cmd->add_option("--cv-epochs", budget.cv_epochs, "Epochs per cross-validation fit")->capture_default_str();
        cmd->add_option("--batch-iters", budget.batch_max_iters, "Batch solver iterations")->capture_default_str();
        cmd->add_option("--cv-batch-iters", budget.cv_batch_max_iters, "Batch iterations per CV fit")
            ->capture_default_str();
        cmd->add_option("--schedule", schedule, "Step schedule: iter (eta0/t) or epoch (eta0/epoch)")
            ->capture_default_str();
    }

    Budget get() const {
        Budget b = budget;
        b.schedule = parse_schedule(schedule);
        return b;
    }
};

int run_train(const std::string& data_path, const std::string& validation_path, std::optional<std::size_t> dim,
              const std::string& method_name, const std::string& kernel, double sigma, TrainConfig config,
              const std::string& schedule, bool no_dampening, bool fixed_blocks, bool standardize_data,
              std::size_t batch_iters, const std::string& model_path, const std::string& metrics_path) {
    config.schedule = parse_schedule(schedule);
    config.dampening = !no_dampening;
    config.resample_blocks = !fixed_blocks;
    const Method method = parse_method(method_name);

    Dataset train = load_dataset(data_path, dim);
    std::optional<Dataset> validation;
    if (!validation_path.empty()) validation = load_dataset(validation_path, train.n_features());
    std::optional<Standardizer> scaler;
    if (standardize_data) {
        scaler = Standardizer::fit(train);
        train = scaler->apply(train);
        if (validation) validation = scaler->apply(*validation);
    }
    auto shared = std::make_shared<const Dataset>(std::move(train));
    const KernelSpec spec = parse_kernel_spec(kernel, sigma);
    const Dataset* val = validation ? &*validation : nullptr;

    SavedModel saved;
    saved.scaler = scaler;
    saved.n_train = shared->size();
    RunRecord record;
    switch (method) {
        case Method::Dsekl: {
            auto result = config.workers > 1 || config.blocks > 0 ? train_parallel(shared, spec, config, val)
                                                                  : train_serial(shared, spec, config, val);
            record = std::move(result.record);
            saved.model = std::move(result.model);
            break;
        }
        case Method::EmpFix: {
            auto result = train_fixed_subsample(shared, spec, config.expansion_size, config, val);
            record = std::move(result.record);
            saved.model = std::move(result.model);
            break;
        }
        case Method::Rks:
            saved.model = train_rks(*shared, sigma, config.expansion_size, config);
            break;
        case Method::Batch: {
            BatchOptions opts;
            opts.lambda = config.lambda;
            opts.eta0 = config.eta0;
            opts.schedule = config.schedule;
            opts.max_iters = batch_iters;
            auto result = train_batch(shared, spec, opts);
            record.iterations = result.iterations;
            record.checkpoints.push_back({result.iterations, static_cast<double>(result.iterations), result.objective,
                                          val ? error_rate(predict(result.model, *val), val->labels())
                                              : std::numeric_limits<double>::quiet_NaN(),
                                          0.0});
            saved.model = std::move(result.model);
            break;
        }
    }
    save_model_file(model_path, saved);
    if (!metrics_path.empty()) {
        std::ofstream out(metrics_path);
        if (!out) throw std::runtime_error("cannot write '" + metrics_path + "'");
        write_run_record_csv(out, record);
    }
    std::cerr << "trained " << method_name << " on " << shared->size() << " rows; model written to " << model_path
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Doubly stochastic empirical kernel learning"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value configuration file; command-line flags take precedence");

    // train ------------------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train a model and write it as DSEKL-MODEL-v1");
    std::string data_path;
    std::string validation_path;
    std::string method = "dsekl";
    std::string kernel = "rbf";
    double sigma = 1.0;
    std::optional<std::size_t> dim;
    TrainConfig config;
    std::string schedule = "iter";
    bool no_dampening = false;
    bool fixed_blocks = false;
    bool standardize_data = false;
    std::size_t batch_iters = 1000;
    std::string model_path = "model.dsekl";
    std::string metrics_path;
    train->add_option("--data", data_path, "Training data (libsvm format)")->required();
    train->add_option("--validation", validation_path, "Validation data tracked at checkpoints");
    train->add_option("--method", method, "dsekl, rks, empfix or batch")->capture_default_str();
    train->add_option("--kernel", kernel, "rbf or linear")->capture_default_str();
    train->add_option("--sigma", sigma, "RBF bandwidth")->capture_default_str();
    train->add_option("--dim", dim, "Feature dimension override");
    train->add_option("--I", config.grad_batch_size, "Gradient batch size")->capture_default_str();
    train->add_option("--J", config.expansion_size, "Expansion size / random features / landmarks")
        ->capture_default_str();
    train->add_option("--lambda", config.lambda, "Regularization strength")->capture_default_str();
    train->add_option("--eta0", config.eta0, "Step-size multiplier")->capture_default_str();
    train->add_option("--schedule", schedule, "iter (eta0/t) or epoch (eta0/epoch)")->capture_default_str();
    train->add_option("--epochs", config.max_epochs, "Maximum epochs")->capture_default_str();
    train->add_option("--stop-delta", config.stop_weight_delta, "Stop when the epoch alpha change is below this")
        ->capture_default_str();
    train->add_option("--seed", config.seed, "Root random seed")->capture_default_str();
    train->add_option("--workers", config.workers, "Worker threads (>1 selects the parallel engine)")
        ->capture_default_str();
    train->add_option("--blocks", config.blocks, "Blocks per family for the parallel engine (0 = N / batch)");
    train->add_flag("--no-dampening", no_dampening, "Parallel engine: disable the squared-gradient dampening");
    train->add_flag("--fixed-blocks", fixed_blocks, "Parallel engine: draw the block partition once");
    train->add_flag("--standardize", standardize_data, "Standardize features with training statistics");
    train->add_option("--batch-iters", batch_iters, "Iterations for --method batch")->capture_default_str();
    train->add_option("--model", model_path, "Output model file")->capture_default_str();
    train->add_option("--metrics", metrics_path, "Output checkpoint CSV");

    // predict ----------------------------------------------------------------
    auto* pred = app.add_subcommand("predict", "Predict labels with a saved model");
    std::string pred_model;
    std::string pred_data;
    std::string pred_out;
    pred->add_option("--model", pred_model, "Model file")->required();
    pred->add_option("--data", pred_data, "Data to score (libsvm format)")->required();
    pred->add_option("--output", pred_out, "Write one 'label decision_value' line per row");

    // sweep ------------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "Error versus I or J on the XOR problem");
    SweepOptions sweep_opts;
    std::string axis = "I";
    std::vector<std::string> sweep_methods{"dsekl", "rks", "empfix", "batch"};
    bool no_tune = false;
    GridFlags sweep_grid;
    BudgetFlags sweep_budget;
    std::string sweep_out;
    sweep->add_option("--axis", axis, "I or J")->capture_default_str();
    sweep->add_option("--values", sweep_opts.values, "Values of the swept axis")->delimiter(',');
    sweep->add_option("--fixed", sweep_opts.fixed_other, "Value of the other axis")->capture_default_str();
    sweep->add_option("--methods", sweep_methods, "Subset of dsekl,rks,empfix,batch")->delimiter(',');
    sweep->add_option("--reps", sweep_opts.repetitions, "Repetitions")->capture_default_str();
    sweep->add_option("--n-train", sweep_opts.n_train, "Training points per repetition")->capture_default_str();
    sweep->add_option("--n-test", sweep_opts.n_test, "Test points per repetition")->capture_default_str();
    sweep->add_option("--seed", sweep_opts.seed, "Root seed")->capture_default_str();
    sweep->add_flag("--no-tune", no_tune, "Use --lambda/--sigma/--eta0 instead of grid search");
    sweep->add_option("--lambda", sweep_opts.fixed.lambda)->capture_default_str();
    sweep->add_option("--sigma", sweep_opts.fixed.sigma)->capture_default_str();
    sweep->add_option("--eta0", sweep_opts.fixed.eta0)->capture_default_str();
    sweep->add_option("--out", sweep_out, "Output CSV (default stdout)");
    sweep_grid.add(sweep);
    sweep_budget.add(sweep);

    // table1 -----------------------------------------------------------------
    auto* table1 = app.add_subcommand("table1", "Real-data comparison of DSEKL and the batch solver");
    std::vector<std::string> datasets{"diabetes", "breast-cancer", "sonar", "mushrooms"};
    Table1Options t1;
    GridFlags t1_grid;
    BudgetFlags t1_budget;
    std::string t1_out;
    std::string t1_dir;
    table1->add_option("--datasets", datasets, "Dataset names; files <name>.libsvm")->delimiter(',');
    table1->add_option("--data-dir", t1_dir, "Directory with the libsvm files (default $DSEKL_DATA_DIR)");
    table1->add_option("--reps", t1.repetitions, "Repetitions")->capture_default_str();
    table1->add_option("--max-samples", t1.max_samples, "Subsample size per repetition")->capture_default_str();
    table1->add_option("--seed", t1.seed, "Root seed")->capture_default_str();
    table1->add_option("--threads", t1.threads, "Grid-search threads")->capture_default_str();
    table1->add_option("--out", t1_out, "JSON report (default stdout)");
    t1_grid.add(table1);
    t1_budget.add(table1);

    // covertype --------------------------------------------------------------
    auto* cov = app.add_subcommand("covertype", "Large-data protocol with the parallel engine");
    CovertypeOptions cov_opts;
    std::string cov_data = "covtype.libsvm";
    std::size_t cov_subsample = 0;
    std::string cov_metrics;
    bool cov_raw = false;
    cov->add_option("--data", cov_data, "Covertype in libsvm format")->capture_default_str();
    cov->add_option("--subsample", cov_subsample, "Desk-scale subsample size (0 = full data)");
    cov->add_option("--workers", cov_opts.workers, "Worker threads")->capture_default_str();
    cov->add_option("--epochs", cov_opts.max_epochs, "Epoch cap")->capture_default_str();
    cov->add_option("--stop-delta", cov_opts.stop_weight_delta, "Epoch alpha-change threshold")->capture_default_str();
    cov->add_option("--sigma", cov_opts.sigma, "RBF bandwidth")->capture_default_str();
    cov->add_option("--batch-reference", cov_opts.batch_reference_size,
                    "Also train the batch solver on this many training points");
    cov->add_option("--seed", cov_opts.seed, "Root seed")->capture_default_str();
    cov->add_flag("--raw", cov_raw, "Skip feature standardization");
    cov->add_option("--metrics", cov_metrics, "Validation curve CSV");

    // speedup ----------------------------------------------------------------
    auto* speed = app.add_subcommand("speedup", "Runtime of one gradient batch against all expansion blocks");
    std::string speed_data;
    std::size_t speed_xor = 0;
    std::vector<std::size_t> speed_workers{1, 2, 4};
    std::size_t duplicate_times = 1;
    std::size_t repeats = 3;
    TrainConfig speed_cfg;
    double speed_sigma = 1.0;
    std::string speed_out;
    speed_cfg.grad_batch_size = 1000;
    speed_cfg.expansion_size = 1000;
    speed->add_option("--data", speed_data, "Dataset (libsvm format)");
    speed->add_option("--xor", speed_xor, "Use an XOR dataset of this size instead of --data");
    speed->add_option("--workers", speed_workers, "Worker counts")->delimiter(',');
    speed->add_option("--I", speed_cfg.grad_batch_size)->capture_default_str();
    speed->add_option("--J", speed_cfg.expansion_size)->capture_default_str();
    speed->add_option("--blocks", speed_cfg.blocks, "Expansion blocks (0 = N / J)");
    speed->add_option("--sigma", speed_sigma)->capture_default_str();
    speed->add_option("--duplicate", duplicate_times, "Repeat the dataset this many times")->capture_default_str();
    speed->add_option("--repeats", repeats, "Timing repeats per row (fastest kept)")->capture_default_str();
    speed->add_option("--seed", speed_cfg.seed)->capture_default_str();
    speed->add_option("--out", speed_out, "CSV output (default stdout)");

    // gridsearch -------------------------------------------------------------
    auto* gs = app.add_subcommand("gridsearch", "Two-fold cross-validated grid search");
    std::string gs_data;
    std::string gs_method = "dsekl";
    GridFlags gs_grid;
    BudgetFlags gs_budget;
    std::uint64_t gs_seed = 0;
    std::size_t gs_threads = 1;
    bool gs_standardize = false;
    std::string gs_out;
    gs->add_option("--data", gs_data, "Training data (libsvm format)")->required();
    gs->add_option("--method", gs_method, "dsekl, rks, empfix or batch")->capture_default_str();
    gs->add_option("--seed", gs_seed)->capture_default_str();
    gs->add_option("--threads", gs_threads)->capture_default_str();
    gs->add_flag("--standardize", gs_standardize, "Standardize features first");
    gs->add_option("--out", gs_out, "CV table CSV (default stdout)");
    gs_grid.add(gs);
    gs_budget.add(gs);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            return run_train(data_path, validation_path, dim, method, kernel, sigma, config, schedule, no_dampening,
                             fixed_blocks, standardize_data, batch_iters, model_path, metrics_path);
        }
        if (*pred) {
            const SavedModel model = load_model_file(pred_model);
            const std::size_t model_dim =
                model.scaler ? model.scaler->mean.size()
                             : std::visit([](const auto& m) {
                                   using T = std::decay_t<decltype(m)>;
                                   if constexpr (std::is_same_v<T, DualModel>) {
                                       return m.expansion->n_features();
                                   } else {
                                       return m.map.input_dim();
                                   }
                               },
                                          model.model);
            Dataset data = load_dataset(pred_data, std::nullopt);
            data.set_n_features(model_dim);
            const auto f = model.decision_values(data);
            std::vector<int> labels(f.size());
            std::string lines;
            for (std::size_t i = 0; i < f.size(); ++i) {
                labels[i] = sign_label(f[i]);
                lines += (labels[i] > 0 ? "+1 " : "-1 ") + std::to_string(f[i]) + '\n';
            }
            if (!pred_out.empty()) write_text(pred_out, lines);
            std::cout << "error " << error_rate(labels, data.labels()) << " on " << data.size() << " rows\n";
            return 0;
        }
        if (*sweep) {
            if (axis == "I") {
                sweep_opts.axis = SweepAxis::I;
            } else if (axis == "J") {
                sweep_opts.axis = SweepAxis::J;
            } else {
                throw std::invalid_argument("--axis must be I or J");
            }
            sweep_opts.methods.clear();
            for (const auto& m : sweep_methods) sweep_opts.methods.push_back(parse_method(m));
            sweep_opts.tune = !no_tune;
            sweep_opts.space = sweep_grid.space();
            sweep_opts.budget = sweep_budget.get();
            const auto rows = run_xor_sweep(sweep_opts);
            std::ostringstream os;
            write_sweep_csv(os, sweep_opts.axis, rows);
            write_text(sweep_out, os.str());
            return 0;
        }
        if (*table1) {
            t1.space = t1_grid.space();
            t1.budget = t1_budget.get();
            std::string dir = t1_dir;
            if (dir.empty()) {
                const char* env = std::getenv("DSEKL_DATA_DIR");
                dir = env ? env : ".";
            }
            nlohmann::json out = nlohmann::json::array();
            for (const auto& name : datasets) {
                const fs::path file = fs::path(dir) / (name + ".libsvm");
                if (!fs::exists(file)) {
                    std::cerr << "warning: " << file.string() << " not found, skipping " << name << '\n';
                    continue;
                }
                const Dataset data = load_libsvm(file.string());
                for (const auto& r : run_table1_dataset(name, data, t1)) {
                    std::cerr << name << ' ' << r.method << ' ' << r.mean << " +- " << r.stddev << '\n';
                    out.push_back(to_json(r));
                }
            }
            write_text(t1_out, out.dump(2) + "\n");
            return 0;
        }
        if (*cov) {
            if (cov_subsample > 0) cov_opts.subsample = cov_subsample;
            cov_opts.standardize = !cov_raw;
            const Dataset data = load_dataset(cov_data, std::nullopt);
            const auto result = run_covertype(data, cov_opts);
            if (!cov_metrics.empty()) {
                std::ofstream out(cov_metrics);
                write_run_record_csv(out, result.record);
            }
            nlohmann::json j = {{"n_train", result.n_train},
                                {"n_validation", result.n_validation},
                                {"n_evaluation", result.n_evaluation},
                                {"I", result.config.grad_batch_size},
                                {"J", result.config.expansion_size},
                                {"lambda", result.config.lambda},
                                {"epochs", result.record.epochs_completed},
                                {"converged", result.record.converged},
                                {"final_error", result.final_error}};
            if (result.batch_error) j["batch_error"] = *result.batch_error;
            std::cout << j.dump(2) << '\n';
            return 0;
        }
        if (*speed) {
            Dataset data;
            if (speed_xor > 0) {
                Rng rng = make_rng(speed_cfg.seed, "speedup-xor");
                data = generate_xor(speed_xor, rng);
            } else if (!speed_data.empty()) {
                data = load_dataset(speed_data, std::nullopt);
            } else {
                throw std::invalid_argument("speedup needs --data or --xor");
            }
            if (duplicate_times > 1) data = duplicate(data, duplicate_times);
            const auto rows = measure_speedup(data, KernelSpec::rbf(speed_sigma), speed_cfg, speed_workers, repeats);
            std::ostringstream os;
            write_speedup_csv(os, rows);
            write_text(speed_out, os.str());
            return 0;
        }
        if (*gs) {
            Dataset data = load_dataset(gs_data, std::nullopt);
            if (gs_standardize) data = Standardizer::fit(data).apply(data);
            const auto result =
                tune(parse_method(gs_method), data, gs_grid.space(), gs_budget.get(), gs_seed, gs_threads);
            std::ostringstream os;
            write_cv_table_csv(os, result.table);
            write_text(gs_out, os.str());
            std::cerr << "best lambda=" << result.best.lambda << " sigma=" << result.best.sigma
                      << " eta0=" << result.best.eta0 << " I=" << result.best.grad_batch_size
                      << " J=" << result.best.expansion_size << " cv_error=" << result.best_error << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
