#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dsekl/dataset.hpp"
#include "dsekl/model_selection.hpp"
#include "dsekl/optimizer.hpp"
#include "dsekl/parallel.hpp"

namespace dsekl {

enum class Method { Dsekl, Rks, EmpFix, Batch };

Method parse_method(const std::string& name);
std::string to_string(Method m);

/// Iteration budgets shared by every method in an experiment.
struct Budget {
    std::size_t max_epochs = 50;
    std::size_t cv_epochs = 20;
    std::size_t batch_max_iters = 500;
    std::size_t cv_batch_max_iters = 200;
    StepSchedule schedule = StepSchedule::InverseIter;
    double stop_weight_delta = 0.0;
};

TrainConfig make_config(const HyperParams& params, const Budget& budget, std::uint64_t seed, bool cross_validation);

/// Trains `method` on `train` and returns its error on `test`.
double evaluate_method(Method method, const Dataset& train, const Dataset& test, const HyperParams& params,
                       const Budget& budget, std::uint64_t seed, bool cross_validation = false);

/// Search space for a method: batch ignores I/J and RKS/EmpFix ignore nothing.
SearchSpace space_for(Method method, const SearchSpace& base);

/// Grid-searches `method` on `train` with two-fold CV.
GridSearchResult tune(Method method, const Dataset& train, const SearchSpace& space, const Budget& budget,
                      std::uint64_t seed, std::size_t threads = 1);

struct BenchmarkReport {
    std::string method;
    std::string dataset;
    nlohmann::json config;
    std::vector<double> errors;
    double mean = 0.0;
    double stddev = 0.0;
    double wall_seconds = 0.0;

    /// Recomputes mean and sample standard deviation from `errors`.
    void finalize();
};

nlohmann::json to_json(const BenchmarkReport& report);

double mean_of(const std::vector<double>& v);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev_of(const std::vector<double>& v);

// XOR sweeps ----------------------------------------------------------------

enum class SweepAxis { I, J };

struct SweepOptions {
    SweepAxis axis = SweepAxis::I;
    std::vector<std::size_t> values{1, 5, 10, 20, 50};
    std::size_t fixed_other = 20;
    std::vector<Method> methods{Method::Dsekl, Method::Rks, Method::EmpFix, Method::Batch};
    std::size_t repetitions = 10;
    std::size_t n_train = 100;
    std::size_t n_test = 100;
    std::uint64_t seed = 0;
    Budget budget;
    /// Tune lambda, sigma and eta0 per repetition and method; otherwise use `fixed`.
    bool tune = true;
    SearchSpace space;
    HyperParams fixed;
};

struct SweepRow {
    Method method;
    std::optional<std::size_t> value;  ///< empty for the batch reference row
    std::vector<double> errors;
    double mean = 0.0;
    double stddev = 0.0;
};

/// Runs each method over the swept axis on fresh XOR draws per repetition.
std::vector<SweepRow> run_xor_sweep(const SweepOptions& options);
void write_sweep_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepRow>& rows);

// Real-data comparison ------------------------------------------------------

struct Table1Options {
    std::size_t max_samples = 1000;
    std::size_t repetitions = 10;
    std::uint64_t seed = 0;
    Budget budget;
    SearchSpace space;
    std::size_t threads = 1;
    std::vector<Method> methods{Method::Dsekl, Method::Batch};
};

/// Subsample, half/half split, standardize on train, tune on train, test.
std::vector<BenchmarkReport> run_table1_dataset(const std::string& name, const Dataset& data,
                                                const Table1Options& options);

// Large-data protocol --------------------------------------------------------

struct CovertypeOptions {
    std::optional<std::size_t> subsample;
    std::size_t full_size = 581012;
    std::size_t reference_batch_size = 10000;
    std::size_t validation_size = 1122;
    std::size_t evaluation_size = 20000;
    std::size_t min_validation = 200;
    std::size_t min_evaluation = 1000;
    double sigma = 1.0;
    double eta0 = 1.0;
    double stop_weight_delta = 1.0;
    std::size_t max_epochs = 100;
    std::size_t workers = 1;
    bool standardize = true;
    /// Size of the training sub-subsample for the batch reference; 0 skips it.
    std::size_t batch_reference_size = 0;
    std::size_t batch_max_iters = 300;
    std::uint64_t seed = 0;
};

struct CovertypeResult {
    TrainConfig config;
    RunRecord record;
    std::size_t n_train = 0;
    std::size_t n_validation = 0;
    std::size_t n_evaluation = 0;
    double final_error = 0.0;
    std::optional<double> batch_error;
};

CovertypeResult run_covertype(const Dataset& data, const CovertypeOptions& options);

/// The dataset repeated `times` times.
Dataset duplicate(const Dataset& data, std::size_t times);

}  // namespace dsekl
