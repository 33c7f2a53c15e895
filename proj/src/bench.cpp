#include "dsekl/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dsekl/baselines.hpp"
#include "dsekl/data_io.hpp"

namespace dsekl {

Method parse_method(const std::string& name) {
    if (name == "dsekl" || name == "emp") return Method::Dsekl;
    if (name == "rks") return Method::Rks;
    if (name == "empfix") return Method::EmpFix;
    if (name == "batch") return Method::Batch;
    throw std::invalid_argument("unknown method '" + name + "' (expected dsekl, rks, empfix or batch)");
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Dsekl: return "dsekl";
        case Method::Rks: return "rks";
        case Method::EmpFix: return "empfix";
        case Method::Batch: return "batch";
    }
    return "?";
}

TrainConfig make_config(const HyperParams& params, const Budget& budget, std::uint64_t seed, bool cross_validation) {
    TrainConfig c;
    c.grad_batch_size = params.grad_batch_size;
    c.expansion_size = params.expansion_size;
    c.lambda = params.lambda;
    c.eta0 = params.eta0;
    c.schedule = budget.schedule;
    c.max_epochs = cross_validation ? budget.cv_epochs : budget.max_epochs;
    c.stop_weight_delta = budget.stop_weight_delta;
    c.seed = seed;
    return c;
}

namespace {

double rks_objective(const RKSModel& model, const Dataset& data, double lambda) {
    const Eigen::MatrixXd z = rks_transform(data, model.map);
    const Eigen::VectorXd f = z * model.linear.weights;
    double hinge = 0.0;
    for (Index i = 0; i < data.size(); ++i) hinge += std::max(0.0, 1.0 - data.label(i) * f(static_cast<Eigen::Index>(i)));
    return hinge + lambda * model.linear.weights.squaredNorm();
}

/// A run whose final objective exceeds that of the zero model (N) has diverged.
void check_not_diverged(double objective, std::size_t n) {
    if (!(objective <= static_cast<double>(n))) {
        throw std::runtime_error("training diverged: final objective " + std::to_string(objective) +
                                 " exceeds the zero-model value " + std::to_string(n));
    }
}

}  // namespace

double evaluate_method(Method method, const Dataset& train, const Dataset& test, const HyperParams& params,
                       const Budget& budget, std::uint64_t seed, bool cross_validation) {
    const TrainConfig config = make_config(params, budget, seed, cross_validation);
    const KernelSpec spec = KernelSpec::rbf(params.sigma);
    auto shared = std::make_shared<const Dataset>(train);
    std::vector<Index> all(train.size());
    std::iota(all.begin(), all.end(), Index{0});
    // During model selection a diverged run counts as a failed grid point.
    auto guard_dual = [&](const DualModel& m) {
        if (cross_validation) check_not_diverged(objective_value(m, all, params.lambda), train.size());
    };
    std::vector<int> predicted;
    switch (method) {
        case Method::Dsekl: {
            const auto r = train_serial(shared, spec, config);
            guard_dual(r.model);
            predicted = predict(r.model, test);
            break;
        }
        case Method::Rks: {
            const auto m = train_rks(train, params.sigma, params.expansion_size, config);
            if (cross_validation) check_not_diverged(rks_objective(m, train, params.lambda), train.size());
            predicted = m.predict(test);
            break;
        }
        case Method::EmpFix: {
            const auto r = train_fixed_subsample(shared, spec, params.expansion_size, config);
            guard_dual(r.model);
            predicted = predict(r.model, test);
            break;
        }
        case Method::Batch: {
            BatchOptions opts;
            opts.lambda = params.lambda;
            opts.eta0 = params.eta0;
            opts.schedule = budget.schedule;
            opts.max_iters = cross_validation ? budget.cv_batch_max_iters : budget.batch_max_iters;
            const auto r = train_batch(shared, spec, opts);
            guard_dual(r.model);
            predicted = predict(r.model, test);
            break;
        }
    }
    return error_rate(predicted, test.labels());
}

SearchSpace space_for(Method method, const SearchSpace& base) {
    SearchSpace s = base;
    if (method == Method::Batch) {
        s.grad_batch_grid = {base.grad_batch_grid.front()};
        s.expansion_grid = {base.expansion_grid.front()};
    }
    return s;
}

GridSearchResult tune(Method method, const Dataset& train, const SearchSpace& space, const Budget& budget,
                      std::uint64_t seed, std::size_t threads) {
    Rng fold_rng = make_rng(seed, "cv-folds");
    const std::uint64_t train_seed = derive_seed(seed, stream_tag("cv-train"));
    return grid_search(
        train, space_for(method, space),
        [&](const Dataset& fit, const Dataset& holdout, const HyperParams& p) {
            return evaluate_method(method, fit, holdout, p, budget, train_seed, true);
        },
        fold_rng, threads);
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

void BenchmarkReport::finalize() {
    mean = mean_of(errors);
    stddev = stddev_of(errors);
}

nlohmann::json to_json(const BenchmarkReport& r) {
    return {{"method", r.method},   {"dataset", r.dataset},         {"config", r.config},
            {"repetitions", r.errors.size()}, {"errors", r.errors}, {"mean", r.mean},
            {"std", r.stddev},      {"wall_seconds", r.wall_seconds}};
}

namespace {

nlohmann::json params_json(const HyperParams& p) {
    return {{"lambda", p.lambda}, {"sigma", p.sigma}, {"eta0", p.eta0}, {"I", p.grad_batch_size}, {"J", p.expansion_size}};
}

std::uint64_t repetition_seed(std::uint64_t seed, std::size_t rep) { return derive_seed(seed, rep); }

}  // namespace

std::vector<SweepRow> run_xor_sweep(const SweepOptions& options) {
    std::vector<SweepRow> rows;
    std::vector<Method> stochastic;
    bool with_batch = false;
    for (const Method m : options.methods) {
        if (m == Method::Batch) {
            with_batch = true;
        } else {
            stochastic.push_back(m);
        }
    }
    for (const Method m : stochastic) {
        for (const auto v : options.values) rows.push_back({m, v, {}, 0.0, 0.0});
    }
    if (with_batch) rows.push_back({Method::Batch, std::nullopt, {}, 0.0, 0.0});

    for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
        const std::uint64_t seed = repetition_seed(options.seed, rep);
        Rng train_rng = make_rng(seed, "xor-train");
        Rng test_rng = make_rng(seed, "xor-test");
        const Dataset train = generate_xor(options.n_train, train_rng);
        const Dataset test = generate_xor(options.n_test, test_rng);

        for (auto& row : rows) {
            HyperParams p = options.fixed;
            if (row.value) {
                const std::size_t i = options.axis == SweepAxis::I ? *row.value : options.fixed_other;
                const std::size_t j = options.axis == SweepAxis::J ? *row.value : options.fixed_other;
                p.grad_batch_size = i;
                p.expansion_size = j;
            }
            if (options.tune) {
                SearchSpace space = options.space;
                space.grad_batch_grid = {p.grad_batch_size};
                space.expansion_grid = {p.expansion_size};
                p = tune(row.method, train, space, options.budget, seed).best;
            }
            row.errors.push_back(evaluate_method(row.method, train, test, p, options.budget, seed));
        }
    }
    for (auto& row : rows) {
        row.mean = mean_of(row.errors);
        row.stddev = stddev_of(row.errors);
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepRow>& rows) {
    os << "method,axis,value,mean_error,std_error,repetitions\n";
    std::ostringstream line;
    line.precision(10);
    for (const auto& r : rows) {
        line.str("");
        line << to_string(r.method) << ',' << (axis == SweepAxis::I ? "I" : "J") << ',';
        if (r.value) {
            line << *r.value;
        } else {
            line << "ref";
        }
        line << ',' << r.mean << ',' << r.stddev << ',' << r.errors.size() << '\n';
        os << line.str();
    }
}

std::vector<BenchmarkReport> run_table1_dataset(const std::string& name, const Dataset& data,
                                                const Table1Options& options) {
    using Clock = std::chrono::steady_clock;
    std::vector<BenchmarkReport> reports;
    for (const Method m : options.methods) {
        BenchmarkReport r;
        r.method = to_string(m);
        r.dataset = name;
        r.config = {{"max_samples", options.max_samples},
                    {"max_epochs", options.budget.max_epochs},
                    {"cv_epochs", options.budget.cv_epochs},
                    {"batch_max_iters", options.budget.batch_max_iters},
                    {"seed", options.seed},
                    {"selected", nlohmann::json::array()}};
        reports.push_back(std::move(r));
    }
    std::vector<double> seconds(options.methods.size(), 0.0);

    for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
        const std::uint64_t seed = repetition_seed(options.seed, rep);
        Rng rng = make_rng(seed, "table1-split");
        const Dataset sample = subsample(data, options.max_samples, rng);
        const auto halves = split_sizes(sample, {sample.size() / 2, sample.size() - sample.size() / 2}, rng);
        const auto scaled = standardize(halves[0], {halves[1]});

        for (std::size_t k = 0; k < options.methods.size(); ++k) {
            const auto t0 = Clock::now();
            const auto best = tune(options.methods[k], scaled.train, options.space, options.budget, seed, options.threads);
            const double err =
                evaluate_method(options.methods[k], scaled.train, scaled.others[0], best.best, options.budget, seed);
            seconds[k] += std::chrono::duration<double>(Clock::now() - t0).count();
            reports[k].errors.push_back(err);
            reports[k].config["selected"].push_back(params_json(best.best));
        }
    }
    for (std::size_t k = 0; k < reports.size(); ++k) {
        reports[k].wall_seconds = seconds[k];
        reports[k].finalize();
    }
    return reports;
}

Dataset duplicate(const Dataset& data, std::size_t times) {
    std::vector<Index> rows;
    rows.reserve(data.size() * times);
    for (std::size_t t = 0; t < times; ++t) {
        for (Index i = 0; i < data.size(); ++i) rows.push_back(i);
    }
    return data.subset(rows);
}

CovertypeResult run_covertype(const Dataset& data, const CovertypeOptions& options) {
    Rng rng = make_rng(options.seed, "covertype");
    Dataset pool = options.subsample ? subsample(data, *options.subsample, rng) : data;
    const double scale = static_cast<double>(pool.size()) / static_cast<double>(options.full_size);
    auto scaled = [&](std::size_t full, std::size_t floor_value) {
        const auto s = static_cast<std::size_t>(std::llround(static_cast<double>(full) * std::min(1.0, scale)));
        return std::max(s, floor_value);
    };
    CovertypeResult result;
    result.n_validation = scaled(options.validation_size, options.min_validation);
    result.n_evaluation = scaled(options.evaluation_size, options.min_evaluation);
    if (result.n_validation + result.n_evaluation >= pool.size()) {
        throw std::invalid_argument("dataset of " + std::to_string(pool.size()) +
                                    " rows is too small for the validation and evaluation holdouts");
    }
    result.n_train = pool.size() - result.n_validation - result.n_evaluation;
    auto parts = split_sizes(pool, {result.n_train, result.n_validation, result.n_evaluation}, rng);
    if (options.standardize) {
        auto s = standardize(parts[0], {parts[1], parts[2]});
        parts = {std::move(s.train), std::move(s.others[0]), std::move(s.others[1])};
    }
    auto train = std::make_shared<const Dataset>(std::move(parts[0]));
    const Dataset& validation = parts[1];
    const Dataset& evaluation = parts[2];

    const auto batch = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(options.reference_batch_size) * std::min(1.0, scale))));
    TrainConfig& c = result.config;
    c.grad_batch_size = batch;
    c.expansion_size = batch;
    c.lambda = 1.0 / static_cast<double>(train->size());
    c.schedule = StepSchedule::InverseEpoch;
    c.eta0 = options.eta0;
    c.max_epochs = options.max_epochs;
    c.stop_weight_delta = options.stop_weight_delta;
    c.seed = derive_seed(options.seed, stream_tag("covertype-train"));
    c.workers = options.workers;

    const KernelSpec spec = KernelSpec::rbf(options.sigma);
    TrainResult trained = train_parallel(train, spec, c, &validation);
    result.record = std::move(trained.record);
    result.final_error = error_rate(predict(trained.model, evaluation), evaluation.labels());

    if (options.batch_reference_size > 0) {
        Rng sub_rng = make_rng(options.seed, "covertype-batch-subsample");
        auto sub = std::make_shared<const Dataset>(subsample(*train, options.batch_reference_size, sub_rng));
        BatchOptions b;
        b.lambda = 1.0 / static_cast<double>(sub->size());
        b.eta0 = options.eta0;
        b.max_iters = options.batch_max_iters;
        const BatchResult ref = train_batch(sub, spec, b);
        result.batch_error = error_rate(predict(ref.model, evaluation), evaluation.labels());
    }
    return result;
}

}  // namespace dsekl
