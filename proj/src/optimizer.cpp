#include "dsekl/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dsekl/rng.hpp"

namespace dsekl {

StepSchedule parse_schedule(const std::string& name) {
    if (name == "iter" || name == "inverse_iter" || name == "1/t") return StepSchedule::InverseIter;
    if (name == "epoch" || name == "inverse_epoch" || name == "1/epoch") return StepSchedule::InverseEpoch;
    throw std::invalid_argument("unknown step schedule '" + name + "' (expected iter or epoch)");
}

std::string to_string(StepSchedule s) { return s == StepSchedule::InverseIter ? "iter" : "epoch"; }

void TrainConfig::validate() const {
    if (grad_batch_size == 0) throw std::invalid_argument("gradient batch size I must be positive");
    if (expansion_size == 0) throw std::invalid_argument("expansion size J must be positive");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
    if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw std::invalid_argument("eta0 must be positive");
    if (!(stop_weight_delta >= 0.0)) throw std::invalid_argument("stop_weight_delta must be non-negative");
    if (workers == 0) throw std::invalid_argument("workers must be positive");
}

void write_run_record_csv(std::ostream& os, const RunRecord& record) {
    os << "iteration,epoch,objective_estimate,validation_error,elapsed_seconds\n";
    std::ostringstream line;
    line.precision(10);
    for (const auto& c : record.checkpoints) {
        line.str("");
        line << c.iteration << ',' << c.epoch << ',' << c.objective_estimate << ',';
        if (std::isnan(c.validation_error)) {
            line << "nan";
        } else {
            line << c.validation_error;
        }
        line << ',' << c.elapsed_seconds << '\n';
        os << line.str();
    }
}

void require_binary_labels(const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("training set is empty");
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int y = data.label(i);
        if (y != -1 && y != 1) {
            throw std::invalid_argument("label at row " + std::to_string(i) + " is " + std::to_string(y) +
                                        ", expected -1 or +1");
        }
    }
}

double step_size(StepSchedule schedule, double eta0, std::size_t iteration, std::size_t epoch) {
    const auto denom = schedule == StepSchedule::InverseIter ? iteration : epoch;
    return eta0 / static_cast<double>(denom);
}

namespace {

using Clock = std::chrono::steady_clock;

double validation_error(const DualModel& model, const Dataset* validation) {
    if (validation == nullptr || validation->empty()) return std::numeric_limits<double>::quiet_NaN();
    return error_rate(predict(model, *validation), validation->labels());
}

double squared_l2(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s += x * x;
    return s;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

/// Shared loop behind train_serial and the fixed-subsample baseline.
TrainResult run_stochastic(std::shared_ptr<const Dataset> data, const KernelSpec& spec, const TrainConfig& config,
                           const std::optional<std::vector<Index>>& fixed_expansion, const Dataset* validation,
                           const AlphaObserver& observer) {
    if (!data) throw std::invalid_argument("training set is null");
    require_binary_labels(*data);
    config.validate();
    spec.validate();

    const std::size_t n = data->size();
    const bool full_sweep = config.sampling == SamplingMode::FullSweep;
    const std::size_t grad_size = full_sweep ? n : std::min(config.grad_batch_size, n);
    const std::size_t iters_per_epoch = (n + grad_size - 1) / grad_size;

    Rng grad_rng = make_rng(config.seed, "gradient-batch");
    Rng expansion_rng = make_rng(config.seed, "expansion-batch");
    std::vector<Index> all(n);
    std::iota(all.begin(), all.end(), Index{0});

    TrainResult result{DualModel(data, spec), {}};
    DualModel& model = result.model;
    RunRecord& record = result.record;
    const auto start = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

    record.checkpoints.push_back(
        {0, 0.0, static_cast<double>(n), validation_error(model, validation), elapsed()});

    std::vector<double> epoch_start = model.alpha;
    double epoch_objective_sum = 0.0;
    std::size_t t = 0;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        for (std::size_t step = 0; step < iters_per_epoch; ++step) {
            ++t;
            std::vector<Index> grad_batch = full_sweep ? all : sample_indices(n, grad_size, grad_rng);
            std::vector<Index> expansion;
            if (fixed_expansion) {
                expansion = *fixed_expansion;
            } else if (full_sweep) {
                expansion = all;
            } else {
                expansion = sample_indices(n, config.expansion_size, expansion_rng);
            }
            record.peak_block_elements = std::max(record.peak_block_elements, grad_batch.size() * expansion.size());

            const BlockGradient g = block_subgradient(model, grad_batch, expansion, config.lambda);
            const double estimate = static_cast<double>(n) / static_cast<double>(grad_batch.size()) * g.hinge_sum +
                                    config.lambda * squared_l2(model.alpha);
            epoch_objective_sum += estimate;

            const double eta = step_size(config.schedule, config.eta0, t, epoch);
            for (std::size_t b = 0; b < expansion.size(); ++b) {
                const double gj = g.gradient.values[b];
                if (!std::isfinite(gj)) {
                    std::ostringstream msg;
                    msg << "non-finite gradient at iteration " << t << " for coefficient " << expansion[b] << " ("
                        << gj << "); alpha_j = " << model.alpha[expansion[b]] << ", eta = " << eta;
                    throw std::runtime_error(msg.str());
                }
                model.alpha[expansion[b]] -= eta * gj;
            }
            if (observer) observer(t, model.alpha);

            if (t <= 10 && step + 1 < iters_per_epoch) {
                record.checkpoints.push_back({t, static_cast<double>(t) / static_cast<double>(iters_per_epoch),
                                              estimate, validation_error(model, validation), elapsed()});
            }
        }
        record.iterations = t;
        record.epochs_completed = epoch;
        record.checkpoints.push_back({t, static_cast<double>(epoch),
                                      epoch_objective_sum / static_cast<double>(iters_per_epoch),
                                      validation_error(model, validation), elapsed()});
        epoch_objective_sum = 0.0;

        if (l2_distance(model.alpha, epoch_start) < config.stop_weight_delta) {
            record.converged = true;
            break;
        }
        epoch_start = model.alpha;
    }
    return result;
}

}  // namespace

TrainResult train_serial(std::shared_ptr<const Dataset> data, const KernelSpec& spec, const TrainConfig& config,
                         const Dataset* validation, const AlphaObserver& observer) {
    return run_stochastic(std::move(data), spec, config, std::nullopt, validation, observer);
}

TrainResult train_with_fixed_expansion(std::shared_ptr<const Dataset> data, const KernelSpec& spec,
                                       const TrainConfig& config, std::vector<Index> expansion,
                                       const Dataset* validation, const AlphaObserver& observer) {
    if (expansion.empty()) throw std::invalid_argument("fixed expansion set must be non-empty");
    return run_stochastic(std::move(data), spec, config, std::move(expansion), validation, observer);
}

}  // namespace dsekl
