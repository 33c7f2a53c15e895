#include "dsekl/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dsekl/worker_pool.hpp"

namespace dsekl {

void DampeningAccumulator::accumulate(const SparseGradient& gradient) {
    for (std::size_t b = 0; b < gradient.indices.size(); ++b) {
        const double v = gradient.values[b];
        g_[gradient.indices[b]] += v * v;
    }
}

double DampeningAccumulator::inverse_sqrt(Index j) const { return 1.0 / std::sqrt(g_[j]); }

std::vector<std::vector<Index>> draw_disjoint_batches(std::size_t n, std::size_t batch_size, std::size_t count,
                                                      Rng& rng, std::vector<std::string>* warnings) {
    if (n == 0 || batch_size == 0 || count == 0) return {};
    if (batch_size > n) {
        if (warnings) {
            warnings->push_back("batch size " + std::to_string(batch_size) + " exceeds population " +
                                std::to_string(n) + "; using a single batch of all indices");
        }
        batch_size = n;
    }
    const std::size_t fit = n / batch_size;
    if (count > fit) {
        if (warnings) {
            warnings->push_back("requested " + std::to_string(count) + " disjoint batches of " +
                                std::to_string(batch_size) + " from " + std::to_string(n) + " indices; using " +
                                std::to_string(fit));
        }
        count = fit;
    }
    const std::vector<Index> drawn = sample_indices(n, batch_size * count, rng);
    std::vector<std::vector<Index>> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        out[k].assign(drawn.begin() + static_cast<std::ptrdiff_t>(k * batch_size),
                      drawn.begin() + static_cast<std::ptrdiff_t>((k + 1) * batch_size));
    }
    return out;
}

BatchPartition partition_batches(std::size_t n, std::size_t batch_size, std::size_t k_workers, Rng& rng) {
    BatchPartition p;
    p.grad_batches = draw_disjoint_batches(n, batch_size, k_workers, rng, &p.warnings);
    p.expansion_batches = draw_disjoint_batches(n, batch_size, k_workers, rng, &p.warnings);
    return p;
}

namespace {

using Clock = std::chrono::steady_clock;

double validation_error(const DualModel& model, const Dataset* validation) {
    if (validation == nullptr || validation->empty()) return std::numeric_limits<double>::quiet_NaN();
    return error_rate(predict(model, *validation), validation->labels());
}

}  // namespace

TrainResult train_parallel(std::shared_ptr<const Dataset> data, const KernelSpec& spec, const TrainConfig& config,
                           const Dataset* validation, const AlphaObserver& observer) {
    if (!data) throw std::invalid_argument("training set is null");
    require_binary_labels(*data);
    config.validate();
    spec.validate();
    if (config.sampling != SamplingMode::Random) {
        throw std::invalid_argument("the parallel engine only supports random sampling");
    }

    const std::size_t n = data->size();
    const std::size_t grad_size = std::min(config.grad_batch_size, n);
    const std::size_t exp_size = std::min(config.expansion_size, n);
    const std::size_t grad_blocks = config.blocks ? config.blocks : std::max<std::size_t>(1, n / grad_size);
    const std::size_t exp_blocks = config.blocks ? config.blocks : std::max<std::size_t>(1, n / exp_size);
    const std::size_t grad_blocks_eff = std::min(grad_blocks, n / grad_size);
    const std::size_t rounds_per_epoch = (n + grad_blocks_eff * grad_size - 1) / (grad_blocks_eff * grad_size);

    Rng grad_rng = make_rng(config.seed, "gradient-batch");
    Rng expansion_rng = make_rng(config.seed, "expansion-batch");
    WorkerPool pool(config.workers);
    DampeningAccumulator dampening(n);

    TrainResult result{DualModel(data, spec), {}};
    DualModel& model = result.model;
    RunRecord& record = result.record;
    const auto start = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
    record.checkpoints.push_back({0, 0.0, static_cast<double>(n), validation_error(model, validation), elapsed()});

    std::vector<std::vector<Index>> grad_batches;
    std::vector<std::vector<Index>> exp_batches;
    std::vector<BlockGradient> block_grads;
    const std::size_t steps_per_epoch = rounds_per_epoch * grad_blocks_eff;
    std::vector<double> epoch_start = model.alpha;
    double epoch_objective_sum = 0.0;
    std::size_t t = 0;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        for (std::size_t round = 0; round < rounds_per_epoch; ++round) {
            if (config.resample_blocks || grad_batches.empty()) {
                grad_batches = draw_disjoint_batches(n, grad_size, grad_blocks, grad_rng);
                exp_batches = draw_disjoint_batches(n, exp_size, exp_blocks, expansion_rng);
                block_grads.assign(exp_batches.size(), {});
            }
            for (const auto& grad_batch : grad_batches) {
                ++t;
                record.peak_block_elements = std::max(record.peak_block_elements, grad_batch.size() * exp_size);
                // Workers only read alpha; it is mutated after the barrier below.
                pool.run(exp_batches.size(), [&](std::size_t k) {
                    block_grads[k] = block_subgradient(model, grad_batch, exp_batches[k], config.lambda);
                });

                double hinge = 0.0;
                for (std::size_t k = 0; k < block_grads.size(); ++k) {
                    const auto& g = block_grads[k].gradient;
                    for (std::size_t b = 0; b < g.values.size(); ++b) {
                        if (!std::isfinite(g.values[b])) {
                            std::ostringstream msg;
                            msg << "non-finite gradient at step " << t << " from worker block " << k
                                << " for coefficient " << g.indices[b] << "; no update applied";
                            throw std::runtime_error(msg.str());
                        }
                    }
                    hinge += block_grads[k].hinge_sum;
                }
                double reg = 0.0;
                for (const double a : model.alpha) reg += a * a;
                const double estimate = static_cast<double>(n) / static_cast<double>(grad_batch.size()) * hinge /
                                            static_cast<double>(block_grads.size()) +
                                        config.lambda * reg;
                epoch_objective_sum += estimate;

                const double eta = step_size(config.schedule, config.eta0, t, epoch);
                for (const auto& bg : block_grads) {
                    const auto& g = bg.gradient;
                    if (config.dampening) {
                        dampening.accumulate(g);
                        for (std::size_t b = 0; b < g.indices.size(); ++b) {
                            model.alpha[g.indices[b]] -= eta * dampening.inverse_sqrt(g.indices[b]) * g.values[b];
                        }
                    } else {
                        for (std::size_t b = 0; b < g.indices.size(); ++b) model.alpha[g.indices[b]] -= eta * g.values[b];
                    }
                }
                if (observer) observer(t, model.alpha);
                if (t <= 10 && t < epoch * steps_per_epoch) {
                    record.checkpoints.push_back({t, static_cast<double>(t) / static_cast<double>(steps_per_epoch),
                                                  estimate, validation_error(model, validation), elapsed()});
                }
            }
        }
        record.iterations = t;
        record.epochs_completed = epoch;
        record.checkpoints.push_back({t, static_cast<double>(epoch),
                                      epoch_objective_sum / static_cast<double>(steps_per_epoch),
                                      validation_error(model, validation), elapsed()});
        epoch_objective_sum = 0.0;

        double change = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = model.alpha[j] - epoch_start[j];
            change += d * d;
        }
        if (std::sqrt(change) < config.stop_weight_delta) {
            record.converged = true;
            break;
        }
        epoch_start = model.alpha;
    }
    return result;
}

std::vector<SpeedupRow> measure_speedup(const Dataset& data, const KernelSpec& spec, const TrainConfig& config,
                                        const std::vector<std::size_t>& worker_counts, std::size_t repeats) {
    if (data.empty()) throw std::invalid_argument("speedup workload needs a non-empty dataset");
    config.validate();
    const std::size_t n = data.size();
    const std::size_t grad_size = std::min(config.grad_batch_size, n);
    const std::size_t exp_size = std::min(config.expansion_size, n);
    const std::size_t exp_blocks = config.blocks ? config.blocks : std::max<std::size_t>(1, n / exp_size);

    Rng grad_rng = make_rng(config.seed, "gradient-batch");
    Rng expansion_rng = make_rng(config.seed, "expansion-batch");
    const std::vector<Index> grad_batch = sample_indices(n, grad_size, grad_rng);
    const auto exp_batches = draw_disjoint_batches(n, exp_size, exp_blocks, expansion_rng);

    const std::shared_ptr<const Dataset> shared(&data, [](const Dataset*) {});
    const DualModel model(shared, spec);
    std::vector<BlockGradient> grads(exp_batches.size());

    auto time_with = [&](std::size_t workers) {
        WorkerPool pool(workers);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
            const auto t0 = Clock::now();
            pool.run(exp_batches.size(), [&](std::size_t k) {
                grads[k] = block_subgradient(model, grad_batch, exp_batches[k], config.lambda);
            });
            best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
        }
        return best;
    };

    double baseline = -1.0;
    std::vector<SpeedupRow> rows;
    for (const std::size_t w : worker_counts) {
        if (w == 0) throw std::invalid_argument("worker counts must be positive");
        const double secs = time_with(w);
        if (w == 1) baseline = secs;
        rows.push_back({w, secs, 0.0});
    }
    if (baseline < 0.0) baseline = time_with(1);
    for (auto& row : rows) row.speedup = row.workers == 1 ? 1.0 : baseline / row.seconds;
    return rows;
}

void write_speedup_csv(std::ostream& os, const std::vector<SpeedupRow>& rows) {
    os << "workers,seconds,speedup\n";
    std::ostringstream line;
    line.precision(8);
    for (const auto& r : rows) {
        line.str("");
        line << r.workers << ',' << r.seconds << ',' << r.speedup << '\n';
        os << line.str();
    }
}

}  // namespace dsekl
