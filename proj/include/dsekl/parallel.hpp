#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dsekl/dataset.hpp"
#include "dsekl/kernel.hpp"
#include "dsekl/objective.hpp"
#include "dsekl/optimizer.hpp"
#include "dsekl/rng.hpp"

namespace dsekl {

/// Per-coefficient running sum of squared gradients, started at 1.
class DampeningAccumulator {
public:
    explicit DampeningAccumulator(std::size_t n) : g_(n, 1.0) {}

    /// Adds g_j^2 to every touched coordinate.
    void accumulate(const SparseGradient& gradient);
    double inverse_sqrt(Index j) const;
    std::span<const double> values() const { return g_; }

private:
    std::vector<double> g_;
};

struct BatchPartition {
    std::vector<std::vector<Index>> grad_batches;
    std::vector<std::vector<Index>> expansion_batches;
    std::vector<std::string> warnings;
};

/// `count` pairwise disjoint batches of `batch_size` indices drawn without
/// replacement from [0, n). When count * batch_size exceeds n the count is
/// reduced; when batch_size exceeds n a single batch of all n indices results.
std::vector<std::vector<Index>> draw_disjoint_batches(std::size_t n, std::size_t batch_size, std::size_t count,
                                                      Rng& rng, std::vector<std::string>* warnings = nullptr);

/// K disjoint gradient batches, then K disjoint expansion batches, from one generator.
BatchPartition partition_batches(std::size_t n, std::size_t batch_size, std::size_t k_workers, Rng& rng);

/// Shared-memory variant with per-block workers and dampened synchronous updates.
///
/// Per epoch the data is partitioned into gradient batches of size I and
/// disjoint expansion batches of size J. For each gradient batch every worker
/// evaluates one expansion block against a read-only alpha; after the barrier
/// G_j += g_j^2 and alpha_j -= eta G_j^{-1/2} g_j for every touched j.
/// With config.dampening off, G stays at 1.
TrainResult train_parallel(std::shared_ptr<const Dataset> data, const KernelSpec& spec, const TrainConfig& config,
                           const Dataset* validation = nullptr, const AlphaObserver& observer = {});

struct SpeedupRow {
    std::size_t workers = 1;
    double seconds = 0.0;
    double speedup = 1.0;
};

/// Times one gradient batch against every expansion block at each worker count.
/// The workload (batches and alpha) is identical across rows; each row keeps
/// the fastest of `repeats` runs.
std::vector<SpeedupRow> measure_speedup(const Dataset& data, const KernelSpec& spec, const TrainConfig& config,
                                        const std::vector<std::size_t>& worker_counts, std::size_t repeats = 3);

void write_speedup_csv(std::ostream& os, const std::vector<SpeedupRow>& rows);

}  // namespace dsekl
