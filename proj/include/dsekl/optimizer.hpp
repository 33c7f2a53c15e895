#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dsekl/dataset.hpp"
#include "dsekl/kernel.hpp"
#include "dsekl/objective.hpp"

namespace dsekl {

enum class StepSchedule {
    InverseIter,   ///< eta_t = eta0 / t
    InverseEpoch,  ///< eta_e = eta0 / e, e the 1-based epoch
};

enum class SamplingMode {
    Random,     ///< fresh uniform draws without replacement
    FullSweep,  ///< every index, in order; turns the loop into full-batch descent
};

StepSchedule parse_schedule(const std::string& name);
std::string to_string(StepSchedule s);

struct TrainConfig {
    std::size_t grad_batch_size = 50;  ///< I
    std::size_t expansion_size = 20;   ///< J
    double lambda = 1e-2;
    StepSchedule schedule = StepSchedule::InverseIter;
    double eta0 = 1.0;
    std::size_t max_epochs = 50;
    /// Stop once the L2 norm of the alpha change over one epoch drops below this.
    double stop_weight_delta = 0.0;
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    SamplingMode sampling = SamplingMode::Random;

    // Parallel engine only.
    std::size_t blocks = 0;  ///< batches per family and epoch round; 0 derives N / batch size
    bool dampening = true;
    bool resample_blocks = true;

    void validate() const;
};

struct Checkpoint {
    std::size_t iteration = 0;
    double epoch = 0.0;
    double objective_estimate = 0.0;
    double validation_error = 0.0;  ///< NaN when no validation set was given
    double elapsed_seconds = 0.0;
};

struct RunRecord {
    std::vector<Checkpoint> checkpoints;
    std::size_t iterations = 0;
    std::size_t epochs_completed = 0;
    bool converged = false;
    /// Largest |I| * |J| block materialized during training.
    std::size_t peak_block_elements = 0;
};

void write_run_record_csv(std::ostream& os, const RunRecord& record);

struct TrainResult {
    DualModel model;
    RunRecord record;
};

/// Called after every update with the 1-based iteration and the current alpha.
using AlphaObserver = std::function<void(std::size_t, std::span<const double>)>;

/// Doubly stochastic subgradient descent on the kernel SVM objective.
///
/// Each iteration draws a gradient batch I and an expansion batch J from
/// independent streams, evaluates K[I, J] and updates alpha_j for j in J only.
/// An epoch is ceil(N / I) iterations. Checkpoints are taken at iteration 0,
/// after each of the first ten iterations and at each epoch end.
TrainResult train_serial(std::shared_ptr<const Dataset> data, const KernelSpec& spec, const TrainConfig& config,
                         const Dataset* validation = nullptr, const AlphaObserver& observer = {});

/// Same loop with the expansion batch frozen to `expansion`.
TrainResult train_with_fixed_expansion(std::shared_ptr<const Dataset> data, const KernelSpec& spec,
                                       const TrainConfig& config, std::vector<Index> expansion,
                                       const Dataset* validation = nullptr, const AlphaObserver& observer = {});

/// Throws unless every label is -1 or +1 and the set is non-empty.
void require_binary_labels(const Dataset& data);

/// Step size for the given update counter and epoch (both 1-based).
double step_size(StepSchedule schedule, double eta0, std::size_t iteration, std::size_t epoch);

}  // namespace dsekl
