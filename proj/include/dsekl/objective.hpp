#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dsekl/dataset.hpp"
#include "dsekl/kernel.hpp"

namespace dsekl {

/// Kernel expansion f(x) = sum_j k(x, x_j) alpha_j over the rows of a
/// training set. The expansion data is shared, never copied per model.
struct DualModel {
    std::vector<double> alpha;
    std::shared_ptr<const Dataset> expansion;
    KernelSpec spec;

    DualModel() = default;
    DualModel(std::shared_ptr<const Dataset> data, KernelSpec kernel)
        : alpha(data ? data->size() : 0, 0.0), expansion(std::move(data)), spec(kernel) {}

    std::size_t size() const { return alpha.size(); }

    /// Indices j with alpha_j != 0, ascending.
    std::vector<Index> support() const;
};

/// Gradient entries for the sampled expansion indices only.
struct SparseGradient {
    std::vector<Index> indices;
    std::vector<double> values;
};

/// Labels from decision values; an exact zero predicts +1.
inline int sign_label(double f) { return f < 0.0 ? -1 : 1; }

/// f(x) summed over `support` (default: the nonzero coefficients).
double decision_function(const DualModel& model, SparseRowView x,
                         std::optional<std::span<const Index>> support = std::nullopt);

/// Decision values for every row of `queries`.
std::vector<double> decision_values(const DualModel& model, const Dataset& queries);
std::vector<int> predict(const DualModel& model, const Dataset& queries);

/// sum_{i in batch} max(0, 1 - y_i f(x_i)) + lambda |alpha|^2 with f over the full expansion.
double objective_value(const DualModel& model, std::span<const Index> batch, double lambda);

/// Block quantities produced alongside the gradient.
struct BlockGradient {
    SparseGradient gradient;
    /// Hinge sum over the gradient batch using the restricted estimate.
    double hinge_sum = 0.0;
    std::size_t violations = 0;
};

/// Stochastic subgradient over the block K[grad_batch, expansion_batch].
///
/// The margin of x_i is estimated from the sampled expansion only,
/// f^(x_i) = sum_{j in J} K_ij alpha_j; a point contributes iff y_i f^(x_i) < 1.
/// The regularizer gradient 2 lambda alpha_j is scaled by |I|/N so that one
/// pass over the data applies it once in expectation.
BlockGradient block_subgradient(const DualModel& model, std::span<const Index> grad_batch,
                                std::span<const Index> expansion_batch, double lambda);

/// Same computation on a precomputed block whose rows/cols match the batches.
BlockGradient block_subgradient(const DualModel& model, const GramBlock& block, double lambda);

SparseGradient subgradient(const DualModel& model, std::span<const Index> grad_batch,
                           std::span<const Index> expansion_batch, double lambda);

}  // namespace dsekl
