#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dsekl/dataset.hpp"
#include "dsekl/kernel.hpp"
#include "dsekl/objective.hpp"
#include "dsekl/optimizer.hpp"

namespace dsekl {

/// Random Fourier features for the RBF kernel:
/// z(x) = sqrt(2 / J) cos(W x + b), rows of W ~ N(0, I / sigma^2), b ~ U[0, 2 pi).
struct RKSFeatureMap {
    Eigen::MatrixXd frequencies;  ///< J x D
    Eigen::VectorXd phases;       ///< J
    double scale = 0.0;
    double sigma = 1.0;

    std::size_t n_features() const { return static_cast<std::size_t>(frequencies.rows()); }
    std::size_t input_dim() const { return static_cast<std::size_t>(frequencies.cols()); }

    static RKSFeatureMap sample(std::size_t input_dim, std::size_t n_features, double sigma, std::uint64_t seed);
};

Eigen::VectorXd rks_transform(std::span<const double> x, const RKSFeatureMap& map);
Eigen::VectorXd rks_transform(SparseRowView x, const RKSFeatureMap& map);
/// One transformed row per dataset row (N x J).
Eigen::MatrixXd rks_transform(const Dataset& data, const RKSFeatureMap& map);

struct LinearModel {
    Eigen::VectorXd weights;
};

struct RKSModel {
    RKSFeatureMap map;
    LinearModel linear;

    std::vector<double> decision_values(const Dataset& queries) const;
    std::vector<int> predict(const Dataset& queries) const;
};

/// Stochastic subgradient descent on sum_i max(0, 1 - y_i w.z(x_i)) + lambda |w|^2
/// in the explicit feature space. Batch size, schedule, epochs and stopping
/// rule come from `config` so the comparison with DSEKL differs only in the
/// kernel approximation.
RKSModel train_rks(const Dataset& data, double sigma, std::size_t n_features, const TrainConfig& config);

/// Draws one expansion set of `subset_size` indices and trains with it frozen.
TrainResult train_fixed_subsample(std::shared_ptr<const Dataset> data, const KernelSpec& spec,
                                  std::size_t subset_size, const TrainConfig& config,
                                  const Dataset* validation = nullptr);

struct BatchOptions {
    double lambda = 1e-2;
    std::size_t max_iters = 1000;
    StepSchedule schedule = StepSchedule::InverseIter;
    double eta0 = 1.0;
    double tolerance = 1e-8;
};

inline constexpr std::size_t kBatchMaxSamples = 5000;

struct BatchResult {
    DualModel model;
    std::size_t iterations = 0;
    double objective = 0.0;
};

/// Full-Gram subgradient descent; the reference solver. Each step computes the
/// exact subgradient 2 lambda alpha - sum_{i: y_i f_i < 1} y_i K_i. Stops when
/// the objective changes by less than the tolerance or after max_iters.
/// Refuses datasets larger than kBatchMaxSamples.
BatchResult train_batch(std::shared_ptr<const Dataset> data, const KernelSpec& spec, const BatchOptions& options,
                        const AlphaObserver& observer = {});

}  // namespace dsekl
