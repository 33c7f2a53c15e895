#include "dsekl/baselines.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "dsekl/rng.hpp"

namespace dsekl {

RKSFeatureMap RKSFeatureMap::sample(std::size_t input_dim, std::size_t n_features, double sigma,
                                    std::uint64_t seed) {
    if (n_features == 0) throw std::invalid_argument("number of random features must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("RKS bandwidth sigma must be positive");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / sigma);
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);

    RKSFeatureMap map;
    const auto rows = static_cast<Eigen::Index>(n_features);
    const auto cols = static_cast<Eigen::Index>(input_dim);
    map.frequencies.resize(rows, cols);
    map.phases.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) map.frequencies(r, c) = normal(rng);
        map.phases(r) = uniform(rng);
    }
    map.scale = std::sqrt(2.0 / static_cast<double>(n_features));
    map.sigma = sigma;
    return map;
}

Eigen::VectorXd rks_transform(std::span<const double> x, const RKSFeatureMap& map) {
    if (x.size() != map.input_dim()) {
        throw std::invalid_argument("RKS input has dimension " + std::to_string(x.size()) + ", map expects " +
                                    std::to_string(map.input_dim()));
    }
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    return map.scale * (map.frequencies * v + map.phases).array().cos().matrix();
}

Eigen::VectorXd rks_transform(SparseRowView x, const RKSFeatureMap& map) {
    Eigen::VectorXd proj = map.phases;
    for (std::size_t k = 0; k < x.nnz(); ++k) {
        const auto col = static_cast<Eigen::Index>(x.indices[k]);
        // Features beyond the map's input dimension were unseen at training time.
        if (col < map.frequencies.cols()) proj += map.frequencies.col(col) * x.values[k];
    }
    return map.scale * proj.array().cos().matrix();
}

Eigen::MatrixXd rks_transform(const Dataset& data, const RKSFeatureMap& map) {
    Eigen::MatrixXd z(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(map.n_features()));
    for (std::size_t i = 0; i < data.size(); ++i) z.row(static_cast<Eigen::Index>(i)) = rks_transform(data.row(i), map);
    return z;
}

std::vector<double> RKSModel::decision_values(const Dataset& queries) const {
    std::vector<double> out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = rks_transform(queries.row(i), map).dot(linear.weights);
    return out;
}

std::vector<int> RKSModel::predict(const Dataset& queries) const {
    const auto f = decision_values(queries);
    std::vector<int> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = sign_label(f[i]);
    return out;
}

RKSModel train_rks(const Dataset& data, double sigma, std::size_t n_features, const TrainConfig& config) {
    require_binary_labels(data);
    config.validate();

    RKSModel model;
    model.map = RKSFeatureMap::sample(data.n_features(), n_features, sigma, derive_seed(config.seed, stream_tag("rks-map")));
    const Eigen::MatrixXd z = rks_transform(data, model.map);
    Eigen::VectorXd& w = model.linear.weights;
    w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_features));

    const std::size_t n = data.size();
    const std::size_t grad_size = std::min(config.grad_batch_size, n);
    const std::size_t iters_per_epoch = (n + grad_size - 1) / grad_size;
    const double reg_scale = static_cast<double>(grad_size) / static_cast<double>(n);
    Rng grad_rng = make_rng(config.seed, "gradient-batch");

    std::size_t t = 0;
    Eigen::VectorXd g(w.size());
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const Eigen::VectorXd epoch_start = w;
        for (std::size_t step = 0; step < iters_per_epoch; ++step) {
            ++t;
            const auto batch = sample_indices(n, grad_size, grad_rng);
            g = reg_scale * 2.0 * config.lambda * w;
            for (const Index i : batch) {
                const auto row = z.row(static_cast<Eigen::Index>(i));
                const double y = data.label(i);
                if (y * row.dot(w) < 1.0) g -= y * row.transpose();
            }
            if (!g.allFinite()) {
                throw std::runtime_error("non-finite RKS gradient at iteration " + std::to_string(t));
            }
            w -= step_size(config.schedule, config.eta0, t, epoch) * g;
        }
        if ((w - epoch_start).norm() < config.stop_weight_delta) break;
    }
    return model;
}

TrainResult train_fixed_subsample(std::shared_ptr<const Dataset> data, const KernelSpec& spec,
                                  std::size_t subset_size, const TrainConfig& config, const Dataset* validation) {
    if (!data) throw std::invalid_argument("training set is null");
    if (subset_size == 0) throw std::invalid_argument("subset size must be positive");
    Rng rng = make_rng(config.seed, "fixed-subsample");
    std::vector<Index> landmarks = sample_indices(data->size(), subset_size, rng);
    return train_with_fixed_expansion(std::move(data), spec, config, std::move(landmarks), validation);
}

BatchResult train_batch(std::shared_ptr<const Dataset> data, const KernelSpec& spec, const BatchOptions& options,
                        const AlphaObserver& observer) {
    if (!data) throw std::invalid_argument("training set is null");
    require_binary_labels(*data);
    const std::size_t n = data->size();
    if (n > kBatchMaxSamples) {
        throw std::invalid_argument("batch solver holds the full " + std::to_string(n) + "x" + std::to_string(n) +
                                    " Gram matrix and is limited to " + std::to_string(kBatchMaxSamples) +
                                    " samples; use the doubly stochastic trainer (method dsekl) instead");
    }
    if (!(options.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(options.eta0 > 0.0)) throw std::invalid_argument("eta0 must be positive");

    std::vector<Index> all(n);
    std::iota(all.begin(), all.end(), Index{0});
    const GramBlock gram = gram_block(*data, all, all, spec);

    BatchResult result{DualModel(data, spec), 0, 0.0};
    std::vector<double>& alpha = result.model.alpha;
    std::vector<double> f(n);
    std::vector<char> violated(n);
    std::vector<double> grad(n);
    double previous = 0.0;
    for (std::size_t t = 1; t <= options.max_iters; ++t) {
        std::fill(f.begin(), f.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) f[i] += gram(i, j) * alpha[j];
        }
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double margin = data->label(i) * f[i];
            violated[i] = margin < 1.0;
            if (violated[i]) objective += 1.0 - margin;
        }
        double norm2 = 0.0;
        for (const double a : alpha) norm2 += a * a;
        objective += options.lambda * norm2;
        result.objective = objective;
        // A flat objective only counts as converged once it is below the
        // zero-model value; far out on a diverging run the regularizer swamps
        // the hinge term and consecutive values can coincide.
        if (t > 1 && std::abs(objective - previous) < options.tolerance && objective <= static_cast<double>(n)) break;
        previous = objective;

        const double reg_scale = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            double loss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (violated[i]) loss += data->label(i) * gram(i, j);
            }
            grad[j] = reg_scale * 2.0 * options.lambda * alpha[j] - loss;
        }
        // Epoch and iteration coincide for full-batch steps.
        const double eta = step_size(options.schedule, options.eta0, t, t);
        for (std::size_t j = 0; j < n; ++j) alpha[j] -= eta * grad[j];
        result.iterations = t;
        if (observer) observer(t, alpha);
    }
    return result;
}

}  // namespace dsekl
