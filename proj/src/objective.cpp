#include "dsekl/objective.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dsekl {

namespace {

const Dataset& expansion_of(const DualModel& model) {
    if (!model.expansion) throw std::logic_error("model has no expansion dataset");
    if (model.alpha.size() != model.expansion->size()) {
        throw std::logic_error("alpha length " + std::to_string(model.alpha.size()) +
                               " does not match expansion size " + std::to_string(model.expansion->size()));
    }
    return *model.expansion;
}

}  // namespace

std::vector<Index> DualModel::support() const {
    std::vector<Index> out;
    for (Index j = 0; j < alpha.size(); ++j) {
        if (alpha[j] != 0.0) out.push_back(j);
    }
    return out;
}

double decision_function(const DualModel& model, SparseRowView x, std::optional<std::span<const Index>> support) {
    const Dataset& data = expansion_of(model);
    std::vector<Index> owned;
    if (!support) {
        owned = model.support();
        support = owned;
    }
    double f = 0.0;
    for (const Index j : *support) {
        if (j >= data.size()) {
            throw std::out_of_range("support index " + std::to_string(j) + " out of range [0, " +
                                    std::to_string(data.size()) + ")");
        }
        f += eval_kernel(x, data.row(j), model.spec) * model.alpha[j];
    }
    return f;
}

std::vector<double> decision_values(const DualModel& model, const Dataset& queries) {
    const Dataset& data = expansion_of(model);
    const std::vector<Index> support = model.support();
    std::vector<double> out(queries.size(), 0.0);
    if (support.empty() || queries.empty()) return out;

    Eigen::VectorXd a(static_cast<Eigen::Index>(support.size()));
    for (std::size_t b = 0; b < support.size(); ++b) a(static_cast<Eigen::Index>(b)) = model.alpha[support[b]];

    // Chunked so that peak memory stays bounded for large query sets.
    constexpr std::size_t kChunk = 256;
    std::vector<Index> rows;
    for (std::size_t start = 0; start < queries.size(); start += kChunk) {
        const std::size_t stop = std::min(queries.size(), start + kChunk);
        rows.resize(stop - start);
        std::iota(rows.begin(), rows.end(), start);
        const Eigen::VectorXd f = cross_gram(queries, rows, data, support, model.spec) * a;
        for (std::size_t i = start; i < stop; ++i) out[i] = f(static_cast<Eigen::Index>(i - start));
    }
    return out;
}

std::vector<int> predict(const DualModel& model, const Dataset& queries) {
    const auto f = decision_values(model, queries);
    std::vector<int> out(f.size());
    std::transform(f.begin(), f.end(), out.begin(), sign_label);
    return out;
}

double objective_value(const DualModel& model, std::span<const Index> batch, double lambda) {
    const Dataset& data = expansion_of(model);
    if (batch.empty()) throw std::invalid_argument("objective batch must be non-empty");
    const std::vector<Index> support = model.support();
    double hinge = 0.0;
    if (support.empty()) {
        for (const Index i : batch) {
            if (i >= data.size()) throw std::out_of_range("batch index " + std::to_string(i) + " out of range");
        }
        hinge = static_cast<double>(batch.size());
    } else {
        const GramBlock k = gram_block(data, batch, support, model.spec);
        for (std::size_t a = 0; a < batch.size(); ++a) {
            double f = 0.0;
            for (std::size_t b = 0; b < support.size(); ++b) f += k(a, b) * model.alpha[support[b]];
            hinge += std::max(0.0, 1.0 - data.label(batch[a]) * f);
        }
    }
    double reg = 0.0;
    for (const double v : model.alpha) reg += v * v;
    return hinge + lambda * reg;
}

BlockGradient block_subgradient(const DualModel& model, const GramBlock& block, double lambda) {
    const Dataset& data = expansion_of(model);
    const auto& rows = block.row_indices;
    const auto& cols = block.col_indices;
    if (rows.empty() || cols.empty()) throw std::invalid_argument("gradient and expansion batches must be non-empty");

    BlockGradient out;
    // Column-outer accumulation; each f[a] still sums in ascending b.
    std::vector<double> f(rows.size(), 0.0);
    for (std::size_t b = 0; b < cols.size(); ++b) {
        const double alpha_j = model.alpha[cols[b]];
        for (std::size_t a = 0; a < rows.size(); ++a) f[a] += block(a, b) * alpha_j;
    }
    std::vector<char> violated(rows.size(), 0);
    for (std::size_t a = 0; a < rows.size(); ++a) {
        const double margin = data.label(rows[a]) * f[a];
        if (margin < 1.0) {
            violated[a] = 1;
            out.hinge_sum += 1.0 - margin;
            ++out.violations;
        }
    }

    const double reg_scale = static_cast<double>(rows.size()) / static_cast<double>(model.alpha.size());
    out.gradient.indices = cols;
    out.gradient.values.resize(cols.size());
    for (std::size_t b = 0; b < cols.size(); ++b) {
        double loss = 0.0;
        for (std::size_t a = 0; a < rows.size(); ++a) {
            if (violated[a]) loss += data.label(rows[a]) * block(a, b);
        }
        out.gradient.values[b] = reg_scale * 2.0 * lambda * model.alpha[cols[b]] - loss;
    }
    return out;
}

BlockGradient block_subgradient(const DualModel& model, std::span<const Index> grad_batch,
                                std::span<const Index> expansion_batch, double lambda) {
    const Dataset& data = expansion_of(model);
    return block_subgradient(model, gram_block(data, grad_batch, expansion_batch, model.spec), lambda);
}

SparseGradient subgradient(const DualModel& model, std::span<const Index> grad_batch,
                           std::span<const Index> expansion_batch, double lambda) {
    return block_subgradient(model, grad_batch, expansion_batch, lambda).gradient;
}

}  // namespace dsekl
