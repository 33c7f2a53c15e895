#include "dsekl/dataset.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dsekl {

void Dataset::add_row(std::span<const std::pair<FeatureIndex, double>> entries, int label) {
    if (label != -1 && label != 1) {
        throw std::invalid_argument("label must be -1 or +1, got " + std::to_string(label));
    }
    double sq = 0.0;
    std::size_t written = 0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto [idx, val] = entries[k];
        if (k > 0 && idx <= entries[k - 1].first) {
            throw std::invalid_argument("feature indices must be strictly increasing within a row (index " +
                                        std::to_string(idx) + " after " + std::to_string(entries[k - 1].first) +
                                        ")");
        }
        if (val == 0.0) continue;
        indices_.push_back(idx);
        values_.push_back(val);
        sq += val * val;
        max_index_plus_one_ = std::max<std::size_t>(max_index_plus_one_, std::size_t{idx} + 1);
        ++written;
    }
    offsets_.push_back(offsets_.back() + written);
    labels_.push_back(label);
    sq_norms_.push_back(sq);
    n_features_ = std::max(n_features_, max_index_plus_one_);
}

void Dataset::add_dense_row(std::span<const double> features, int label) {
    std::vector<std::pair<FeatureIndex, double>> entries;
    entries.reserve(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
        if (features[k] != 0.0) entries.emplace_back(static_cast<FeatureIndex>(k), features[k]);
    }
    add_row(entries, label);
    n_features_ = std::max(n_features_, features.size());
}

void Dataset::set_n_features(std::size_t d) { n_features_ = std::max(d, max_index_plus_one_); }

std::vector<double> Dataset::dense_row(Index i) const {
    std::vector<double> out(n_features_, 0.0);
    const auto r = row(i);
    for (std::size_t k = 0; k < r.nnz(); ++k) out[r.indices[k]] = r.values[k];
    return out;
}

Dataset Dataset::subset(std::span<const Index> rows) const {
    Dataset out(n_features_);
    std::vector<std::pair<FeatureIndex, double>> entries;
    for (const Index i : rows) {
        if (i >= size()) {
            throw std::out_of_range("row index " + std::to_string(i) + " out of range [0, " +
                                    std::to_string(size()) + ")");
        }
        const auto r = row(i);
        entries.clear();
        for (std::size_t k = 0; k < r.nnz(); ++k) entries.emplace_back(r.indices[k], r.values[k]);
        out.add_row(entries, labels_[i]);
    }
    out.n_features_ = n_features_;
    return out;
}

double squared_norm(SparseRowView x) {
    double s = 0.0;
    for (const double v : x.values) s += v * v;
    return s;
}

double dot(SparseRowView x, SparseRowView y) {
    double s = 0.0;
    std::size_t a = 0;
    std::size_t b = 0;
    while (a < x.nnz() && b < y.nnz()) {
        if (x.indices[a] == y.indices[b]) {
            s += x.values[a] * y.values[b];
            ++a;
            ++b;
        } else if (x.indices[a] < y.indices[b]) {
            ++a;
        } else {
            ++b;
        }
    }
    return s;
}

double error_rate(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) {
        throw std::invalid_argument("prediction/label length mismatch: " + std::to_string(predicted.size()) +
                                    " vs " + std::to_string(truth.size()));
    }
    if (truth.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

}  // namespace dsekl
