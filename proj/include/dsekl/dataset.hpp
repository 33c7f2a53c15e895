#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dsekl {

using Index = std::size_t;
using FeatureIndex = std::uint32_t;

/// Read-only view of one sparse feature row. Indices are 0-based and
/// strictly increasing.
struct SparseRowView {
    std::span<const FeatureIndex> indices;
    std::span<const double> values;

    std::size_t nnz() const { return indices.size(); }
};

/// Binary classification data in compressed sparse row layout.
///
/// Rows are immutable once built; the squared norm of every row is cached so
/// RBF distances can be formed as |x|^2 + |y|^2 - 2<x,y> without densifying.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::size_t n_features) : n_features_(n_features) {}

    /// Appends a row. Entries must be sorted by strictly increasing feature
    /// index; label must be -1 or +1. Zero values are dropped.
    void add_row(std::span<const std::pair<FeatureIndex, double>> entries, int label);
    void add_dense_row(std::span<const double> features, int label);

    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    std::size_t n_features() const { return n_features_; }

    /// Grows the feature dimension; never shrinks below the largest index seen.
    void set_n_features(std::size_t d);

    SparseRowView row(Index i) const {
        const auto b = offsets_[i];
        const auto e = offsets_[i + 1];
        return {std::span<const FeatureIndex>(indices_).subspan(b, e - b),
                std::span<const double>(values_).subspan(b, e - b)};
    }
    int label(Index i) const { return labels_[i]; }
    double squared_norm(Index i) const { return sq_norms_[i]; }
    std::span<const int> labels() const { return labels_; }

    /// Dense copy of row i, length n_features().
    std::vector<double> dense_row(Index i) const;

    /// New dataset holding the given rows in the given order.
    Dataset subset(std::span<const Index> rows) const;

    std::size_t max_feature_index_plus_one() const { return max_index_plus_one_; }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::size_t n_features_ = 0;
    std::size_t max_index_plus_one_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<FeatureIndex> indices_;
    std::vector<double> values_;
    std::vector<int> labels_;
    std::vector<double> sq_norms_;
};

/// Sum of squares of a sparse row, accumulated in index order.
double squared_norm(SparseRowView x);

/// Sparse inner product by sorted merge.
double dot(SparseRowView x, SparseRowView y);

/// Fraction of rows whose predicted label differs from the true label.
double error_rate(std::span<const int> predicted, std::span<const int> truth);

}  // namespace dsekl
