#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsekl/dataset.hpp"

namespace dsekl {

enum class KernelFamily { RBF, Linear };

/// Kernel family and its parameters. RBF uses exp(-|x-y|^2 / (2 sigma^2)).
struct KernelSpec {
    KernelFamily family = KernelFamily::RBF;
    double sigma = 1.0;

    static KernelSpec rbf(double sigma) { return {KernelFamily::RBF, sigma}; }
    static KernelSpec linear() { return {KernelFamily::Linear, 1.0}; }

    /// Throws std::invalid_argument unless sigma > 0 for RBF.
    void validate() const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(const KernelSpec& spec);
KernelSpec parse_kernel_spec(const std::string& family, double sigma);

double eval_kernel(std::span<const double> x, std::span<const double> y, const KernelSpec& spec);
double eval_kernel(SparseRowView x, SparseRowView y, const KernelSpec& spec);

/// Rectangular slice K[rows, cols] of the (never materialized) Gram matrix.
struct GramBlock {
    Eigen::MatrixXd values;
    std::vector<Index> row_indices;
    std::vector<Index> col_indices;

    double operator()(std::size_t a, std::size_t b) const { return values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)); }
};

/// Computes K[rows, cols] for rows/cols of one dataset.
GramBlock gram_block(const Dataset& data, std::span<const Index> rows, std::span<const Index> cols,
                     const KernelSpec& spec);

/// Kernel values between rows of `queries` and rows `cols` of `data`.
Eigen::MatrixXd cross_gram(const Dataset& queries, std::span<const Index> query_rows, const Dataset& data,
                           std::span<const Index> cols, const KernelSpec& spec);

}  // namespace dsekl
