#include "dsekl/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dsekl {

namespace {

// Dense gathering turns the inner products into one GEMM; beyond this width the
// gathered copies cost more than the sparse merge.
constexpr std::size_t kDenseGatherMaxFeatures = 4096;

void check_indices(std::span<const Index> idx, std::size_t n, const char* what) {
    for (const Index i : idx) {
        if (i >= n) {
            std::ostringstream msg;
            msg << what << " index " << i << " out of range [0, " << n << ")";
            throw std::out_of_range(msg.str());
        }
    }
}

Eigen::MatrixXd gather_dense(const Dataset& data, std::span<const Index> rows, std::size_t d) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t a = 0; a < rows.size(); ++a) {
        const auto r = data.row(rows[a]);
        for (std::size_t k = 0; k < r.nnz(); ++k) out(static_cast<Eigen::Index>(a), r.indices[k]) = r.values[k];
    }
    return out;
}

Eigen::MatrixXd inner_products(const Dataset& a, std::span<const Index> rows_a, const Dataset& b,
                               std::span<const Index> rows_b) {
    const std::size_t d = std::max(a.n_features(), b.n_features());
    if (d <= kDenseGatherMaxFeatures) {
        const Eigen::MatrixXd xa = gather_dense(a, rows_a, d);
        const Eigen::MatrixXd xb = gather_dense(b, rows_b, d);
        return xa * xb.transpose();
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows_a.size()), static_cast<Eigen::Index>(rows_b.size()));
    for (std::size_t j = 0; j < rows_b.size(); ++j) {
        const auto rb = b.row(rows_b[j]);
        for (std::size_t i = 0; i < rows_a.size(); ++i) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dot(a.row(rows_a[i]), rb);
        }
    }
    return out;
}

Eigen::MatrixXd kernel_block(const Dataset& a, std::span<const Index> rows_a, const Dataset& b,
                             std::span<const Index> rows_b, const KernelSpec& spec, bool same_dataset) {
    spec.validate();
    check_indices(rows_a, a.size(), "row");
    check_indices(rows_b, b.size(), "column");
    Eigen::MatrixXd k = inner_products(a, rows_a, b, rows_b);
    if (spec.family == KernelFamily::Linear) return k;

    const double gamma = 1.0 / (2.0 * spec.sigma * spec.sigma);
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
        const double nb = b.squared_norm(rows_b[static_cast<std::size_t>(j)]);
        for (Eigen::Index i = 0; i < k.rows(); ++i) {
            const Index ia = rows_a[static_cast<std::size_t>(i)];
            if (same_dataset && ia == rows_b[static_cast<std::size_t>(j)]) {
                k(i, j) = 1.0;
                continue;
            }
            const double d2 = std::max(0.0, a.squared_norm(ia) + nb - 2.0 * k(i, j));
            k(i, j) = std::exp(-gamma * d2);
        }
    }
    return k;
}

}  // namespace

void KernelSpec::validate() const {
    if (family == KernelFamily::RBF && !(sigma > 0.0 && std::isfinite(sigma))) {
        throw std::invalid_argument("RBF bandwidth sigma must be positive and finite, got " + std::to_string(sigma));
    }
}

std::string to_string(const KernelSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    if (spec.family == KernelFamily::Linear) {
        os << "linear";
    } else {
        os << "rbf " << spec.sigma;
    }
    return os.str();
}

KernelSpec parse_kernel_spec(const std::string& family, double sigma) {
    KernelSpec spec;
    if (family == "rbf" || family == "RBF") {
        spec = KernelSpec::rbf(sigma);
    } else if (family == "linear") {
        spec = KernelSpec::linear();
    } else {
        throw std::invalid_argument("unknown kernel family '" + family + "' (expected rbf or linear)");
    }
    spec.validate();
    return spec;
}

double eval_kernel(std::span<const double> x, std::span<const double> y, const KernelSpec& spec) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("kernel arguments differ in dimension: " + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()));
    }
    spec.validate();
    double acc = 0.0;
    if (spec.family == KernelFamily::Linear) {
        for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * y[k];
        return acc;
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double diff = x[k] - y[k];
        acc += diff * diff;
    }
    return std::exp(-acc / (2.0 * spec.sigma * spec.sigma));
}

double eval_kernel(SparseRowView x, SparseRowView y, const KernelSpec& spec) {
    spec.validate();
    if (spec.family == KernelFamily::Linear) return dot(x, y);
    double acc = 0.0;
    std::size_t a = 0;
    std::size_t b = 0;
    while (a < x.nnz() || b < y.nnz()) {
        double diff;
        if (b == y.nnz() || (a < x.nnz() && x.indices[a] < y.indices[b])) {
            diff = x.values[a++];
        } else if (a == x.nnz() || y.indices[b] < x.indices[a]) {
            diff = y.values[b++];
        } else {
            diff = x.values[a++] - y.values[b++];
        }
        acc += diff * diff;
    }
    return std::exp(-acc / (2.0 * spec.sigma * spec.sigma));
}

GramBlock gram_block(const Dataset& data, std::span<const Index> rows, std::span<const Index> cols,
                     const KernelSpec& spec) {
    GramBlock block;
    block.values = kernel_block(data, rows, data, cols, spec, true);
    block.row_indices.assign(rows.begin(), rows.end());
    block.col_indices.assign(cols.begin(), cols.end());
    return block;
}

Eigen::MatrixXd cross_gram(const Dataset& queries, std::span<const Index> query_rows, const Dataset& data,
                           std::span<const Index> cols, const KernelSpec& spec) {
    return kernel_block(queries, query_rows, data, cols, spec, false);
}

}  // namespace dsekl
