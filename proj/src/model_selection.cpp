#include "dsekl/model_selection.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dsekl/data_io.hpp"
#include "dsekl/worker_pool.hpp"

namespace dsekl {

std::vector<double> log_grid(double lo_exponent, double hi_exponent, std::size_t count) {
    if (count == 0) return {};
    if (count == 1) return {std::pow(10.0, lo_exponent)};
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double e = lo_exponent + (hi_exponent - lo_exponent) * static_cast<double>(k) / static_cast<double>(count - 1);
        out[k] = std::pow(10.0, e);
    }
    return out;
}

void SearchSpace::validate() const {
    auto positive = [](const auto& grid, const char* name) {
        if (grid.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
        for (const auto v : grid) {
            if (!(v > 0)) throw std::invalid_argument(std::string(name) + " grid values must be positive");
        }
    };
    positive(lambda_grid, "lambda");
    positive(sigma_grid, "sigma");
    positive(eta0_grid, "eta0");
    positive(grad_batch_grid, "I");
    positive(expansion_grid, "J");
}

std::size_t SearchSpace::size() const {
    return lambda_grid.size() * sigma_grid.size() * eta0_grid.size() * grad_batch_grid.size() * expansion_grid.size();
}

std::vector<HyperParams> SearchSpace::points() const {
    std::vector<HyperParams> out;
    out.reserve(size());
    for (const double lambda : lambda_grid) {
        for (const double sigma : sigma_grid) {
            for (const double eta0 : eta0_grid) {
                for (const auto i : grad_batch_grid) {
                    for (const auto j : expansion_grid) out.push_back({lambda, sigma, eta0, i, j});
                }
            }
        }
    }
    return out;
}

std::size_t select_best(const std::vector<CvRow>& table) {
    if (table.empty()) throw std::invalid_argument("empty cross-validation table");
    std::size_t best = 0;
    for (std::size_t k = 1; k < table.size(); ++k) {
        const auto& a = table[k];
        const auto& b = table[best];
        bool better = a.mean_error < b.mean_error;
        if (a.mean_error == b.mean_error) {
            if (a.params.lambda != b.params.lambda) {
                better = a.params.lambda > b.params.lambda;
            } else if (a.params.expansion_size != b.params.expansion_size) {
                better = a.params.expansion_size < b.params.expansion_size;
            } else {
                better = a.params.grad_batch_size < b.params.grad_batch_size;
            }
        }
        if (better) best = k;
    }
    return best;
}

GridSearchResult grid_search(const Dataset& data, const SearchSpace& space, const FoldEvaluator& evaluator, Rng& rng,
                             std::size_t threads) {
    if (data.size() < 4) throw std::invalid_argument("grid search needs at least 4 samples");
    space.validate();
    const std::size_t half = data.size() / 2;
    const auto folds = split_sizes(data, {half, data.size() - half}, rng);

    GridSearchResult result;
    const auto points = space.points();
    result.table.resize(points.size());
    WorkerPool pool(threads);
    pool.run(points.size(), [&](std::size_t p) {
        CvRow& row = result.table[p];
        row.params = points[p];
        for (int f = 0; f < 2; ++f) {
            try {
                const double err = evaluator(folds[f], folds[1 - f], row.params);
                row.fold_errors[f] = std::isfinite(err) ? err : 1.0;
                if (!std::isfinite(err)) row.failed = true;
            } catch (const std::exception&) {
                row.fold_errors[f] = 1.0;
                row.failed = true;
            }
        }
        row.mean_error = 0.5 * (row.fold_errors[0] + row.fold_errors[1]);
    });
    const std::size_t best = select_best(result.table);
    result.best = result.table[best].params;
    result.best_error = result.table[best].mean_error;
    return result;
}

void write_cv_table_csv(std::ostream& os, const std::vector<CvRow>& table) {
    os << "lambda,sigma,eta0,I,J,fold1_error,fold2_error,mean_error,failed\n";
    std::ostringstream line;
    line.precision(10);
    for (const auto& r : table) {
        line.str("");
        line << r.params.lambda << ',' << r.params.sigma << ',' << r.params.eta0 << ',' << r.params.grad_batch_size << ','
             << r.params.expansion_size << ',' << r.fold_errors[0] << ',' << r.fold_errors[1] << ',' << r.mean_error
             << ',' << (r.failed ? 1 : 0) << '\n';
        os << line.str();
    }
}

}  // namespace dsekl
