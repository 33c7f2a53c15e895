#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dsekl/dataset.hpp"
#include "dsekl/rng.hpp"

namespace dsekl {

/// One grid point.
struct HyperParams {
    double lambda = 1e-2;
    double sigma = 1.0;
    double eta0 = 1.0;
    std::size_t grad_batch_size = 50;  ///< I
    std::size_t expansion_size = 20;   ///< J

    friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// `count` log-spaced values from 10^lo to 10^hi inclusive.
std::vector<double> log_grid(double lo_exponent, double hi_exponent, std::size_t count);

struct SearchSpace {
    std::vector<double> lambda_grid = log_grid(-6, 6, 13);
    std::vector<double> sigma_grid = log_grid(-6, 6, 13);
    std::vector<double> eta0_grid = log_grid(-4, 4, 9);
    std::vector<std::size_t> grad_batch_grid{50};
    std::vector<std::size_t> expansion_grid{20};

    void validate() const;
    std::size_t size() const;
    std::vector<HyperParams> points() const;
};

/// Trains on `fit` with the given hyperparameters and returns the error on `holdout`.
using FoldEvaluator = std::function<double(const Dataset& fit, const Dataset& holdout, const HyperParams&)>;

struct CvRow {
    HyperParams params;
    double fold_errors[2] = {0.0, 0.0};
    double mean_error = 0.0;
    bool failed = false;
};

struct GridSearchResult {
    HyperParams best;
    double best_error = 1.0;
    std::vector<CvRow> table;  ///< in grid order
};

/// Exhaustive search with two-fold cross-validation. The data is split once
/// into two halves; each point is trained on one half and scored on the other,
/// both ways. A point whose evaluator throws scores 1.0. Ties go to the larger
/// lambda, then the smaller J, then the smaller I, then grid order.
GridSearchResult grid_search(const Dataset& data, const SearchSpace& space, const FoldEvaluator& evaluator, Rng& rng,
                             std::size_t threads = 1);

/// Index of the winning row under the tie-breaking rule.
std::size_t select_best(const std::vector<CvRow>& table);

void write_cv_table_csv(std::ostream& os, const std::vector<CvRow>& table);

}  // namespace dsekl
