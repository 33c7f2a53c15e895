#pragma once

#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "dsekl/dataset.hpp"
#include "dsekl/rng.hpp"

namespace testutil {

/// Dense Gaussian features with random +-1 labels.
inline dsekl::Dataset random_dense(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0) {
    dsekl::Rng rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    std::bernoulli_distribution coin(0.5);
    dsekl::Dataset data(d);
    std::vector<double> x(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : x) v = normal(rng);
        data.add_dense_row(x, coin(rng) ? 1 : -1);
    }
    return data;
}

/// Sparse rows with roughly `density` nonzeros per feature.
inline dsekl::Dataset random_sparse(std::size_t n, std::size_t d, double density, std::uint64_t seed) {
    dsekl::Rng rng(seed);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    std::bernoulli_distribution keep(density);
    std::bernoulli_distribution coin(0.5);
    dsekl::Dataset data(d);
    std::vector<std::pair<dsekl::FeatureIndex, double>> row;
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        for (std::size_t k = 0; k < d; ++k) {
            if (keep(rng)) row.emplace_back(static_cast<dsekl::FeatureIndex>(k), unif(rng));
        }
        data.add_row(row, coin(rng) ? 1 : -1);
    }
    return data;
}

inline std::shared_ptr<const dsekl::Dataset> share(dsekl::Dataset d) {
    return std::make_shared<const dsekl::Dataset>(std::move(d));
}

}  // namespace testutil
