#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "dsekl/objective.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dsekl;

TEST_CASE("decision_function of the zero model is 0") {
    const auto data = testutil::share(testutil::random_dense(6, 2, 1));
    const DualModel model(data, KernelSpec::rbf(1.0));
    CHECK(decision_function(model, data->row(3)) == 0.0);
    for (const double f : decision_values(model, *data)) CHECK(f == 0.0);
    for (const int y : predict(model, *data)) CHECK(y == 1);
    CHECK(sign_label(0.0) == 1);
    CHECK(sign_label(-1e-300) == -1);
}

TEST_CASE("decision_function with one support point is the kernel value") {
    const auto data = testutil::share(testutil::random_dense(6, 2, 2));
    DualModel model(data, KernelSpec::rbf(0.8));
    model.alpha[4] = 1.0;
    const Dataset queries = testutil::random_dense(5, 2, 3);
    for (Index q = 0; q < queries.size(); ++q) {
        const double expect = oracle::rbf(queries.dense_row(q), data->dense_row(4), 0.8);
        CHECK(decision_function(model, queries.row(q)) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("decision values of a 3-point model match an explicit sum") {
    const auto data = testutil::share(testutil::random_dense(3, 4, 5));
    DualModel model(data, KernelSpec::rbf(1.3));
    model.alpha = {0.7, -1.1, 0.25};
    const Dataset queries = testutil::random_dense(7, 4, 6);
    const auto f = decision_values(model, queries);
    for (Index q = 0; q < queries.size(); ++q) {
        double expect = 0.0;
        for (Index j = 0; j < 3; ++j) expect += oracle::rbf(queries.dense_row(q), data->dense_row(j), 1.3) * model.alpha[j];
        CHECK(f[q] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(decision_function(model, queries.row(q)) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("objective_value examples") {
    const auto data = testutil::share(testutil::random_dense(8, 2, 7));
    DualModel model(data, KernelSpec::rbf(1.0));
    const std::vector<Index> batch{0, 3, 5};
    CHECK(objective_value(model, batch, 0.1) == 3.0);

    // Two well separated points with large coefficients: hinge vanishes.
    Dataset sep(1);
    sep.add_dense_row(std::vector<double>{-5.0}, -1);
    sep.add_dense_row(std::vector<double>{5.0}, 1);
    DualModel big(testutil::share(sep), KernelSpec::rbf(1.0));
    big.alpha = {-3.0, 3.0};
    const std::vector<Index> both{0, 1};
    CHECK(objective_value(big, both, 0.25) == 0.25 * 18.0);
}

TEST_CASE("objective_value on a 4-point instance matches a scalar computation") {
    Dataset d(2);
    d.add_dense_row(std::vector<double>{0.0, 0.0}, 1);
    d.add_dense_row(std::vector<double>{1.0, 0.0}, -1);
    d.add_dense_row(std::vector<double>{0.0, 2.0}, 1);
    d.add_dense_row(std::vector<double>{1.0, 1.0}, -1);
    const auto data = testutil::share(d);
    DualModel model(data, KernelSpec::rbf(1.0));
    model.alpha = {0.5, -0.25, 1.0, 0.0};
    const double lambda = 0.3;
    double expect = 0.0;
    for (Index i = 0; i < 4; ++i) {
        double f = 0.0;
        for (Index j = 0; j < 4; ++j) f += oracle::rbf(d.dense_row(i), d.dense_row(j), 1.0) * model.alpha[j];
        expect += std::max(0.0, 1.0 - d.label(i) * f);
    }
    expect += lambda * (0.25 + 0.0625 + 1.0);
    const std::vector<Index> all{0, 1, 2, 3};
    CHECK(objective_value(model, all, lambda) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("subgradient at the zero model") {
    const auto data = testutil::share(testutil::random_dense(10, 3, 8));
    const DualModel model(data, KernelSpec::rbf(1.0));
    const std::vector<Index> I{1, 4, 7, 9};
    const std::vector<Index> J{0, 4, 6};
    const auto g = subgradient(model, I, J, 0.5);
    CHECK(g.indices == J);
    const auto k = oracle::rbf_block(*data, I, J, 1.0);
    for (std::size_t b = 0; b < J.size(); ++b) {
        double expect = 0.0;
        for (std::size_t a = 0; a < I.size(); ++a) expect -= data->label(I[a]) * k[a][b];
        CHECK(g.values[b] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("subgradient with every margin satisfied is the scaled regularizer") {
    Dataset sep(1);
    sep.add_dense_row(std::vector<double>{-5.0}, -1);
    sep.add_dense_row(std::vector<double>{-4.5}, -1);
    sep.add_dense_row(std::vector<double>{4.5}, 1);
    sep.add_dense_row(std::vector<double>{5.0}, 1);
    const auto data = testutil::share(sep);
    DualModel model(data, KernelSpec::rbf(1.0));
    model.alpha = {-10.0, -10.0, 10.0, 10.0};
    const std::vector<Index> I{0, 3};
    const std::vector<Index> J{0, 1, 2, 3};
    const double lambda = 0.01;
    const auto bg = block_subgradient(model, I, J, lambda);
    CHECK(bg.violations == 0);
    CHECK(bg.hinge_sum == 0.0);
    for (std::size_t b = 0; b < J.size(); ++b) {
        CHECK(bg.gradient.values[b] == doctest::Approx(2.0 / 4.0 * 2.0 * lambda * model.alpha[J[b]]).epsilon(1e-14));
    }
}

TEST_CASE("subgradient matches central differences on a random 6x4 block") {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; checked < 20 && seed < 200; ++seed) {
        const auto data = testutil::share(testutil::random_dense(15, 3, seed));
        DualModel model(data, KernelSpec::rbf(1.0));
        Rng rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& a : model.alpha) a = normal(rng);
        const auto I = sample_indices(15, 6, rng);
        const auto J = sample_indices(15, 4, rng);
        oracle::RestrictedObjective obj{oracle::rbf_block(*data, I, J, 1.0), {}, 0.2, 6.0 / 15.0};
        for (const Index i : I) obj.y.push_back(data->label(i));
        std::vector<double> coef;
        for (const Index j : J) coef.push_back(model.alpha[j]);
        if (obj.kink_distance(coef) < 1e-4) continue;

        const auto fd = obj.central_difference(coef, 1e-6);
        const auto g = subgradient(model, I, J, 0.2);
        for (std::size_t b = 0; b < J.size(); ++b) {
            CHECK(std::abs(g.values[b] - fd[b]) <= 1e-5 * std::max(1.0, std::abs(fd[b])));
        }
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("hinge kink at margin exactly one contributes nothing") {
    Dataset d(1);
    d.add_dense_row(std::vector<double>{0.0}, 1);
    const auto data = testutil::share(d);
    DualModel model(data, KernelSpec::rbf(1.0));
    model.alpha = {1.0};  // f(x_0) = K_00 * 1 = 1 exactly
    const std::vector<Index> one{0};
    const auto bg = block_subgradient(model, one, one, 0.5);
    CHECK(bg.violations == 0);
    CHECK(bg.gradient.values[0] == doctest::Approx(2.0 * 0.5 * 1.0));
}

TEST_CASE("scaling features and sigma together leaves the gradient unchanged") {
    const Dataset base = testutil::random_dense(12, 3, 11);
    const double c = 3.7;
    Dataset scaled(3);
    for (Index i = 0; i < base.size(); ++i) {
        auto x = base.dense_row(i);
        for (auto& v : x) v *= c;
        scaled.add_dense_row(x, base.label(i));
    }
    DualModel m1(testutil::share(base), KernelSpec::rbf(0.9));
    DualModel m2(testutil::share(scaled), KernelSpec::rbf(0.9 * c));
    Rng rng(1);
    std::normal_distribution<double> normal(0.0, 0.5);
    for (std::size_t j = 0; j < m1.alpha.size(); ++j) m1.alpha[j] = m2.alpha[j] = normal(rng);
    const std::vector<Index> I{0, 2, 5, 7, 11};
    const std::vector<Index> J{1, 2, 3, 8};
    const auto g1 = subgradient(m1, I, J, 0.1);
    const auto g2 = subgradient(m2, I, J, 0.1);
    for (std::size_t b = 0; b < J.size(); ++b) CHECK(std::abs(g1.values[b] - g2.values[b]) <= 1e-10);
}

TEST_CASE("zero gradient over a full sweep means full-objective stationarity") {
    // Tiny separable problem where a closed-form stationary point exists:
    // with large lambda every margin stays below one, so the stationary alpha
    // solves 2 lambda alpha = K y.
    Dataset d(1);
    d.add_dense_row(std::vector<double>{-1.0}, -1);
    d.add_dense_row(std::vector<double>{1.0}, 1);
    const auto data = testutil::share(d);
    DualModel model(data, KernelSpec::rbf(1.0));
    const double lambda = 10.0;
    const double k01 = std::exp(-2.0);
    model.alpha = {-(1.0 - k01) / (2.0 * lambda), (1.0 - k01) / (2.0 * lambda)};
    const std::vector<Index> all{0, 1};
    const auto g = subgradient(model, all, all, lambda);
    for (const double v : g.values) CHECK(std::abs(v) <= 1e-14);
    // Any perturbation increases the full objective.
    const double at = objective_value(model, all, lambda);
    for (std::size_t j = 0; j < 2; ++j) {
        for (const double h : {1e-3, -1e-3}) {
            DualModel p = model;
            p.alpha[j] += h;
            CHECK(objective_value(p, all, lambda) > at);
        }
    }
}
