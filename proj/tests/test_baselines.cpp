#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "dsekl/baselines.hpp"
#include "dsekl/data_io.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dsekl;

TEST_CASE("zero-frequency feature is sqrt(2)") {
    RKSFeatureMap map;
    map.frequencies = Eigen::MatrixXd::Zero(1, 3);
    map.phases = Eigen::VectorXd::Zero(1);
    map.scale = std::sqrt(2.0);
    for (const auto& x : {std::vector<double>{0, 0, 0}, std::vector<double>{5, -2, 1e3}}) {
        const auto z = rks_transform(x, map);
        CHECK(z(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    }
}

TEST_CASE("rks_transform rejects mismatched input") {
    const auto map = RKSFeatureMap::sample(3, 4, 1.0, 1);
    CHECK_THROWS_AS(rks_transform(std::vector<double>{1.0, 2.0}, map), std::invalid_argument);
}

TEST_CASE("feature map sampling is deterministic and bounded") {
    const auto m1 = RKSFeatureMap::sample(4, 32, 0.8, 77);
    const auto m2 = RKSFeatureMap::sample(4, 32, 0.8, 77);
    CHECK(m1.frequencies == m2.frequencies);
    CHECK(m1.phases == m2.phases);
    for (Eigen::Index r = 0; r < m1.phases.size(); ++r) {
        CHECK(m1.phases(r) >= 0.0);
        CHECK(m1.phases(r) < 2.0 * 3.141592653589793);
    }
    const Dataset data = testutil::random_sparse(10, 4, 0.6, 3);
    const Eigen::MatrixXd z = rks_transform(data, m1);
    for (Index i = 0; i < data.size(); ++i) {
        CHECK(z.row(static_cast<Eigen::Index>(i)).squaredNorm() <= 2.0 + 1e-12);
        const Eigen::VectorXd zi = rks_transform(data.dense_row(i), m1);
        CHECK((zi.transpose() - z.row(static_cast<Eigen::Index>(i))).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("frequency variance matches 1/sigma^2") {
    const double sigma = 2.5;
    const auto map = RKSFeatureMap::sample(2, 20000, sigma, 5);
    const double var = map.frequencies.array().square().mean();
    CHECK(var == doctest::Approx(1.0 / (sigma * sigma)).epsilon(0.03));
}

TEST_CASE("self inner product concentrates at one") {
    const auto map = RKSFeatureMap::sample(3, 10000, 1.0, 11);
    const std::vector<double> x{0.4, -1.0, 2.0};
    const Eigen::VectorXd z = rks_transform(x, map);
    CHECK(std::abs(z.squaredNorm() - 1.0) < 0.05);
}

TEST_CASE("averaged feature inner products approximate the RBF kernel") {
    const Dataset data = testutil::random_dense(10, 3, 21, 0.7);
    for (const double sigma : {0.7, 1.5}) {
        for (Index i = 0; i + 1 < data.size(); i += 2) {
            const auto x = data.dense_row(i);
            const auto y = data.dense_row(i + 1);
            double avg = 0.0;
            const int maps = 2000;
            for (int s = 0; s < maps; ++s) {
                const auto map = RKSFeatureMap::sample(3, 16, sigma, 1000 + static_cast<std::uint64_t>(s));
                avg += rks_transform(x, map).dot(rks_transform(y, map));
            }
            avg /= maps;
            CHECK(std::abs(avg - oracle::rbf(x, y, sigma)) < 0.02);
        }
    }
}

TEST_CASE("train_rks with huge lambda predicts the majority class at best") {
    Rng rng(3);
    Dataset data(2);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < 90; ++i) {
        data.add_dense_row(std::vector<double>{normal(rng), normal(rng)}, i < 60 ? 1 : -1);
    }
    TrainConfig c;
    c.lambda = 1e6;
    c.eta0 = 1e-7;
    c.max_epochs = 5;
    const auto model = train_rks(data, 1.0, 20, c);
    CHECK(model.linear.weights.size() == 20);
    CHECK(model.linear.weights.cwiseAbs().maxCoeff() < 1e-3);
    const double err = error_rate(model.predict(data), data.labels());
    CHECK(std::abs(err - 1.0 / 3.0) < 0.1);
}

TEST_CASE("train_rks learns XOR with enough features") {
    Rng rng(4);
    const Dataset train = generate_xor(200, rng);
    const Dataset test = generate_xor(200, rng);
    TrainConfig c;
    c.grad_batch_size = 50;
    c.lambda = 1e-3;
    c.max_epochs = 50;
    const auto model = train_rks(train, 1.0, 200, c);
    CHECK(error_rate(model.predict(test), test.labels()) < 0.1);
}

TEST_CASE("fixed subsample keeps coefficients outside the landmarks at zero") {
    Rng rng(5);
    const auto data = testutil::share(generate_xor(100, rng));
    TrainConfig c;
    c.grad_batch_size = 50;
    c.max_epochs = 10;
    const auto r = train_fixed_subsample(data, KernelSpec::rbf(1.0), 20, c);
    CHECK(r.model.support().size() <= 20);
    CHECK(r.model.support().size() > 0);
}

TEST_CASE("fixed subsample of all rows matches DSEKL with J = N") {
    Rng rng(6);
    const auto data = testutil::share(generate_xor(50, rng));
    TrainConfig c;
    c.grad_batch_size = 10;
    c.expansion_size = 50;
    c.max_epochs = 8;
    c.seed = 3;
    const auto fixed = train_fixed_subsample(data, KernelSpec::rbf(1.0), 50, c);
    const auto full = train_serial(data, KernelSpec::rbf(1.0), c);
    for (std::size_t j = 0; j < 50; ++j) CHECK(std::abs(fixed.model.alpha[j] - full.model.alpha[j]) <= 1e-9);
}

TEST_CASE("batch solver separates two points") {
    Dataset d(2);
    d.add_dense_row(std::vector<double>{1.0, 0.0}, 1);
    d.add_dense_row(std::vector<double>{-1.0, 0.0}, -1);
    const auto data = testutil::share(d);
    BatchOptions b;
    b.lambda = 1e-3;
    const auto r = train_batch(data, KernelSpec::rbf(1.0), b);
    CHECK(error_rate(predict(r.model, d), d.labels()) == 0.0);
}

TEST_CASE("batch solver refuses oversized data") {
    Dataset d(1);
    for (std::size_t i = 0; i <= kBatchMaxSamples; ++i) {
        d.add_dense_row(std::vector<double>{static_cast<double>(i)}, i % 2 ? 1 : -1);
    }
    try {
        train_batch(testutil::share(d), KernelSpec::rbf(1.0), {});
        FAIL("expected refusal");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("dsekl") != std::string::npos);
    }
}

TEST_CASE("batch solution is stationary in the smooth regime") {
    // With lambda large enough every margin stays below one, the objective is
    // a smooth quadratic and the subgradient method converges to its minimum.
    Rng rng(7);
    const auto data = testutil::share(generate_xor(60, rng));
    BatchOptions b;
    b.lambda = 1000.0;
    b.eta0 = 1.0 / (2.0 * b.lambda);
    b.schedule = StepSchedule::InverseEpoch;
    b.max_iters = 200;
    // The first step with eta = 1 / (2 lambda) lands on 2 lambda alpha = K y.
    const auto r = train_batch(data, KernelSpec::rbf(1.0), b);
    std::vector<Index> all(60);
    std::iota(all.begin(), all.end(), Index{0});
    const auto g = block_subgradient(r.model, all, all, b.lambda);
    CHECK(g.violations == 60);
    double norm = 0.0;
    for (const double v : g.gradient.values) norm += v * v;
    CHECK(std::sqrt(norm) < 1e-4 * 60.0);
}
