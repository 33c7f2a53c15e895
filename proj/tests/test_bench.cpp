#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dsekl/bench.hpp"
#include "dsekl/data_io.hpp"

using namespace dsekl;

TEST_CASE("report statistics are recomputable") {
    BenchmarkReport r;
    r.errors = {0.1, 0.2, 0.4, 0.25};
    r.finalize();
    double m = 0.0;
    for (const double e : r.errors) m += e;
    m /= 4.0;
    double v = 0.0;
    for (const double e : r.errors) v += (e - m) * (e - m);
    CHECK(std::abs(r.mean - m) <= 1e-12);
    CHECK(std::abs(r.stddev - std::sqrt(v / 3.0)) <= 1e-12);
    const auto j = to_json(r);
    CHECK(j["repetitions"] == 4);
    CHECK(j["errors"].size() == 4);
    CHECK(stddev_of({0.3}) == 0.0);
}

TEST_CASE("method names") {
    for (const Method m : {Method::Dsekl, Method::Rks, Method::EmpFix, Method::Batch}) {
        CHECK(parse_method(to_string(m)) == m);
    }
    CHECK_THROWS(parse_method("svm"));
}

TEST_CASE("sweep is reproducible and carries a batch reference row") {
    SweepOptions o;
    o.axis = SweepAxis::J;
    o.values = {1, 5};
    o.fixed_other = 20;
    o.repetitions = 1;
    o.n_train = 40;
    o.n_test = 40;
    o.tune = false;
    o.fixed = {1e-3, 1.0, 1.0, 20, 20};
    o.budget.max_epochs = 5;
    o.budget.batch_max_iters = 50;
    o.seed = 17;
    const auto rows = run_xor_sweep(o);
    REQUIRE(rows.size() == 3 * 2 + 1);
    CHECK_FALSE(rows.back().value.has_value());
    std::ostringstream a;
    std::ostringstream b;
    write_sweep_csv(a, o.axis, rows);
    write_sweep_csv(b, o.axis, run_xor_sweep(o));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("method,axis,value,mean_error,std_error,repetitions\n", 0) == 0);
    CHECK(a.str().find("batch,J,ref,") != std::string::npos);
}

TEST_CASE("covertype protocol sizes scale with the subsample") {
    Rng rng(3);
    const Dataset data = generate_xor(3000, rng);
    CovertypeOptions o;
    o.max_epochs = 2;
    const auto r = run_covertype(data, o);
    CHECK(r.n_validation == 200);
    CHECK(r.n_evaluation == 1000);
    CHECK(r.n_train == 1800);
    CHECK(r.config.grad_batch_size == 52);  // round(10000 * 3000 / 581012)
    CHECK(r.config.lambda == doctest::Approx(1.0 / 1800.0));
    CHECK(r.config.schedule == StepSchedule::InverseEpoch);
    CHECK(r.final_error < 0.5);
}

TEST_CASE("duplicate repeats rows") {
    Rng rng(4);
    const Dataset d = generate_xor(7, rng);
    const Dataset twice = duplicate(d, 2);
    CHECK(twice.size() == 14);
    CHECK(twice.dense_row(9) == d.dense_row(2));
}
