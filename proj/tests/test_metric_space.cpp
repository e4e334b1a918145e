#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "chainscope/discretization.hpp"
#include "chainscope/metric_space.hpp"

using namespace chainscope;

TEST_CASE("check_metric on the discrete metric") {
    std::vector<std::vector<double>> t = {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    MetricReport r = check_metric(t);
    CHECK(r.is_pseudo_metric);
    CHECK(r.is_metric);
    CHECK(r.is_ultrametric);
    CHECK(r.worst_violation == 0.0);
}

TEST_CASE("check_metric reports the triangle violation magnitude") {
    // d(a,b)=1, d(b,c)=1, d(a,c)=3 fails by 3-2.
    std::vector<std::vector<double>> t = {{0, 1, 3}, {1, 0, 1}, {3, 1, 0}};
    MetricReport r = check_metric(t);
    CHECK(!r.is_pseudo_metric);
    CHECK(r.worst_violation == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("check_metric on the 8-point arc metric") {
    FiniteMetricSpace d = circle_metric(CircleMetricKind::arc, 8);
    MetricReport r = check_metric(d.table(), 8);
    CHECK(r.is_pseudo_metric);
    CHECK(r.is_metric);
    CHECK(!r.is_ultrametric); // d(0, 2/8) = 0.25 > max(0.125, 0.125)
}

TEST_CASE("check_metric rejects malformed input") {
    std::vector<std::vector<double>> ragged = {{0, 1}, {1}};
    CHECK_THROWS_AS(check_metric(ragged), ShapeError);
    std::vector<double> with_nan = {0, std::nan(""), std::nan(""), 0};
    CHECK_THROWS_AS(check_metric(with_nan, 2), ShapeError);
}

TEST_CASE("power_metric identity and discrete square") {
    FiniteMetricSpace d2 = FiniteMetricSpace::discrete(2);
    FiniteMetricSpace same = power_metric(d2, 1);
    CHECK(same.size() == 2);
    CHECK(same(0, 1) == 1.0);

    FiniteMetricSpace sq = power_metric(d2, 2);
    REQUIRE(sq.size() == 4);
    // Tuples in row-major order: (0,0),(0,1),(1,0),(1,1).
    CHECK(sq(0, 0) == 0.0);
    CHECK(sq(0, 1) == 1.0);
    CHECK(sq(0, 3) == 1.0);
    CHECK(sq(1, 2) == 1.0);
    CHECK(sq(1, 1) == 0.0);
}

TEST_CASE("power_metric evaluates the max formula on the arc circle") {
    FiniteMetricSpace d = circle_metric(CircleMetricKind::arc, 8);
    FiniteMetricSpace d2 = power_metric(d, 2);
    // d2((0, 0.25), (0.125, 0.5)) = max(0.125, 0.25) = 0.25; points (0,2),(1,4).
    int a = 0 * 8 + 2, b = 1 * 8 + 4;
    CHECK(d2(a, b) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("power_metric preserves metric flags") {
    FiniteMetricSpace disc = FiniteMetricSpace::discrete(2);
    for (int n = 2; n <= 3; ++n) {
        FiniteMetricSpace p = power_metric(disc, n);
        MetricReport r = check_metric(p.table(), p.size());
        CHECK(r.is_metric);
        CHECK(r.is_ultrametric);
    }
    FiniteMetricSpace arc = circle_metric(CircleMetricKind::arc, 8);
    MetricReport r0 = check_metric(arc.table(), 8);
    FiniteMetricSpace p = power_metric(arc, 2);
    MetricReport r = check_metric(p.table(), p.size());
    CHECK(r.is_metric == r0.is_metric);
    CHECK(r.is_ultrametric == r0.is_ultrametric);
}

TEST_CASE("power_metric respects the size cap") {
    FiniteMetricSpace d = circle_metric(CircleMetricKind::arc, 8);
    CHECK_THROWS_AS(power_metric(d, 2, 10), CapacityError);
}

TEST_CASE("quotient_by_zero_set merges the zero classes") {
    PseudoMetricTable rho;
    rho.n = 3;
    rho.values = {0, 0, 1, 0, 0, 1, 1, 1, 0};
    QuotientResult q = quotient_by_zero_set(rho, 0.0);
    REQUIRE(q.partition.classes.size() == 2);
    CHECK(q.partition.classes[0] == std::vector<int>{0, 1});
    CHECK(q.partition.classes[1] == std::vector<int>{2});
    CHECK(q.quotient.at(0, 1) == 1.0);
    CHECK(q.min_interclass_distance == 1.0);
}

TEST_CASE("quotient_by_zero_set collapses an all-zero table") {
    PseudoMetricTable rho;
    rho.n = 3;
    rho.values.assign(9, 0.0);
    QuotientResult q = quotient_by_zero_set(rho, 0.0);
    CHECK(q.partition.classes.size() == 1);
    CHECK(q.quotient.n == 1);
    CHECK(q.quotient.at(0, 0) == 0.0);
}

TEST_CASE("quotient of an exact pseudo-metric is a metric") {
    PseudoMetricTable rho;
    rho.n = 4;
    // Two zero-classes {0,1}, {2,3} at distance 2.
    rho.values = {0, 0, 2, 2, 0, 0, 2, 2, 2, 2, 0, 0, 2, 2, 0, 0};
    QuotientResult q = quotient_by_zero_set(rho, 0.0);
    MetricReport r = check_metric(q.quotient.values, q.quotient.n);
    CHECK(r.is_metric);
}

TEST_CASE("metric CSV and binary round-trips") {
    FiniteMetricSpace d = circle_metric(CircleMetricKind::sqrt_distorted, 8);
    save_metric_csv(d, "test_metric.csv");
    FiniteMetricSpace back = load_metric_csv("test_metric.csv");
    REQUIRE(back.size() == d.size());
    for (int i = 0; i < d.size(); ++i) {
        CHECK(back.label(i) == d.label(i));
        for (int j = 0; j < d.size(); ++j) CHECK(back(i, j) == d(i, j));
    }
    save_metric_binary(d, "test_metric.bin");
    FiniteMetricSpace bin = load_metric_binary("test_metric.bin");
    REQUIRE(bin.size() == d.size());
    for (int i = 0; i < d.size(); ++i)
        for (int j = 0; j < d.size(); ++j) CHECK(bin(i, j) == d(i, j));
    std::remove("test_metric.csv");
    std::remove("test_metric.bin");
}
