#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "chainscope/discretization.hpp"

using namespace chainscope;

TEST_CASE("circle metrics evaluate the formulas exactly") {
    FiniteMetricSpace arc4 = circle_metric(CircleMetricKind::arc, 4);
    CHECK(arc4(0, 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(arc4(0, 1) == doctest::Approx(0.25).epsilon(1e-15));

    FiniteMetricSpace sq8 = circle_metric(CircleMetricKind::sqrt_distorted, 8);
    CHECK(sq8(0, 1) == doctest::Approx(std::sqrt(0.125)).epsilon(1e-15));

    for (CircleMetricKind kind : {CircleMetricKind::arc, CircleMetricKind::sqrt_distorted}) {
        FiniteMetricSpace d = circle_metric(kind, 48);
        MetricReport r = check_metric(d.table(), d.size());
        CHECK(r.is_metric);
    }
    CHECK_THROWS_AS(circle_metric(CircleMetricKind::arc, 2), ValidationError);
}

TEST_CASE("discretize the grid-aligned quarter rotation") {
    SystemSpec spec;
    spec.kind = SystemKind::circle_rotation;
    spec.alpha = 0.25;
    spec.n = 8;
    auto [d, f] = discretize(spec);
    CHECK(d.size() == 8);
    REQUIRE(is_function(f));
    for (int i = 0; i < 8; ++i) CHECK(f.successors(i)[0] == (i + 2) % 8);
}

TEST_CASE("discretize the doubling map with the outer scheme") {
    SystemSpec spec;
    spec.kind = SystemKind::doubling;
    spec.n = 8;
    spec.outer = true;
    spec.lipschitz_bound = 2.0;
    auto [d, f] = discretize(spec);
    (void)d;
    for (int i = 0; i < 8; ++i) {
        CHECK(f.successors(i).size() >= 2);
        // radius 3h/2 around 2i/8 catches the image node and both neighbors
        CHECK(f.contains(i, (2 * i) % 8));
        CHECK(f.contains(i, (2 * i + 1) % 8));
        CHECK(f.contains(i, (2 * i + 7) % 8));
    }
}

TEST_CASE("outer relations contain the nearest relation") {
    for (SystemKind kind : {SystemKind::circle_rotation, SystemKind::doubling}) {
        SystemSpec spec;
        spec.kind = kind;
        spec.n = 32;
        auto [d1, nearest] = discretize(spec);
        spec.outer = true;
        spec.lipschitz_bound = kind == SystemKind::doubling ? 2.0 : 1.0;
        auto [d2, outer] = discretize(spec);
        (void)d1;
        (void)d2;
        for (auto [a, b] : nearest.edges()) CHECK(outer.contains(a, b));
    }
}

TEST_CASE("grid_map discretization from an image table") {
    // a 4-point map given by image positions: the shift by 1/4
    std::ofstream out("test_gridmap.json");
    out << "[0.25, 0.5, 0.75, 0.0]";
    out.close();
    SystemSpec spec;
    spec.kind = SystemKind::grid_map;
    spec.n = 4;
    spec.table_path = "test_gridmap.json";
    auto [d, f] = discretize(spec);
    (void)d;
    for (int i = 0; i < 4; ++i) CHECK(f.successors(i)[0] == (i + 1) % 4);
    std::remove("test_gridmap.json");
}

TEST_CASE("finite_relation passthrough") {
    save_relation_json(FiniteRelation(3, {{0, 1}, {1, 2}, {2, 0}}), "test_passthrough.json");
    SystemSpec spec;
    spec.kind = SystemKind::finite_relation;
    spec.relation_path = "test_passthrough.json";
    spec.metric = CircleMetricKind::discrete;
    auto [d, f] = discretize(spec);
    CHECK(d.size() == 3);
    CHECK(f == FiniteRelation(3, {{0, 1}, {1, 2}, {2, 0}}));
    std::remove("test_passthrough.json");
}

TEST_CASE("system spec JSON round-trip") {
    SystemSpec spec;
    spec.kind = SystemKind::doubling;
    spec.n = 64;
    spec.outer = true;
    spec.lipschitz_bound = 2.0;
    std::string text = system_spec_to_json(spec);
    SystemSpec back = parse_system_spec(text);
    CHECK(back.kind == SystemKind::doubling);
    CHECK(back.n == 64);
    CHECK(back.outer);
    CHECK(back.lipschitz_bound == 2.0);

    SystemSpec golden = parse_system_spec(R"({"kind":"circle_rotation","N":16,"alpha":"golden"})");
    CHECK(golden.alpha == doctest::Approx(kGoldenAlpha).epsilon(1e-15));
    CHECK_THROWS_AS(parse_system_spec(R"({"kind":"nope","N":4})"), ValidationError);
}

TEST_CASE("estimate_df is the identity sup for grid-aligned isometries") {
    SystemSpec spec;
    spec.kind = SystemKind::circle_rotation;
    spec.alpha = 0.25;
    spec.n = 8;
    auto [d, f] = discretize(spec);
    PseudoMetricTable df = estimate_df(d, f, 64);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) CHECK(df.at(i, j) == d(i, j));
    PseudoMetricTable df0 = estimate_df(d, f, 0);
    for (int i = 0; i < 64; ++i) CHECK(df0.values[i] == d.table()[i]);
}

TEST_CASE("estimate_df is monotone, dominates d, and stays pseudo-metric") {
    SystemSpec spec;
    spec.kind = SystemKind::circle_rotation;
    spec.n = 32;
    spec.metric = CircleMetricKind::sqrt_distorted;
    auto [d, f] = discretize(spec);
    PseudoMetricTable a = estimate_df(d, f, 8);
    PseudoMetricTable b = estimate_df(d, f, 32);
    for (int i = 0; i < 32 * 32; ++i) {
        CHECK(a.values[i] >= d.table()[i] - 1e-15);
        CHECK(b.values[i] >= a.values[i] - 1e-15);
    }
    MetricReport r = check_metric(b.values, 32, 1e-12);
    CHECK(r.is_pseudo_metric);
    CHECK_THROWS_AS(estimate_df(d, FiniteRelation(32, {{0, 1}, {0, 2}}), 4), DomainError);
}

TEST_CASE("estimate_df matches the closed form for the distorted rotation") {
    // d_f(x1,x2) = max(|x1-x2|, sqrt(|x1-x2|)) for grid pairs once the orbit
    // covers the grid; N chosen so the rotation steps generate all offsets.
    const int n = 256;
    SystemSpec spec;
    spec.kind = SystemKind::circle_rotation;
    spec.n = n;
    spec.alpha = 101.0 / 256.0; // grid-aligned and coprime: every offset occurs
    spec.metric = CircleMetricKind::sqrt_distorted;
    auto [d, f] = discretize(spec);
    PseudoMetricTable df = estimate_df(d, f, 4 * n);
    for (int i = 0; i < n; i += 7) {
        for (int delta = 1; delta <= n / 2; delta += 11) {
            int j = (i + delta) % n;
            double gap = static_cast<double>(delta) / n;
            double expected = std::max(gap, std::sqrt(gap));
            CHECK(df.at(i, j) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    // closed-form spot check: a gap of 0.09 gives 0.3
    CHECK(std::max(0.09, std::sqrt(0.09)) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("bilipschitz_ratio basics") {
    FiniteMetricSpace d = circle_metric(CircleMetricKind::arc, 16);
    RatioRange same = bilipschitz_ratio(d, d);
    CHECK(same.min_ratio == doctest::Approx(1.0));
    CHECK(same.max_ratio == doctest::Approx(1.0));

    std::vector<double> doubled = d.table();
    for (double& v : doubled) v *= 2.0;
    FiniteMetricSpace d2(d.labels(), std::move(doubled));
    RatioRange twice = bilipschitz_ratio(d2, d);
    CHECK(twice.min_ratio == doctest::Approx(2.0));
    CHECK(twice.max_ratio == doctest::Approx(2.0));

    PseudoMetricTable zero;
    zero.n = 2;
    zero.values = {0, 0, 0, 0};
    CHECK_THROWS_AS(bilipschitz_ratio(d2.as_pseudo(), zero), ShapeError);
    PseudoMetricTable zero16 = d.as_pseudo();
    zero16.values.assign(zero16.values.size(), 0.0);
    CHECK_THROWS_AS(bilipschitz_ratio(d2.as_pseudo(), zero16), ValidationError);
}

TEST_CASE("non-bi-Lipschitz signature of the distorted rotation grows") {
    auto max_ratio_at = [](int n) {
        SystemSpec spec;
        spec.kind = SystemKind::circle_rotation;
        spec.n = n;
        spec.metric = CircleMetricKind::sqrt_distorted;
        auto [d, f] = discretize(spec);
        PseudoMetricTable df = estimate_df(d, f, 4 * n);
        FiniteMetricSpace arc = circle_metric(CircleMetricKind::arc, n);
        RatioRange r = bilipschitz_ratio(df, arc.as_pseudo());
        CHECK(r.min_ratio >= 1.0 - 1e-12);
        return r.max_ratio;
    };
    double r64 = max_ratio_at(64);
    double r256 = max_ratio_at(256);
    CHECK(r64 >= 4.0);           // sqrt(h)/h = 8 at h = 1/64, up to parity effects
    CHECK(r256 >= 1.3 * r64);    // the signature grows under refinement
}

TEST_CASE("refine_study trends for the replicated finite instance") {
    save_relation_json(FiniteRelation(3, {{0, 1}, {1, 2}, {2, 0}}), "test_cycle3.json");
    SystemSpec spec;
    spec.kind = SystemKind::finite_relation;
    spec.relation_path = "test_cycle3.json";
    spec.metric = CircleMetricKind::discrete;
    StudyOptions opts;
    StudyResult study = refine_study(spec, {4, 8, 16}, opts);
    REQUIRE(study.rows.size() == 3);
    for (const auto& row : study.rows) CHECK(row.period == 3);
    CHECK(study.trend["period"] == "stable");
    std::remove("test_cycle3.json");
}

TEST_CASE("study CSV is written") {
    SystemSpec spec;
    spec.kind = SystemKind::doubling;
    spec.n = 16;
    StudyResult study = refine_study(spec, {16, 32});
    save_study_csv(study, "test_study.csv");
    std::ifstream in("test_study.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "N,h,theta_max,rho_max,period,scc_count,ell_max,ell_is_bound,wall_ms");
    std::remove("test_study.csv");
}
