#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "chainscope/discretization.hpp"
#include "chainscope/product_mixing.hpp"
#include "support/chain_oracle.hpp"
#include "support/instances.hpp"

using namespace chainscope;
using namespace chainscope::test;

namespace {

ProductOptions exact_opts() {
    ProductOptions opts;
    opts.jump.kind = JumpGraphSpec::Kind::complete;
    return opts;
}

// Independent route: materialize f x f and d^(2) and run the layered chain
// oracle from the diagonal base. The engine never builds these products.
std::vector<double> product_oracle(const FiniteRelation& f, const FiniteMetricSpace& d,
                                   BarrierMode mode, int z) {
    FiniteRelation ff = product(f, f);
    FiniteMetricSpace dd = power_metric(d, 2);
    int m = f.n_points() * f.n_points();
    return oracle_barrier_row(ff, dd, mode, JumpPolicy::free_initial, z * f.n_points() + z, 2 * m);
}

} // namespace

TEST_CASE("rho and theta on the period-3 cycle") {
    FiniteRelation c3 = cycle_relation(3);
    FiniteMetricSpace d = FiniteMetricSpace::discrete(3);
    PseudoMetricResult rho = rho_pseudometric(c3, d, exact_opts());
    PseudoMetricResult theta = theta_pseudoultrametric(c3, d, exact_opts());
    for (int i = 0; i < 3; ++i) {
        CHECK(rho.table.at(i, i) == 0.0);
        CHECK(theta.table.at(i, i) == 0.0);
    }
    CHECK(rho.table.at(0, 1) == 1.0);
    CHECK(theta.table.at(0, 1) == 1.0);
    CHECK(!rho.diag.flagged);
    CHECK(theta.diag.base_independence_gap == 0.0);
    CHECK(theta.diag.max_asymmetry == 0.0);
}

TEST_CASE("product tables equal the materialized-product oracle") {
    Rng rng(77);
    for (int n = 2; n <= 4; ++n) {
        FiniteMetricSpace d = circle_metric(CircleMetricKind::arc, std::max(n, 3));
        if (d.size() != n) d = FiniteMetricSpace::discrete(n);
        for (int trial = 0; trial < 12; ++trial) {
            int m = 1 + rng.below(2 * n);
            std::vector<std::pair<int, int>> edges;
            for (int i = 0; i < m; ++i) edges.emplace_back(rng.below(n), rng.below(n));
            FiniteRelation f(n, std::move(edges));
            ProductOptions opts = exact_opts();
            opts.reverse_check = false;
            opts.second_base_check = false;
            PseudoMetricResult rho = rho_pseudometric(f, d, opts);
            PseudoMetricResult theta = theta_pseudoultrametric(f, d, opts);
            auto rho_expect = product_oracle(f, d, BarrierMode::length, 0);
            auto theta_expect = product_oracle(f, d, BarrierMode::bound, 0);
            for (int i = 0; i < n * n; ++i) {
                if (std::isinf(rho_expect[i]))
                    CHECK(std::isinf(rho.table.values[i]));
                else
                    CHECK(rho.table.values[i] == doctest::Approx(rho_expect[i]).epsilon(1e-12));
                if (std::isinf(theta_expect[i]))
                    CHECK(std::isinf(theta.table.values[i]));
                else
                    CHECK(theta.table.values[i] == doctest::Approx(theta_expect[i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("theta stays below scale when a fixed point meets chain transitivity") {
    // Both coordinates route through the fixed point.
    FiniteRelation f(3, {{0, 0}, {0, 1}, {1, 2}, {2, 0}});
    FiniteMetricSpace d = circle_metric(CircleMetricKind::arc, 3);
    PseudoMetricResult theta = theta_pseudoultrametric(f, d, exact_opts());
    // Exact chains exist between all points here, so theta vanishes.
    for (int i = 0; i < 9; ++i) CHECK(theta.table.values[i] == 0.0);
}

TEST_CASE("pseudo tables satisfy the triple sweeps and sit below d") {
    FiniteRelation c3 = cycle_relation(3);
    FiniteMetricSpace d3 = FiniteMetricSpace::discrete(3);
    FiniteRelation sw = swap_relation();
    FiniteMetricSpace d2 = FiniteMetricSpace::discrete(2);

    auto check_pair = [](const FiniteRelation& f, const FiniteMetricSpace& d) {
        PseudoMetricResult rho = rho_pseudometric(f, d, exact_opts());
        PseudoMetricResult theta = theta_pseudoultrametric(f, d, exact_opts());
        MetricReport rr = rho.table.check(1e-12);
        CHECK(rr.is_pseudo_metric);
        MetricReport tr = theta.table.check(1e-12);
        CHECK(tr.is_pseudo_metric);
        CHECK(tr.ultrametric_violation <= 1e-12);
        for (int i = 0; i < d.size(); ++i)
            for (int j = 0; j < d.size(); ++j) {
                CHECK(rho.table.at(i, j) <= d(i, j) + 1e-12);
                CHECK(theta.table.at(i, j) <= rho.table.at(i, j) + 1e-12);
            }
        CHECK(rho.diag.base_independence_gap <= 1e-12);
        CHECK(theta.diag.base_independence_gap <= 1e-12);
    };
    check_pair(c3, d3);
    check_pair(sw, d2);
}

TEST_CASE("period of the worked instances") {
    FiniteMetricSpace d3 = FiniteMetricSpace::discrete(3);
    CHECK(period(cycle_relation(3), d3, 0.5) == 3);
    FiniteMetricSpace d2 = FiniteMetricSpace::discrete(2);
    CHECK(period(swap_relation(), d2, 0.5) == 2);
    CHECK(period(cycle_relation(3), d3, 1.5) == 1); // complete graph at large eps

    FiniteRelation split(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}});
    FiniteMetricSpace d4 = FiniteMetricSpace::discrete(4);
    CHECK_THROWS_AS(period(split, d4, 0.5), NotChainTransitiveError);
    try {
        period(split, d4, 0.5);
    } catch (const NotChainTransitiveError& e) {
        CHECK(e.sccs.size() == 2);
    }
}

TEST_CASE("period 1 at grid scale for the golden rotation") {
    SystemSpec spec;
    spec.kind = SystemKind::circle_rotation;
    spec.n = 128;
    auto [d, f] = discretize(spec);
    CHECK(period(f, d, 2.0 / 128) == 1);
}

TEST_CASE("mixing criteria loop on small strongly connected relations") {
    // period = 1  <=>  diagonal product reachability total  <=>  theta == 0.
    for (int n = 2; n <= 4; ++n) {
        FiniteMetricSpace d = FiniteMetricSpace::discrete(n);
        int pairs = n * n;
        for (unsigned long mask = 1; mask < (1ul << pairs); ++mask) {
            if (__builtin_popcountl(mask) > 6) continue;
            std::vector<std::pair<int, int>> edges;
            for (int p = 0; p < pairs; ++p)
                if (mask & (1ul << p)) edges.emplace_back(p / n, p % n);
            FiniteRelation f(n, std::move(edges));
            Digraph g = epsilon_chain_graph(f, d, 0.5);
            if (!is_strongly_connected(g)) continue;

            int p = digraph_period(g);
            ProductOptions opts = exact_opts();
            opts.reverse_check = false;
            opts.second_base_check = false;
            PseudoMetricResult theta = theta_pseudoultrametric(f, d, opts);
            bool theta_zero = true;
            for (double v : theta.table.values)
                if (v != 0.0) theta_zero = false;

            // Diagonal-sourced product reachability (>= 1 step) is total.
            FiniteRelation ff = product(f, f);
            ReachResult rr = reach(ff);
            bool total = rr.orbit_sets[0 * n + 0].size() == static_cast<std::size_t>(n) * n;

            CHECK((p == 1) == theta_zero);
            CHECK((p == 1) == total);
        }
    }
}

TEST_CASE("classify the period-3 cycle") {
    FiniteRelation c3 = cycle_relation(3);
    FiniteMetricSpace d = FiniteMetricSpace::discrete(3);
    ClassifyOptions opts;
    opts.jump.kind = JumpGraphSpec::Kind::complete;
    Classification cls = classify(c3, d, {0.5}, opts);
    CHECK(cls.chain_transitive == Verdict::yes);
    CHECK(cls.chain_mixing == Verdict::no);
    CHECK(cls.strong_chain_transitive == Verdict::yes);
    CHECK(cls.strong_chain_mixing == Verdict::no);
    CHECK(cls.period == 3);
}

TEST_CASE("classify the swap instance") {
    Classification cls = classify(swap_relation(), FiniteMetricSpace::discrete(2), {0.5});
    CHECK(cls.chain_transitive == Verdict::yes);
    CHECK(cls.chain_mixing == Verdict::no);
    CHECK(cls.strong_chain_transitive == Verdict::yes);
    CHECK(cls.strong_chain_mixing == Verdict::no);
    CHECK(cls.period == 2);
}

TEST_CASE("cyclic factors") {
    FiniteMetricSpace d3 = FiniteMetricSpace::discrete(3);
    QuotientSystem q3 = cyclic_factor(cycle_relation(3), d3, 0.5);
    CHECK(q3.factor_kind == FactorKind::cyclic);
    REQUIRE(q3.partition.classes.size() == 3);
    for (const auto& cls : q3.partition.classes) CHECK(cls.size() == 1);
    CHECK(q3.induced_relation == cycle_relation(3));
    CHECK(q3.isometry_defect == 0.0);

    FiniteMetricSpace d2 = FiniteMetricSpace::discrete(2);
    QuotientSystem q2 = cyclic_factor(swap_relation(), d2, 0.5);
    CHECK(q2.partition.classes.size() == 2);

    // Two 3-cycles joined by eps-small jumps: classes of size 2.
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < 3; ++i) {
        edges.emplace_back(i, (i + 1) % 3);
        edges.emplace_back(3 + i, 3 + (i + 1) % 3);
    }
    FiniteRelation two(6, std::move(edges));
    std::vector<double> dist(36, 1.0);
    for (int i = 0; i < 6; ++i) dist[i * 6 + i] = 0.0;
    for (int i = 0; i < 3; ++i) dist[i * 6 + (i + 3)] = dist[(i + 3) * 6 + i] = 0.1;
    FiniteMetricSpace d6({"a0", "a1", "a2", "b0", "b1", "b2"}, std::move(dist));
    CHECK(period(two, d6, 0.2) == 3);
    QuotientSystem q = cyclic_factor(two, d6, 0.2);
    REQUIRE(q.partition.classes.size() == 3);
    for (const auto& cls : q.partition.classes) CHECK(cls.size() == 2);
    for (auto [a, b] : two.edges()) {
        int adv = (q.partition.class_of[b] - q.partition.class_of[a] + 3) % 3;
        CHECK(adv == 1);
    }

    CHECK_THROWS_AS(cyclic_factor(complete_relation(2), FiniteMetricSpace::discrete(2), 0.5),
                    NoFactorError);
}

TEST_CASE("quotient factors") {
    FiniteRelation c3 = cycle_relation(3);
    FiniteMetricSpace d3 = FiniteMetricSpace::discrete(3);
    PseudoMetricResult theta = theta_pseudoultrametric(c3, d3, exact_opts());
    QuotientSystem q = quotient_factor(c3, theta.table, 0.5);
    CHECK(q.factor_kind == FactorKind::isometric);
    CHECK(q.partition.classes.size() == 3);
    CHECK(q.induced_relation == cycle_relation(3));
    CHECK(q.isometry_defect == 0.0);

    // swap with rho: two classes, induced swap, quotient distance 1
    FiniteRelation sw = swap_relation();
    FiniteMetricSpace d2 = FiniteMetricSpace::discrete(2);
    PseudoMetricResult rho = rho_pseudometric(sw, d2, exact_opts());
    QuotientSystem qs = quotient_factor(sw, rho.table, 0.0);
    CHECK(qs.partition.classes.size() == 2);
    CHECK(qs.induced_relation == sw);
    CHECK(qs.quotient_distances.at(0, 1) == 1.0);

    // doubling at small N: theta collapses at 3h resolution
    SystemSpec spec;
    spec.kind = SystemKind::doubling;
    spec.n = 16;
    auto [dd, ff] = discretize(spec);
    PseudoMetricResult th = theta_pseudoultrametric(ff, dd, exact_opts());
    QuotientSystem qt = quotient_factor(ff, th.table, 3.0 / 16);
    CHECK(qt.factor_kind == FactorKind::trivial);
    CHECK(qt.partition.classes.size() == 1);
}

TEST_CASE("isometry defect of grid rotations and factors") {
    // Grid-aligned rational rotation is an exact isometry of the arc metric.
    SystemSpec spec;
    spec.kind = SystemKind::circle_rotation;
    spec.alpha = 0.25;
    spec.n = 8;
    auto [d, f] = discretize(spec);
    CHECK(isometry_defect(f, d.as_pseudo()) == 0.0);

    FiniteRelation c3 = cycle_relation(3);
    PseudoMetricResult theta =
        theta_pseudoultrametric(c3, FiniteMetricSpace::discrete(3), exact_opts());
    CHECK(isometry_defect(c3, theta.table) == 0.0);
}

TEST_CASE("strong_chain_over_metrics thresholds and scaling") {
    FiniteRelation c3 = cycle_relation(3);
    FiniteMetricSpace d = FiniteMetricSpace::discrete(3);
    // Single metric: the A-threshold relation itself.
    FiniteRelation single = strong_chain_over_metrics(c3, {d}, 0.5);
    BarrierField ell = barrier(c3, d, BarrierMode::length, JumpPolicy::free_initial);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) CHECK(single.contains(x, y) == (ell.at(x, y) <= 0.5));

    // {d, 2d} at 2*eps equals {d} at eps.
    std::vector<double> doubled = d.table();
    for (double& v : doubled) v *= 2.0;
    FiniteMetricSpace d2x(d.labels(), std::move(doubled));
    FiniteRelation both = strong_chain_over_metrics(c3, {d, d2x}, 1.0);
    FiniteRelation one = strong_chain_over_metrics(c3, {d}, 0.5);
    CHECK(both == one);
}

TEST_CASE("minimality persists across admissible metrics for the rotation") {
    // Intersection of the length-barrier thresholds over {arc, sqrt-distorted}
    // at eps = 4h stays total: the rotation is minimal for every admissible
    // metric, and chains route their jumps away from the distortion point.
    const int n = 64;
    SystemSpec spec;
    spec.kind = SystemKind::circle_rotation;
    spec.n = n;
    auto [arc, f] = discretize(spec);
    FiniteMetricSpace sq = circle_metric(CircleMetricKind::sqrt_distorted, n);
    FiniteRelation inter = strong_chain_over_metrics(f, {arc, sq}, 4.0 / n);
    CHECK(inter.edge_count() == static_cast<std::size_t>(n) * n);
}

TEST_CASE("rotation trend classification across refinements") {
    SystemSpec spec;
    spec.kind = SystemKind::circle_rotation;
    StudyOptions opts;
    Classification cls = classify_system(spec, {128, 256}, opts);
    CHECK(cls.chain_transitive == Verdict::yes);
    CHECK(cls.chain_mixing == Verdict::yes);
    CHECK(cls.strong_chain_transitive == Verdict::yes);
    CHECK(cls.strong_chain_mixing == Verdict::no);
    CHECK(cls.period == 1);

    SystemSpec dbl;
    dbl.kind = SystemKind::doubling;
    Classification dc = classify_system(dbl, {64, 128, 256}, opts);
    CHECK(dc.chain_transitive == Verdict::yes);
    CHECK(dc.chain_mixing == Verdict::yes);
    CHECK(dc.strong_chain_transitive == Verdict::yes);
    CHECK(dc.strong_chain_mixing == Verdict::yes);
}

TEST_CASE("A-threshold operator fixes the synchrony threshold relation") {
    // On exactly chain transitive instances, the strong-chain relation of the
    // R_ell-threshold relation is that relation again.
    auto check_fix = [](const FiniteRelation& f, const FiniteMetricSpace& d) {
        PseudoMetricResult rho = rho_pseudometric(f, d, exact_opts());
        const int n = d.size();
        std::vector<std::pair<int, int>> edges;
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                if (rho.table.at(x, y) <= 0.0) edges.emplace_back(x, y);
        FiniteRelation r(n, std::move(edges));
        BarrierField ell = barrier(r, d, BarrierMode::length, JumpPolicy::free_initial);
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) CHECK((ell.at(x, y) <= 0.0) == r.contains(x, y));
    };
    check_fix(cycle_relation(3), FiniteMetricSpace::discrete(3));
    check_fix(swap_relation(), FiniteMetricSpace::discrete(2));
    check_fix(complete_relation(3), FiniteMetricSpace::discrete(3));
}

TEST_CASE("product barrier symmetry bound under exact strong chain transitivity") {
    // For pair systems the reversal estimate gives ell((y1,y2),(x1,x2)) <=
    // ell((x1,x2),(y1,y2)); checked exhaustively on instances whose base
    // length barrier vanishes identically.
    for (int n = 2; n <= 3; ++n) {
        FiniteMetricSpace d = FiniteMetricSpace::discrete(n);
        int pairs = n * n;
        for (unsigned long mask = 1; mask < (1ul << pairs); ++mask) {
            std::vector<std::pair<int, int>> edges;
            for (int p = 0; p < pairs; ++p)
                if (mask & (1ul << p)) edges.emplace_back(p / n, p % n);
            FiniteRelation f(n, std::move(edges));
            BarrierField base = barrier(f, d, BarrierMode::length, JumpPolicy::free_initial);
            bool exact_sct = base.all_finite() && base.finite_max() == 0.0;
            if (!exact_sct) continue;
            FiniteRelation ff = product(f, f);
            FiniteMetricSpace dd = power_metric(d, 2);
            BarrierField pe = barrier(ff, dd, BarrierMode::length, JumpPolicy::free_initial);
            for (int a = 0; a < n * n; ++a)
                for (int b = 0; b < n * n; ++b) CHECK(pe.at(b, a) <= pe.at(a, b) + 1e-12);
        }
    }
}
