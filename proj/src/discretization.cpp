#include "chainscope/discretization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "chainscope/parallel.hpp"
#include "json.hpp"

namespace chainscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double circle_arc(double x, double y) {
    double t = std::fabs(x - y);
    t -= std::floor(t);
    return std::min(t, 1.0 - t);
}

std::string grid_label(int i, int n) { return std::to_string(i) + "/" + std::to_string(n); }

const char* kind_name(SystemKind k) {
    switch (k) {
    case SystemKind::circle_rotation: return "circle_rotation";
    case SystemKind::doubling: return "doubling";
    case SystemKind::grid_map: return "grid_map";
    default: return "finite_relation";
    }
}

const char* metric_name(CircleMetricKind k) {
    switch (k) {
    case CircleMetricKind::arc: return "arc";
    case CircleMetricKind::sqrt_distorted: return "sqrt_distorted";
    case CircleMetricKind::discrete: return "discrete";
    default: return "table";
    }
}

} // namespace

SystemSpec parse_system_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw ShapeError(std::string("bad system spec JSON: ") + e.what());
    }
    SystemSpec spec;
    std::string kind = j.value("kind", "circle_rotation");
    if (kind == "circle_rotation")
        spec.kind = SystemKind::circle_rotation;
    else if (kind == "doubling")
        spec.kind = SystemKind::doubling;
    else if (kind == "grid_map")
        spec.kind = SystemKind::grid_map;
    else if (kind == "finite_relation")
        spec.kind = SystemKind::finite_relation;
    else
        throw ValidationError("unknown system kind: " + kind);

    spec.n = j.value("N", 0);
    if (j.contains("alpha")) {
        if (j["alpha"].is_string()) {
            if (j["alpha"].get<std::string>() != "golden")
                throw ValidationError("alpha must be a number or \"golden\"");
            spec.alpha = kGoldenAlpha;
        } else {
            spec.alpha = j["alpha"].get<double>();
        }
    }
    std::string metric = j.value("metric", "arc");
    if (metric == "arc")
        spec.metric = CircleMetricKind::arc;
    else if (metric == "sqrt_distorted")
        spec.metric = CircleMetricKind::sqrt_distorted;
    else if (metric == "discrete")
        spec.metric = CircleMetricKind::discrete;
    else if (metric == "table")
        spec.metric = CircleMetricKind::table;
    else
        throw ValidationError("unknown metric kind: " + metric);

    if (j.contains("scheme")) {
        if (j["scheme"].is_string()) {
            if (j["scheme"].get<std::string>() != "nearest")
                throw ValidationError("scheme must be \"nearest\" or {\"outer\": L}");
        } else if (j["scheme"].is_object() && j["scheme"].contains("outer")) {
            spec.outer = true;
            spec.lipschitz_bound = j["scheme"]["outer"].get<double>();
        } else {
            throw ValidationError("scheme must be \"nearest\" or {\"outer\": L}");
        }
    }
    spec.table_path = j.value("table", "");
    spec.relation_path = j.value("relation", "");
    spec.metric_path = j.value("metric_table", "");
    return spec;
}

std::string system_spec_to_json(const SystemSpec& spec) {
    nlohmann::ordered_json j;
    j["kind"] = kind_name(spec.kind);
    j["N"] = spec.n;
    if (spec.kind == SystemKind::circle_rotation) j["alpha"] = spec.alpha;
    j["metric"] = metric_name(spec.metric);
    if (spec.outer)
        j["scheme"] = {{"outer", spec.lipschitz_bound}};
    else
        j["scheme"] = "nearest";
    if (!spec.table_path.empty()) j["table"] = spec.table_path;
    if (!spec.relation_path.empty()) j["relation"] = spec.relation_path;
    if (!spec.metric_path.empty()) j["metric_table"] = spec.metric_path;
    return j.dump();
}

FiniteMetricSpace circle_metric(CircleMetricKind kind, int n) {
    if (n < 3) throw ValidationError("circle_metric: N must be >= 3");
    std::vector<std::string> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = grid_label(i, n);
    std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
    if (kind == CircleMetricKind::discrete) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                dist[static_cast<std::size_t>(i) * n + j] = i == j ? 0.0 : 1.0;
        return FiniteMetricSpace(std::move(labels), std::move(dist));
    }
    if (kind == CircleMetricKind::table)
        throw ValidationError("circle_metric: table metrics are loaded from files");
    std::vector<double> rep(n), q(n);
    for (int i = 0; i < n; ++i) {
        double x = static_cast<double>(i) / n;
        rep[i] = x > 0.5 ? x - 1.0 : x; // representative in [-1/2, 1/2]
        q[i] = std::sqrt(std::fabs(rep[i]));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double arc = circle_arc(static_cast<double>(i) / n, static_cast<double>(j) / n);
            double v = arc;
            if (kind == CircleMetricKind::sqrt_distorted) v = std::max(arc, std::fabs(q[i] - q[j]));
            dist[static_cast<std::size_t>(i) * n + j] = v;
        }
    }
    return FiniteMetricSpace(std::move(labels), std::move(dist));
}

std::pair<FiniteMetricSpace, FiniteRelation> discretize(const SystemSpec& spec) {
    if (spec.kind == SystemKind::finite_relation) {
        FiniteRelation f = load_relation_json(spec.relation_path);
        if (spec.metric == CircleMetricKind::table) {
            FiniteMetricSpace d = load_metric_csv(spec.metric_path);
            if (d.size() != f.n_points())
                throw ShapeError("discretize: metric table size does not match relation");
            return {std::move(d), std::move(f)};
        }
        if (spec.metric == CircleMetricKind::discrete)
            return {FiniteMetricSpace::discrete(f.n_points()), std::move(f)};
        return {circle_metric(spec.metric, f.n_points()), std::move(f)};
    }

    const int n = spec.n;
    if (n < 3) throw ValidationError("discretize: N must be >= 3");
    std::vector<double> image(n);
    switch (spec.kind) {
    case SystemKind::circle_rotation: {
        if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
            throw ValidationError("discretize: alpha must lie in (0,1)");
        for (int i = 0; i < n; ++i) {
            double x = static_cast<double>(i) / n + spec.alpha;
            image[i] = x - std::floor(x);
        }
        break;
    }
    case SystemKind::doubling: {
        for (int i = 0; i < n; ++i) {
            double x = 2.0 * i / n;
            image[i] = x - std::floor(x);
        }
        break;
    }
    case SystemKind::grid_map: {
        std::ifstream in(spec.table_path);
        if (!in) throw ValidationError("discretize: cannot open image table " + spec.table_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw ShapeError(std::string("discretize: bad image table JSON: ") + e.what());
        }
        if (!j.is_array() || static_cast<int>(j.size()) != n)
            throw ShapeError("discretize: image table must be an array of N positions");
        for (int i = 0; i < n; ++i) {
            double x = j[i].get<double>();
            image[i] = x - std::floor(x);
        }
        break;
    }
    default: break;
    }

    const double h = 1.0 / n;
    std::vector<std::pair<int, int>> edges;
    if (!spec.outer) {
        for (int i = 0; i < n; ++i) {
            int target = static_cast<int>(std::llround(image[i] * n)) % n;
            edges.emplace_back(i, target);
        }
    } else {
        if (spec.lipschitz_bound < 0)
            throw ValidationError("discretize: lipschitz_bound must be >= 0");
        double radius = spec.lipschitz_bound * h / 2 + h / 2;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (circle_arc(image[i], static_cast<double>(j) / n) <= radius + 1e-15)
                    edges.emplace_back(i, j);
    }
    FiniteMetricSpace d = circle_metric(spec.metric, n);
    return {std::move(d), FiniteRelation(n, std::move(edges))};
}

PseudoMetricTable estimate_df(const FiniteMetricSpace& d, const FiniteRelation& f_map,
                              long iterations, int threads) {
    if (d.size() != f_map.n_points())
        throw ShapeError("estimate_df: relation and metric have different point counts");
    if (!is_function(f_map) || !is_total(f_map))
        throw DomainError("estimate_df: requires a total functional relation");
    if (iterations < 0) throw ValidationError("estimate_df: iterations must be >= 0");
    const int n = d.size();

    PseudoMetricTable df;
    df.n = n;
    df.values = d.table();
    df.labels = d.labels();

    std::vector<int> pos(n), start(n);
    for (int i = 0; i < n; ++i) pos[i] = start[i] = i;
    std::vector<int> prev = pos;
    for (long it = 1; it <= iterations; ++it) {
        for (int i = 0; i < n; ++i) pos[i] = f_map.successors(pos[i])[0];
        parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
            const double* drow = d.row(pos[i]);
            double* out = df.values.data() + i * n;
            for (int j = 0; j < n; ++j) out[j] = std::max(out[j], drow[pos[j]]);
        });
        // Orbit map repeating means every later term repeats an earlier one.
        if (pos == prev || pos == start) break;
        prev = pos;
    }
    return df;
}

RatioRange bilipschitz_ratio(const PseudoMetricTable& d1, const PseudoMetricTable& d2) {
    if (d1.n != d2.n) throw ShapeError("bilipschitz_ratio: tables have different point counts");
    RatioRange r{kInf, 0.0};
    for (int i = 0; i < d1.n; ++i)
        for (int j = 0; j < d1.n; ++j) {
            if (i == j) continue;
            double denom = d2.at(i, j);
            if (denom <= 0.0)
                throw ValidationError("bilipschitz_ratio: zero off-diagonal denominator");
            double ratio = d1.at(i, j) / denom;
            r.min_ratio = std::min(r.min_ratio, ratio);
            r.max_ratio = std::max(r.max_ratio, ratio);
        }
    return r;
}

RatioRange bilipschitz_ratio(const FiniteMetricSpace& d1, const FiniteMetricSpace& d2) {
    return bilipschitz_ratio(d1.as_pseudo(), d2.as_pseudo());
}

namespace {

StudyRow study_row_for(const SystemSpec& base, int n, const StudyOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();
    SystemSpec spec = base;
    spec.n = n;
    auto [d, f] = discretize(spec);
    const double h = 1.0 / n;

    ClassifyOptions copts;
    copts.numerical_zero = 3.0 * h;
    copts.jump = opts.jump;
    copts.threads = opts.threads;
    copts.node_cap = opts.node_cap;
    Classification cls = classify(f, d, {2.0 * h, 3.0 * h, 4.0 * h}, copts);

    StudyRow row;
    row.n = n;
    row.h = h;
    row.period = cls.period;
    row.chain_transitive = cls.chain_transitive == Verdict::yes;
    if (!cls.evidence.empty()) {
        row.theta_max = cls.evidence.front().theta_max;
        row.rho_max = cls.evidence.front().rho_max;
        row.ell_max = cls.evidence.front().ell_max;
        row.ell_is_bound = cls.evidence.front().ell_is_bound;
        row.scc_count = cls.evidence.front().scc_count;
        for (const auto& ev : cls.evidence) row.scc_count = std::max(row.scc_count, ev.scc_count);
    }
    auto t1 = std::chrono::steady_clock::now();
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return row;
}

std::string trend_of(const std::vector<double>& vals) {
    if (vals.size() < 2) return "stable";
    bool dec = true, inc = true;
    for (std::size_t i = 1; i < vals.size(); ++i) {
        if (!(vals[i] < vals[i - 1])) dec = false;
        if (!(vals[i] > vals[i - 1])) inc = false;
    }
    double lo = *std::min_element(vals.begin(), vals.end());
    double hi = *std::max_element(vals.begin(), vals.end());
    double span = hi - lo;
    double scale = std::max(std::fabs(vals.front()), std::fabs(vals.back()));
    if (span <= std::max(1e-12, 0.10 * scale)) return "stable";
    if (dec) return "decreasing";
    if (inc) return "increasing";
    return "mixed";
}

} // namespace

StudyResult refine_study(const SystemSpec& base, const std::vector<int>& n_list,
                         const StudyOptions& opts) {
    if (n_list.empty()) throw ValidationError("refine_study: N list must be nonempty");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw ValidationError("refine_study: N list must be strictly increasing");

    StudyResult out;
    for (int n : n_list) out.rows.push_back(study_row_for(base, n, opts));

    std::vector<std::string> quantities = opts.quantities;
    if (quantities.empty()) quantities = {"theta_max", "rho_max", "period", "scc_count"};
    for (const auto& qn : quantities) {
        std::vector<double> vals;
        for (const auto& row : out.rows) {
            if (qn == "theta_max") vals.push_back(row.theta_max);
            else if (qn == "rho_max") vals.push_back(row.rho_max);
            else if (qn == "period") vals.push_back(row.period);
            else if (qn == "scc_count") vals.push_back(row.scc_count);
            else if (qn == "ell_max") vals.push_back(row.ell_max);
            else throw ValidationError("refine_study: unknown quantity " + qn);
        }
        out.trend[qn] = trend_of(vals);
    }
    return out;
}

namespace {

// Vanishing / persistent calls over a refinement sequence. A quantity has
// vanished when it already sits at the finest working resolution, or it
// decreases strictly and lost a definite fraction of its starting value. It
// persists when the two finest refinements agree (the coarsest rows carry
// discretization slack, so stabilization is judged at the fine end).
bool vanishing(const std::vector<double>& vals, double h_finest) {
    if (vals.empty()) return false;
    if (vals.back() <= 3.0 * h_finest + 1e-12) return true;
    if (vals.size() < 2) return false;
    for (std::size_t i = 1; i < vals.size(); ++i)
        if (!(vals[i] < vals[i - 1])) return false;
    return vals.back() <= 0.6 * vals.front();
}

bool persistent(const std::vector<double>& vals, double h_finest) {
    if (vals.empty()) return false;
    if (vals.back() <= 3.0 * h_finest + 1e-12) return false;
    if (vals.size() < 2) return true; // single refinement: above the floor
    double a = vals[vals.size() - 2], b = vals.back();
    return std::fabs(a - b) <= 0.15 * std::max(a, b);
}

Verdict trend_verdict(const std::vector<double>& vals, double h_finest) {
    if (vanishing(vals, h_finest)) return Verdict::yes;
    if (persistent(vals, h_finest)) return Verdict::no;
    return Verdict::undetermined;
}

} // namespace

Classification classify_system(const SystemSpec& base, const std::vector<int>& n_list,
                               const StudyOptions& opts) {
    StudyResult study = refine_study(base, n_list, opts);
    const double h_finest = study.rows.back().h;

    Classification cls;
    cls.numerical_zero = 3.0 * h_finest;
    std::vector<double> thetas, rhos, ells;
    bool all_ct = true, none_ct = true;
    bool all_period_one = true, all_period_same = true;
    for (const auto& row : study.rows) {
        ScaleEvidence ev;
        ev.scale = row.h;
        ev.ct_at_scale = row.chain_transitive;
        ev.scc_count = row.scc_count;
        ev.period = row.period;
        ev.theta_max = row.theta_max;
        ev.rho_max = row.rho_max;
        ev.ell_max = row.ell_max;
        ev.ell_is_bound = row.ell_is_bound;
        cls.evidence.push_back(ev);
        thetas.push_back(row.theta_max);
        rhos.push_back(row.rho_max);
        ells.push_back(row.ell_max);
        if (ev.ct_at_scale) none_ct = false; else all_ct = false;
        if (row.period != 1) all_period_one = false;
        if (row.period != study.rows.front().period) all_period_same = false;
    }
    cls.period = all_period_same ? study.rows.front().period : 0;

    cls.chain_transitive = all_ct ? Verdict::yes : (none_ct ? Verdict::no : Verdict::undetermined);
    if (cls.chain_transitive == Verdict::yes && all_period_same) {
        if (cls.period >= 2)
            cls.chain_mixing = Verdict::no;
        else
            cls.chain_mixing = all_period_one ? trend_verdict(thetas, h_finest) : Verdict::no;
    } else if (cls.chain_transitive == Verdict::no) {
        cls.chain_mixing = Verdict::no;
    }
    cls.strong_chain_mixing = trend_verdict(rhos, h_finest);
    cls.strong_chain_transitive = trend_verdict(ells, h_finest);

    if (cls.strong_chain_mixing == Verdict::yes) {
        if (cls.strong_chain_transitive != Verdict::yes) cls.strong_chain_transitive = Verdict::yes;
        if (cls.chain_mixing != Verdict::yes) cls.chain_mixing = Verdict::yes;
    }
    if (cls.chain_mixing == Verdict::yes && cls.chain_transitive != Verdict::yes)
        cls.chain_transitive = Verdict::yes;
    return cls;
}

void save_study_csv(const StudyResult& study, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write study CSV: " + path);
    out << "N,h,theta_max,rho_max,period,scc_count,ell_max,ell_is_bound,wall_ms\n";
    char buf[256];
    for (const auto& row : study.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%d,%d,%.17g,%d,%.1f", row.n, row.h,
                      row.theta_max, row.rho_max, row.period, row.scc_count, row.ell_max,
                      row.ell_is_bound ? 1 : 0, row.wall_ms);
        out << buf << "\n";
    }
}

} // namespace chainscope
