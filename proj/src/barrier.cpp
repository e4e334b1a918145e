#include "chainscope/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>

#include "chainscope/parallel.hpp"

namespace chainscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double combine(BarrierMode mode, double acc, double step) {
    return mode == BarrierMode::length ? acc + step : std::max(acc, step);
}

// Single-source sweep over the jump-then-edge moves. A state is "standing at
// the head b of the last relation edge used"; a move picks an edge (a, b') of
// f and pays the single jump d(state, a). This keeps exactly one jump per gap,
// which the chain-bound (max) objective requires; for the chain-length (sum)
// objective it is equivalent to free jump edges by the triangle inequality.
struct SourceRun {
    std::vector<double> dist;     // per post-edge point
    std::vector<int> pred_point;  // previous post-edge point, -1 at the first move
    std::vector<int> pred_edge;   // index into f.edges() of the move's edge
};

SourceRun single_source(const FiniteRelation& f, const FiniteMetricSpace& d, BarrierMode mode,
                        JumpPolicy policy, int source, bool track) {
    const int n = f.n_points();
    SourceRun run;
    run.dist.assign(n, kInf);
    if (track) {
        run.pred_point.assign(n, -2);
        run.pred_edge.assign(n, -1);
    }
    using Item = std::pair<double, int>; // (cost, point); ties break by index
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    const auto& edges = f.edges();

    auto relax = [&](int b, double cost, int from, int edge_idx) {
        if (cost < run.dist[b]) {
            run.dist[b] = cost;
            if (track) {
                run.pred_point[b] = from;
                run.pred_edge[b] = edge_idx;
            }
            heap.emplace(cost, b);
        }
    };

    const double* src_row = d.row(source);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto [a, b] = edges[e];
        if (policy == JumpPolicy::anchored) {
            if (a == source) relax(b, 0.0, -1, static_cast<int>(e));
        } else {
            relax(b, src_row[a], -1, static_cast<int>(e));
        }
    }
    std::vector<char> settled(n, 0);
    while (!heap.empty()) {
        auto [cost, u] = heap.top();
        heap.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        const double* u_row = d.row(u);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            auto [a, b] = edges[e];
            if (settled[b]) continue;
            relax(b, combine(mode, cost, u_row[a]), u, static_cast<int>(e));
        }
    }
    return run;
}

std::vector<double> assemble_row(const SourceRun& run, const FiniteMetricSpace& d,
                                 BarrierMode mode) {
    const int n = d.size();
    std::vector<double> row(n, kInf);
    for (int u = 0; u < n; ++u) {
        if (!std::isfinite(run.dist[u])) continue;
        const double* u_row = d.row(u);
        for (int y = 0; y < n; ++y)
            row[y] = std::min(row[y], combine(mode, run.dist[u], u_row[y]));
    }
    return row;
}

} // namespace

void validate_chain(const Chain& c, const FiniteRelation& f) {
    if (c.edges.empty()) throw ValidationError("chains have length >= 1");
    for (auto [a, b] : c.edges)
        if (!f.contains(a, b))
            throw ValidationError("chain uses pair (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") that is not a relation edge");
}

Chain reverse_chain(const Chain& c) {
    Chain out;
    out.edges.reserve(c.edges.size());
    for (auto it = c.edges.rbegin(); it != c.edges.rend(); ++it)
        out.edges.emplace_back(it->second, it->first);
    return out;
}

Chain concat_chains(const Chain& c, const Chain& d) {
    Chain out = c;
    out.edges.insert(out.edges.end(), d.edges.begin(), d.edges.end());
    return out;
}

ChainCost eval_chain(const Chain& c, int x, int y, const FiniteMetricSpace& d) {
    if (c.edges.empty()) throw ValidationError("chains have length >= 1");
    ChainCost cost;
    int prev_head = x;
    for (auto [a, b] : c.edges) {
        double gap = d(prev_head, a);
        cost.bound = std::max(cost.bound, gap);
        cost.length += gap;
        prev_head = b;
    }
    double last = d(prev_head, y);
    cost.bound = std::max(cost.bound, last);
    cost.length += last;
    return cost;
}

const char* to_string(BarrierMode m) { return m == BarrierMode::bound ? "bound" : "length"; }
const char* to_string(JumpPolicy p) {
    return p == JumpPolicy::free_initial ? "free-initial" : "anchored";
}

BarrierField::BarrierField(BarrierMode mode, JumpPolicy policy, int n, std::vector<int> sources,
                           std::vector<double> values, std::string relation_id,
                           std::string metric_id)
    : mode_(mode), policy_(policy), n_(n), sources_(std::move(sources)),
      values_(std::move(values)), relation_id_(std::move(relation_id)),
      metric_id_(std::move(metric_id)) {}

double BarrierField::finite_max() const {
    double m = 0.0;
    for (int x : sources_)
        for (int y = 0; y < n_; ++y) {
            double v = at(x, y);
            if (std::isfinite(v)) m = std::max(m, v);
        }
    return m;
}

bool BarrierField::all_finite() const {
    for (int x : sources_)
        for (int y = 0; y < n_; ++y)
            if (!std::isfinite(at(x, y))) return false;
    return true;
}

BarrierField barrier(const FiniteRelation& f, const FiniteMetricSpace& d, BarrierMode mode,
                     JumpPolicy policy, const BarrierOptions& opts) {
    if (f.n_points() != d.size())
        throw ShapeError("barrier: relation and metric have different point counts");
    const int n = f.n_points();
    std::vector<int> sources = opts.sources;
    if (sources.empty()) {
        sources.resize(n);
        for (int i = 0; i < n; ++i) sources[i] = i;
    }
    for (int s : sources)
        if (s < 0 || s >= n) throw ShapeError("barrier: source index out of range");

    std::vector<double> values(static_cast<std::size_t>(n) * n,
                               std::numeric_limits<double>::quiet_NaN());
    parallel_for(sources.size(), opts.threads, [&](std::size_t i) {
        int x = sources[i];
        SourceRun run = single_source(f, d, mode, policy, x, false);
        std::vector<double> row = assemble_row(run, d, mode);
        std::copy(row.begin(), row.end(), values.begin() + static_cast<std::size_t>(x) * n);
    });
    return BarrierField(mode, policy, n, std::move(sources), std::move(values), opts.relation_id,
                        opts.metric_id);
}

std::vector<double> barrier_row(const FiniteRelation& f, const FiniteMetricSpace& d,
                                BarrierMode mode, JumpPolicy policy, int source) {
    SourceRun run = single_source(f, d, mode, policy, source, false);
    return assemble_row(run, d, mode);
}

Digraph epsilon_chain_graph(const FiniteRelation& f, const FiniteMetricSpace& d, double eps) {
    if (eps <= 0) throw ValidationError("epsilon_chain_graph: eps must be > 0");
    if (f.n_points() != d.size())
        throw ShapeError("epsilon_chain_graph: relation and metric have different point counts");
    const int n = f.n_points();
    Digraph g;
    g.n = n;
    g.succ.assign(n, {});
    for (int u = 0; u < n; ++u) {
        const double* u_row = d.row(u);
        auto& out = g.succ[u];
        for (int a = 0; a < n; ++a) {
            if (u_row[a] >= eps) continue;
            const auto& s = f.successors(a);
            out.insert(out.end(), s.begin(), s.end());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return g;
}

Chain witness_chain(const FiniteRelation& f, const FiniteMetricSpace& d, int x, int y,
                    BarrierMode mode, JumpPolicy policy) {
    if (x < 0 || x >= f.n_points() || y < 0 || y >= f.n_points())
        throw ShapeError("witness_chain: point index out of range");
    SourceRun run = single_source(f, d, mode, policy, x, true);
    // Terminal jump: pick the settled point closing the chain at least cost,
    // ties by point index for determinism.
    double best = kInf;
    int best_u = -1;
    for (int u = 0; u < f.n_points(); ++u) {
        if (!std::isfinite(run.dist[u])) continue;
        double total = combine(mode, run.dist[u], d(u, y));
        if (total < best) {
            best = total;
            best_u = u;
        }
    }
    if (best_u < 0)
        throw NoWitnessError("witness_chain: (" + std::to_string(x) + "," + std::to_string(y) +
                             ") is unreachable");
    Chain chain;
    int u = best_u;
    while (u != -1) {
        chain.edges.push_back(f.edges()[run.pred_edge[u]]);
        u = run.pred_point[u];
    }
    std::reverse(chain.edges.begin(), chain.edges.end());
    return chain;
}

void save_barrier_csv(const BarrierField& field, const std::vector<std::string>& labels,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write barrier CSV: " + path);
    out << "from,to,value,mode,policy\n";
    char buf[40];
    for (int x : field.sources()) {
        for (int y = 0; y < field.size(); ++y) {
            double v = field.at(x, y);
            if (std::isinf(v))
                std::snprintf(buf, sizeof(buf), "inf");
            else
                std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << labels[x] << "," << labels[y] << "," << buf << "," << to_string(field.mode())
                << "," << to_string(field.policy()) << "\n";
        }
    }
}

} // namespace chainscope
