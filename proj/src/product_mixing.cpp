#include "chainscope/product_mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "chainscope/digraph.hpp"
#include "chainscope/parallel.hpp"

namespace chainscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ResolvedJump {
    bool complete = false;
    // Per point: the point itself plus its k nearest neighbors, sorted by index.
    std::vector<std::vector<int>> lists;
};

ResolvedJump resolve_jump(const JumpGraphSpec& spec, const FiniteMetricSpace& d) {
    const int n = d.size();
    ResolvedJump out;
    JumpGraphSpec::Kind kind = spec.kind;
    if (kind == JumpGraphSpec::Kind::auto_select)
        kind = n <= 64 ? JumpGraphSpec::Kind::complete : JumpGraphSpec::Kind::knn;
    if (kind == JumpGraphSpec::Kind::complete || spec.k >= n - 1) {
        out.complete = true;
        return out;
    }
    out.lists.assign(n, {});
    std::vector<std::pair<double, int>> order(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) order[j] = {d(i, j), j};
        std::sort(order.begin(), order.end());
        auto& lst = out.lists[i];
        lst.push_back(i);
        int taken = 0;
        for (int j = 0; j < n && taken < spec.k; ++j) {
            if (order[j].second == i) continue;
            lst.push_back(order[j].second);
            ++taken;
        }
        std::sort(lst.begin(), lst.end());
    }
    return out;
}

// Single-source jump-then-edge sweep on the implicit product system
// (f x f, d x d). Nodes are product pairs encoded x*n + y; the sweep never
// materializes the product relation.
class ProductEngine {
public:
    ProductEngine(const FiniteRelation& f, const FiniteMetricSpace& d, bool minimax,
                  const ResolvedJump& jump, std::size_t node_cap)
        : f_(f), d_(d), minimax_(minimax), jump_(jump), n_(d.size()),
          m_(static_cast<std::size_t>(n_) * n_) {
        if (m_ > node_cap)
            throw CapacityError("product run: " + std::to_string(m_) +
                                " product nodes exceeds cap " + std::to_string(node_cap));
    }

    // Distances to every product node including the terminal jump.
    std::vector<double> run(int zx, int zy) const {
        std::vector<double> dist(m_, kInf);
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;

        auto relax_from = [&](int u1, int u2, double c) {
            auto jump_to = [&](int a1, int a2) {
                double w = std::max(d_(u1, a1), d_(u2, a2));
                double base = minimax_ ? std::max(c, w) : c + w;
                for (int b1 : f_.successors(a1)) {
                    std::size_t row = static_cast<std::size_t>(b1) * n_;
                    for (int b2 : f_.successors(a2)) {
                        std::size_t node = row + b2;
                        if (base < dist[node]) {
                            dist[node] = base;
                            heap.emplace(base, node);
                        }
                    }
                }
            };
            if (jump_.complete) {
                for (int a1 = 0; a1 < n_; ++a1)
                    for (int a2 = 0; a2 < n_; ++a2) jump_to(a1, a2);
            } else {
                for (int a1 : jump_.lists[u1])
                    for (int a2 : jump_.lists[u2]) jump_to(a1, a2);
            }
        };

        relax_from(zx, zy, 0.0);
        std::vector<char> settled(m_, 0);
        while (!heap.empty()) {
            auto [c, node] = heap.top();
            heap.pop();
            if (settled[node]) continue;
            settled[node] = 1;
            relax_from(static_cast<int>(node / n_), static_cast<int>(node % n_), c);
        }

        // Terminal jump: a chain ends with an edge followed by one last jump.
        std::vector<double> final_vals(m_, kInf);
        for (std::size_t node = 0; node < m_; ++node) {
            double c = dist[node];
            if (!std::isfinite(c)) continue;
            int u1 = static_cast<int>(node / n_), u2 = static_cast<int>(node % n_);
            auto close_at = [&](int a1, int a2) {
                double w = std::max(d_(u1, a1), d_(u2, a2));
                double total = minimax_ ? std::max(c, w) : c + w;
                std::size_t t = static_cast<std::size_t>(a1) * n_ + a2;
                if (total < final_vals[t]) final_vals[t] = total;
            };
            if (jump_.complete) {
                for (int a1 = 0; a1 < n_; ++a1)
                    for (int a2 = 0; a2 < n_; ++a2) close_at(a1, a2);
            } else {
                for (int a1 : jump_.lists[u1])
                    for (int a2 : jump_.lists[u2]) close_at(a1, a2);
            }
        }
        return final_vals;
    }

private:
    const FiniteRelation& f_;
    const FiniteMetricSpace& d_;
    bool minimax_;
    const ResolvedJump& jump_;
    int n_;
    std::size_t m_;
};

PseudoMetricResult product_run_table(const FiniteRelation& f, const FiniteMetricSpace& d,
                                     bool minimax, const ProductOptions& opts) {
    if (f.n_points() != d.size())
        throw ShapeError("product run: relation and metric have different point counts");
    const int n = d.size();
    if (opts.base_point < 0 || opts.base_point >= n)
        throw ShapeError("product run: base point out of range");
    ResolvedJump jump = resolve_jump(opts.jump, d);
    ProductEngine engine(f, d, minimax, jump, opts.node_cap);

    std::vector<double> fwd = engine.run(opts.base_point, opts.base_point);

    PseudoMetricResult out;
    out.table.n = n;
    out.table.values = fwd;
    out.table.is_ultrametric = minimax;
    out.table.labels = d.labels();

    for (double v : fwd) {
        if (std::isfinite(v))
            out.diag.max_value = std::max(out.diag.max_value, v);
        else
            out.diag.any_unreachable = true;
    }

    if (opts.reverse_check) {
        // ell^f(t, z) = ell^{f^-1}(z, t); the metric and jump menu are shared.
        FiniteRelation back = invert(f);
        ProductEngine rev_engine(back, d, minimax, jump, opts.node_cap);
        std::vector<double> rev = rev_engine.run(opts.base_point, opts.base_point);
        for (std::size_t i = 0; i < rev.size(); ++i) {
            double a = fwd[i], b = rev[i];
            if (std::isfinite(a) && std::isfinite(b))
                out.diag.max_asymmetry = std::max(out.diag.max_asymmetry, std::fabs(a - b));
            else if (std::isfinite(a) != std::isfinite(b))
                out.diag.max_asymmetry = kInf;
        }
    }
    if (opts.second_base_check && n >= 2) {
        int z2 = opts.second_base >= 0 ? opts.second_base : (opts.base_point + 1) % n;
        std::vector<double> alt = engine.run(z2, z2);
        for (std::size_t i = 0; i < alt.size(); ++i) {
            double a = fwd[i], b = alt[i];
            if (std::isfinite(a) && std::isfinite(b))
                out.diag.base_independence_gap =
                    std::max(out.diag.base_independence_gap, std::fabs(a - b));
            else if (std::isfinite(a) != std::isfinite(b))
                out.diag.base_independence_gap = kInf;
        }
    }
    out.diag.flagged = out.diag.any_unreachable ||
                       out.diag.max_asymmetry > opts.flag_tolerance ||
                       out.diag.base_independence_gap > opts.flag_tolerance;
    return out;
}

} // namespace

PseudoMetricResult rho_pseudometric(const FiniteRelation& f, const FiniteMetricSpace& d,
                                    const ProductOptions& opts) {
    return product_run_table(f, d, false, opts);
}

PseudoMetricResult theta_pseudoultrametric(const FiniteRelation& f, const FiniteMetricSpace& d,
                                           const ProductOptions& opts) {
    return product_run_table(f, d, true, opts);
}

namespace {

struct ScaleAnalysis {
    Digraph g;
    std::vector<std::vector<int>> sccs;
    std::vector<int> scc_of;
    int core = -1;      // index of the unique terminal SCC, -1 if none
    bool has_core = false; // unique terminal SCC that every node reaches
    int core_period = 0;
};

ScaleAnalysis analyze_scale(const FiniteRelation& f, const FiniteMetricSpace& d, double eps) {
    ScaleAnalysis a;
    a.g = epsilon_chain_graph(f, d, eps);
    a.sccs = strongly_connected_components(a.g);
    const int n = a.g.n;
    a.scc_of.assign(n, -1);
    for (std::size_t c = 0; c < a.sccs.size(); ++c)
        for (int v : a.sccs[c]) a.scc_of[v] = static_cast<int>(c);

    std::vector<char> terminal(a.sccs.size(), 1);
    for (int u = 0; u < n; ++u)
        for (int v : a.g.succ[u])
            if (a.scc_of[u] != a.scc_of[v]) terminal[a.scc_of[u]] = 0;
    // A singleton without a self-loop is a trivial SCC, not a cycle carrier.
    for (std::size_t c = 0; c < a.sccs.size(); ++c) {
        if (a.sccs[c].size() == 1) {
            int v = a.sccs[c][0];
            bool self = std::binary_search(a.g.succ[v].begin(), a.g.succ[v].end(), v);
            if (!self) terminal[c] = 0;
        }
    }
    int count = 0;
    for (std::size_t c = 0; c < a.sccs.size(); ++c)
        if (terminal[c]) {
            a.core = static_cast<int>(c);
            ++count;
        }
    if (count != 1) {
        a.core = -1;
        return a;
    }

    // Every node must flow into the core: backward sweep over reversed edges.
    std::vector<char> reaches(n, 0);
    std::vector<std::vector<int>> rev(n);
    for (int u = 0; u < n; ++u)
        for (int v : a.g.succ[u]) rev[v].push_back(u);
    std::vector<int> queue;
    for (int v : a.sccs[a.core]) {
        reaches[v] = 1;
        queue.push_back(v);
    }
    for (std::size_t qi = 0; qi < queue.size(); ++qi)
        for (int u : rev[queue[qi]])
            if (!reaches[u]) {
                reaches[u] = 1;
                queue.push_back(u);
            }
    a.has_core = std::all_of(reaches.begin(), reaches.end(), [](char c) { return c != 0; });
    if (!a.has_core) return a;

    // Restrict to the core and take the BFS-level gcd there.
    const auto& members = a.sccs[a.core];
    std::vector<int> local(n, -1);
    for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = static_cast<int>(i);
    Digraph core_g;
    core_g.n = static_cast<int>(members.size());
    core_g.succ.assign(core_g.n, {});
    for (int u : members)
        for (int v : a.g.succ[u])
            if (local[v] >= 0) core_g.succ[local[u]].push_back(local[v]);
    a.core_period = digraph_period(core_g);
    return a;
}

} // namespace

int period(const FiniteRelation& f, const FiniteMetricSpace& d, double eps) {
    ScaleAnalysis a = analyze_scale(f, d, eps);
    if (!a.has_core)
        throw NotChainTransitiveError(
            "period: eps-chain graph at eps=" + std::to_string(eps) +
                " has no unique reachability core (" + std::to_string(a.sccs.size()) +
                " components)",
            std::move(a.sccs));
    return a.core_period;
}

bool chain_transitive_at_scale(const FiniteRelation& f, const FiniteMetricSpace& d, double eps) {
    Digraph g = epsilon_chain_graph(f, d, eps);
    const int n = g.n;
    // in_ball[y]: points within eps of y, for the terminal jump.
    std::vector<std::vector<int>> in_ball(n);
    for (int y = 0; y < n; ++y)
        for (int v = 0; v < n; ++v)
            if (d(v, y) < eps) in_ball[y].push_back(v);
    std::vector<char> reach1(n);
    std::vector<int> queue;
    for (int x = 0; x < n; ++x) {
        std::fill(reach1.begin(), reach1.end(), 0);
        queue.clear();
        for (int s : g.succ[x])
            if (!reach1[s]) {
                reach1[s] = 1;
                queue.push_back(s);
            }
        for (std::size_t qi = 0; qi < queue.size(); ++qi)
            for (int t : g.succ[queue[qi]])
                if (!reach1[t]) {
                    reach1[t] = 1;
                    queue.push_back(t);
                }
        for (int y = 0; y < n; ++y) {
            bool covered = false;
            for (int v : in_ball[y])
                if (reach1[v]) {
                    covered = true;
                    break;
                }
            if (!covered) return false;
        }
    }
    return true;
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    default: return "undetermined";
    }
}

const char* to_string(FactorKind k) {
    switch (k) {
    case FactorKind::cyclic: return "cyclic";
    case FactorKind::isometric: return "isometric";
    default: return "trivial";
    }
}

namespace {

Verdict implies_up(Verdict weaker, Verdict stronger) {
    // A "yes" on the stronger property forces the weaker one.
    if (stronger == Verdict::yes) return Verdict::yes;
    return weaker;
}

} // namespace

Classification classify(const FiniteRelation& f, const FiniteMetricSpace& d,
                        const std::vector<double>& eps_schedule, const ClassifyOptions& opts) {
    if (eps_schedule.empty()) throw ValidationError("classify: schedule must be nonempty");
    const int n = f.n_points();
    const double nz = opts.numerical_zero;
    const double slack = 1e-12;

    Classification cls;
    cls.numerical_zero = nz;

    ProductOptions popts;
    popts.jump = opts.jump;
    popts.base_point = opts.base_point;
    popts.reverse_check = false;
    popts.second_base_check = false;
    popts.node_cap = opts.node_cap;
    PseudoMetricResult rho = rho_pseudometric(f, d, popts);
    PseudoMetricResult theta = theta_pseudoultrametric(f, d, popts);
    double rho_max = rho.diag.any_unreachable ? kInf : rho.diag.max_value;
    double theta_max = theta.diag.any_unreachable ? kInf : theta.diag.max_value;

    double ell_max;
    bool ell_is_bound;
    if (n <= opts.exact_ell_limit) {
        BarrierOptions bopts;
        bopts.threads = opts.threads;
        BarrierField ell = barrier(f, d, BarrierMode::length, JumpPolicy::free_initial, bopts);
        ell_max = ell.all_finite() ? ell.finite_max() : kInf;
        ell_is_bound = false;
    } else {
        // Triangle bound through the base point z: ell(x,y) <= ell(x,z) + ell(z,y).
        auto fwd = barrier_row(f, d, BarrierMode::length, JumpPolicy::free_initial, opts.base_point);
        auto rev = barrier_row(invert(f), d, BarrierMode::length, JumpPolicy::free_initial,
                               opts.base_point);
        double mf = 0, mr = 0;
        for (double v : fwd) mf = std::max(mf, v);
        for (double v : rev) mr = std::max(mr, v);
        ell_max = mf + mr;
        ell_is_bound = true;
    }

    bool all_ct = true, none_ct = true;
    std::vector<int> periods;
    for (double eps : eps_schedule) {
        ScaleEvidence ev;
        ev.scale = eps;
        ev.theta_max = theta_max;
        ev.rho_max = rho_max;
        ev.ell_max = ell_max;
        ev.ell_is_bound = ell_is_bound;
        ScaleAnalysis analysis = analyze_scale(f, d, eps);
        ev.scc_count = static_cast<int>(analysis.sccs.size());
        ev.ct_at_scale = chain_transitive_at_scale(f, d, eps);
        ev.period = analysis.has_core ? analysis.core_period : 0;
        if (ev.ct_at_scale) {
            none_ct = false;
            if (analysis.has_core) periods.push_back(ev.period);
        } else {
            all_ct = false;
        }
        cls.evidence.push_back(ev);
    }

    if (all_ct)
        cls.chain_transitive = Verdict::yes;
    else if (none_ct)
        cls.chain_transitive = Verdict::no;
    else
        cls.chain_transitive = Verdict::undetermined;

    bool periods_stable = periods.size() == eps_schedule.size() &&
                          std::all_of(periods.begin(), periods.end(),
                                      [&](int p) { return p == periods.front(); });
    cls.period = periods_stable ? periods.front() : 0;

    if (cls.chain_transitive == Verdict::yes && periods_stable) {
        if (cls.period > 1)
            cls.chain_mixing = Verdict::no;
        else if (theta_max <= nz + slack)
            cls.chain_mixing = Verdict::yes;
        else
            cls.chain_mixing = Verdict::undetermined; // period says mix, theta does not
    } else if (cls.chain_transitive == Verdict::no) {
        cls.chain_mixing = Verdict::no;
    }

    cls.strong_chain_transitive = ell_max <= nz + slack ? Verdict::yes : Verdict::no;
    cls.strong_chain_mixing = rho_max <= nz + slack ? Verdict::yes : Verdict::no;

    // Close under the projection implications so reported verdicts are
    // mutually consistent even near threshold boundaries.
    cls.chain_mixing = implies_up(cls.chain_mixing, cls.strong_chain_mixing);
    cls.strong_chain_transitive = implies_up(cls.strong_chain_transitive, cls.strong_chain_mixing);
    cls.chain_transitive = implies_up(cls.chain_transitive, cls.chain_mixing);
    cls.chain_transitive = implies_up(cls.chain_transitive, cls.strong_chain_transitive);
    return cls;
}

QuotientSystem cyclic_factor(const FiniteRelation& f, const FiniteMetricSpace& d, double eps) {
    ScaleAnalysis a = analyze_scale(f, d, eps);
    if (!a.has_core)
        throw NotChainTransitiveError("cyclic_factor: eps-chain graph has no reachability core",
                                      std::move(a.sccs));
    const int p = a.core_period;
    if (p < 2)
        throw NoFactorError("cyclic_factor: period is 1, the system is chain mixing at this scale");

    const int n = f.n_points();
    // Residues on the core come from BFS levels; transient nodes upstream
    // inherit theirs backward along chain-graph edges (residue advances by 1
    // per edge). The f-edge sweep below certifies consistency.
    std::vector<int> residue(n, -1);
    const auto& members = a.sccs[a.core];
    {
        std::vector<int> queue;
        residue[members[0]] = 0;
        queue.push_back(members[0]);
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            int u = queue[qi];
            for (int v : a.g.succ[u])
                if (a.scc_of[v] == a.core && residue[v] < 0) {
                    residue[v] = (residue[u] + 1) % p;
                    queue.push_back(v);
                }
        }
        std::vector<std::vector<int>> rev(n);
        for (int u = 0; u < n; ++u)
            for (int v : a.g.succ[u]) rev[v].push_back(u);
        queue.clear();
        for (int v : members) queue.push_back(v);
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            int v = queue[qi];
            for (int u : rev[v])
                if (residue[u] < 0) {
                    residue[u] = (residue[v] - 1 + p) % p;
                    queue.push_back(u);
                }
        }
    }

    Partition part;
    part.class_of.assign(n, -1);
    part.classes.assign(p, {});
    for (int x = 0; x < n; ++x) {
        if (residue[x] < 0)
            throw NotChainTransitiveError("cyclic_factor: point does not reach the core",
                                          std::move(a.sccs));
        part.class_of[x] = residue[x];
        part.classes[residue[x]].push_back(x);
    }
    for (auto [a, b] : f.edges()) {
        int adv = (part.class_of[b] - part.class_of[a] + p) % p;
        if (adv != 1)
            throw InconsistentQuotientError(
                "cyclic_factor: relation edge does not advance the residue by 1");
    }
    std::vector<std::pair<int, int>> cyc;
    for (int r = 0; r < p; ++r) cyc.emplace_back(r, (r + 1) % p);

    PseudoMetricTable qd;
    qd.n = p;
    qd.values.assign(static_cast<std::size_t>(p) * p, kInf);
    qd.labels.resize(p);
    for (int r = 0; r < p; ++r) {
        qd.at(r, r) = 0.0;
        qd.labels[r] = "r" + std::to_string(r);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int a = part.class_of[i], b = part.class_of[j];
            if (a != b) qd.at(a, b) = std::min(qd.at(a, b), d(i, j));
        }
    double min_gap = kInf;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            if (a != b) min_gap = std::min(min_gap, qd.at(a, b));

    QuotientSystem out{std::move(part), std::move(qd), FiniteRelation(p, std::move(cyc)),
                       FactorKind::cyclic, 0.0, min_gap};
    out.isometry_defect = isometry_defect(out.induced_relation, out.quotient_distances);
    return out;
}

QuotientSystem quotient_factor(const FiniteRelation& f, const PseudoMetricTable& pseudo,
                               double numerical_zero) {
    if (f.n_points() != pseudo.n)
        throw ShapeError("quotient_factor: relation and table have different point counts");
    QuotientResult qr = quotient_by_zero_set(pseudo, numerical_zero);
    const int k = static_cast<int>(qr.partition.classes.size());

    std::vector<std::pair<int, int>> induced;
    for (auto [a, b] : f.edges())
        induced.emplace_back(qr.partition.class_of[a], qr.partition.class_of[b]);
    std::sort(induced.begin(), induced.end());
    induced.erase(std::unique(induced.begin(), induced.end()), induced.end());

    if (k == 1) {
        return QuotientSystem{std::move(qr.partition), std::move(qr.quotient),
                              FiniteRelation(1, {{0, 0}}), FactorKind::trivial, 0.0,
                              qr.min_interclass_distance};
    }

    std::vector<int> out_deg(k, 0), in_deg(k, 0);
    for (auto [a, b] : induced) {
        ++out_deg[a];
        ++in_deg[b];
    }
    for (int c = 0; c < k; ++c)
        if (out_deg[c] > 1)
            throw InconsistentQuotientError(
                "quotient_factor: induced relation is not single-valued on classes "
                "(zero-set is not dynamics-invariant at this resolution)");
    for (int c = 0; c < k; ++c)
        if (out_deg[c] != 1 || in_deg[c] != 1)
            throw InconsistentQuotientError(
                "quotient_factor: induced relation is not a bijection on classes");

    QuotientSystem out{std::move(qr.partition), std::move(qr.quotient),
                       FiniteRelation(k, std::move(induced)), FactorKind::isometric, 0.0,
                       qr.min_interclass_distance};
    out.isometry_defect = isometry_defect(out.induced_relation, out.quotient_distances);
    return out;
}

double isometry_defect(const FiniteRelation& g, const PseudoMetricTable& pseudo) {
    if (g.n_points() != pseudo.n)
        throw ShapeError("isometry_defect: relation and table have different point counts");
    double defect = 0.0;
    const auto& edges = g.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [x1, y1] = edges[i];
        for (std::size_t j = 0; j < edges.size(); ++j) {
            auto [x2, y2] = edges[j];
            double a = pseudo.at(x1, x2), b = pseudo.at(y1, y2);
            if (std::isfinite(a) && std::isfinite(b))
                defect = std::max(defect, std::fabs(a - b));
            else if (std::isfinite(a) != std::isfinite(b))
                defect = kInf;
        }
    }
    return defect;
}

FiniteRelation strong_chain_over_metrics(const FiniteRelation& f,
                                         const std::vector<FiniteMetricSpace>& metrics, double eps,
                                         int threads) {
    if (metrics.empty()) throw ValidationError("strong_chain_over_metrics: need at least one metric");
    const int n = f.n_points();
    for (const auto& d : metrics)
        if (d.size() != n)
            throw ShapeError("strong_chain_over_metrics: metric point count mismatch");
    std::vector<char> keep(static_cast<std::size_t>(n) * n, 1);
    for (const auto& d : metrics) {
        BarrierOptions opts;
        opts.threads = threads;
        BarrierField ell = barrier(f, d, BarrierMode::length, JumpPolicy::free_initial, opts);
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                if (!(ell.at(x, y) <= eps)) keep[static_cast<std::size_t>(x) * n + y] = 0;
    }
    std::vector<std::pair<int, int>> edges;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            if (keep[static_cast<std::size_t>(x) * n + y]) edges.emplace_back(x, y);
    if (edges.empty())
        throw EmptinessError("strong_chain_over_metrics: intersection is empty at eps=" +
                             std::to_string(eps));
    return FiniteRelation(n, std::move(edges));
}

} // namespace chainscope
