#include "chainscope/transitivity.hpp"

#include <algorithm>

#include "json.hpp"

namespace chainscope {

namespace {

// Forward reachability (>= 1 step) in the product digraph f x f from a set of
// product nodes, without materializing the product relation.
std::vector<char> product_reach(const FiniteRelation& f, const std::vector<int>& seeds) {
    const int n = f.n_points();
    std::vector<char> reached(static_cast<std::size_t>(n) * n, 0);
    std::vector<int> queue;
    auto push_successors = [&](int x, int y) {
        for (int x2 : f.successors(x))
            for (int y2 : f.successors(y)) {
                int node = x2 * n + y2;
                if (!reached[node]) {
                    reached[node] = 1;
                    queue.push_back(node);
                }
            }
    };
    for (int s : seeds) push_successors(s / n, s % n);
    for (std::size_t qi = 0; qi < queue.size(); ++qi)
        push_successors(queue[qi] / n, queue[qi] % n);
    return reached;
}

// Nodes from which some seed is reachable in >= 1 step; the backward sweep
// uses predecessor stars.
std::vector<char> product_coreach(const FiniteRelation& f, const std::vector<int>& seeds) {
    const int n = f.n_points();
    std::vector<char> reached(static_cast<std::size_t>(n) * n, 0);
    std::vector<int> queue;
    auto push_predecessors = [&](int x, int y) {
        for (int x0 : f.predecessors(x))
            for (int y0 : f.predecessors(y)) {
                int node = x0 * n + y0;
                if (!reached[node]) {
                    reached[node] = 1;
                    queue.push_back(node);
                }
            }
    };
    for (int s : seeds) push_predecessors(s / n, s % n);
    for (std::size_t qi = 0; qi < queue.size(); ++qi)
        push_predecessors(queue[qi] / n, queue[qi] % n);
    return reached;
}

FiniteRelation mask_to_relation(const std::vector<char>& mask, int n) {
    std::vector<std::pair<int, int>> edges;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            if (mask[static_cast<std::size_t>(x) * n + y]) edges.emplace_back(x, y);
    return FiniteRelation(n, std::move(edges));
}

std::vector<int> diagonal_nodes(int n) {
    std::vector<int> out(n);
    for (int i = 0; i < n; ++i) out[i] = i * n + i;
    return out;
}

void require_total(const FiniteRelation& f, const char* op) {
    if (!is_total(f))
        throw DomainError(std::string(op) + ": requires a total relation (the map setting)");
}

bool is_topologically_transitive(const FiniteRelation& f) {
    ReachResult rr = reach(f);
    return rr.n_f.edge_count() ==
           static_cast<std::size_t>(f.n_points()) * static_cast<std::size_t>(f.n_points());
}

} // namespace

std::pair<FiniteRelation, FiniteRelation> prox_and_q(const FiniteRelation& f) {
    require_total(f, "prox_and_q");
    const int n = f.n_points();
    std::vector<char> q_mask = product_coreach(f, diagonal_nodes(n));
    FiniteRelation q = mask_to_relation(q_mask, n);
    // On finite spaces the orbit closure equals the orbit, so Prox and Q
    // coincide; both are reported for interface parity.
    return {q, q};
}

FiniteRelation rn(const FiniteRelation& f) {
    require_total(f, "rn");
    if (!is_topologically_transitive(f))
        throw HypothesisError("rn: relation is not topologically transitive (N_f != X x X)");
    const int n = f.n_points();
    // Intersection over diagonal sources of forward-reachable sets. Every
    // point is a transitive point here, so one source would do; the
    // intersection keeps the definition literal at negligible cost.
    std::vector<char> acc(static_cast<std::size_t>(n) * n, 1);
    for (int z = 0; z < n; ++z) {
        std::vector<char> r = product_reach(f, {z * n + z});
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] & r[i];
    }
    return mask_to_relation(acc, n);
}

WeakMixingResult weak_mixing(const FiniteRelation& f) {
    FiniteRelation r = rn(f);
    const int n = f.n_points();
    WeakMixingResult out;
    if (r.edge_count() == static_cast<std::size_t>(n) * n) {
        out.weak_mixing = true;
        return out;
    }
    for (int x = 0; x < n && !out.witness; ++x)
        for (int y = 0; y < n; ++y)
            if (!r.contains(x, y)) {
                out.witness = std::make_pair(x, y);
                break;
            }
    return out;
}

QInvarianceResult q_invariance_check(const FiniteRelation& f) {
    require_total(f, "q_invariance_check");
    if (!is_topologically_transitive(f))
        throw HypothesisError("q_invariance_check: relation is not topologically transitive");
    const int n = f.n_points();
    auto [prox, q] = prox_and_q(f);
    (void)prox;

    QInvarianceResult out;
    out.q_transitive = true;
    for (auto [x, y] : q.edges()) {
        for (int z : q.successors(y))
            if (!q.contains(x, z)) {
                out.q_transitive = false;
                break;
            }
        if (!out.q_transitive) break;
    }

    // N(f x f)(Q): forward product reachability (>= 1 step) seeded on Q.
    std::vector<int> seeds;
    seeds.reserve(q.edge_count());
    for (auto [x, y] : q.edges()) seeds.push_back(x * n + y);
    std::vector<char> image = product_reach(f, seeds);
    FiniteRelation image_rel = mask_to_relation(image, n);
    out.q_invariant = image_rel == q;
    out.consistent = out.q_transitive == out.q_invariant;
    return out;
}

Section4Report section4_report(const FiniteRelation& f) {
    require_total(f, "section4_report");
    bool transitive = is_topologically_transitive(f);
    if (!transitive)
        throw HypothesisError("section4_report: relation is not topologically transitive");
    auto [prox, q] = prox_and_q(f);
    FiniteRelation r_n = rn(f);
    WeakMixingResult wm = weak_mixing(f);
    QInvarianceResult qi = q_invariance_check(f);
    return Section4Report{transitive,      std::move(prox), std::move(q), std::move(r_n),
                          wm.weak_mixing,  wm.witness,      qi.q_transitive,
                          qi.q_invariant,  qi.consistent,   is_function(f)};
}

std::string section4_to_json_string(const Section4Report& r) {
    nlohmann::ordered_json j;
    j["transitive"] = r.transitive;
    auto rel_json = [](const FiniteRelation& rel) {
        nlohmann::ordered_json o;
        o["n"] = rel.n_points();
        auto edges = nlohmann::ordered_json::array();
        for (auto [a, b] : rel.edges()) edges.push_back({a, b});
        o["edges"] = std::move(edges);
        return o;
    };
    j["prox"] = rel_json(r.prox);
    j["q"] = rel_json(r.q);
    j["r_n"] = rel_json(r.r_n);
    j["weak_mixing"] = r.weak_mixing;
    if (r.witness)
        j["witness"] = {r.witness->first, r.witness->second};
    else
        j["witness"] = nullptr;
    j["q_transitive"] = r.q_transitive;
    j["q_invariant"] = r.q_invariant;
    j["consistent"] = r.consistent;
    j["functional"] = r.functional;
    return j.dump(2);
}

} // namespace chainscope
