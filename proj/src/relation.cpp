#include "chainscope/relation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace chainscope {

FiniteRelation::FiniteRelation(int n_points, std::vector<std::pair<int, int>> edges)
    : n_(n_points), edges_(std::move(edges)) {
    if (n_ < 1) throw ShapeError("FiniteRelation: need at least one point");
    if (edges_.empty()) throw EmptinessError("FiniteRelation: relations are assumed nonempty");
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    succ_.assign(n_, {});
    pred_.assign(n_, {});
    for (auto [a, b] : edges_) {
        if (a < 0 || a >= n_ || b < 0 || b >= n_)
            throw ShapeError("FiniteRelation: edge index out of range");
        succ_[a].push_back(b);
        pred_[b].push_back(a);
    }
}

FiniteRelation FiniteRelation::identity(int n_points) {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(n_points);
    for (int i = 0; i < n_points; ++i) edges.emplace_back(i, i);
    return FiniteRelation(n_points, std::move(edges));
}

bool FiniteRelation::contains(int a, int b) const {
    if (a < 0 || a >= n_ || b < 0 || b >= n_) return false;
    const auto& s = succ_[a];
    return std::binary_search(s.begin(), s.end(), b);
}

FiniteRelation compose(const FiniteRelation& g, const FiniteRelation& f) {
    if (g.n_points() != f.n_points())
        throw ShapeError("compose: point counts are incompatible");
    std::vector<std::pair<int, int>> out;
    for (int x = 0; x < f.n_points(); ++x) {
        std::vector<int> targets;
        for (int y : f.successors(x))
            for (int z : g.successors(y)) targets.push_back(z);
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        for (int z : targets) out.emplace_back(x, z);
    }
    if (out.empty()) throw EmptinessError("compose: result is empty");
    return FiniteRelation(f.n_points(), std::move(out));
}

FiniteRelation invert(const FiniteRelation& f) {
    std::vector<std::pair<int, int>> out;
    out.reserve(f.edge_count());
    for (auto [a, b] : f.edges()) out.emplace_back(b, a);
    return FiniteRelation(f.n_points(), std::move(out));
}

FiniteRelation product(const FiniteRelation& f, const FiniteRelation& g, std::size_t size_cap) {
    std::size_t n = static_cast<std::size_t>(f.n_points()) * g.n_points();
    if (n > size_cap)
        throw CapacityError("product: " + std::to_string(n) + " points exceeds size cap " +
                            std::to_string(size_cap));
    std::vector<std::pair<int, int>> out;
    out.reserve(f.edge_count() * g.edge_count());
    const int ng = g.n_points();
    for (auto [x1, y1] : f.edges())
        for (auto [x2, y2] : g.edges())
            out.emplace_back(x1 * ng + x2, y1 * ng + y2);
    return FiniteRelation(static_cast<int>(n), std::move(out));
}

FiniteRelation product_power(const FiniteRelation& f, int n, std::size_t size_cap) {
    if (n < 1) throw ValidationError("product_power: n must be >= 1");
    FiniteRelation acc = f;
    for (int i = 1; i < n; ++i) acc = product(acc, f, size_cap);
    return acc;
}

ReachResult reach(const FiniteRelation& f) {
    const int n = f.n_points();
    std::vector<std::vector<int>> orbits(n);
    std::vector<std::pair<int, int>> closure_edges;
    std::vector<char> seen(n);
    std::vector<int> queue;
    for (int x = 0; x < n; ++x) {
        std::fill(seen.begin(), seen.end(), 0);
        queue.clear();
        for (int y : f.successors(x))
            if (!seen[y]) {
                seen[y] = 1;
                queue.push_back(y);
            }
        for (std::size_t qi = 0; qi < queue.size(); ++qi)
            for (int z : f.successors(queue[qi]))
                if (!seen[z]) {
                    seen[z] = 1;
                    queue.push_back(z);
                }
        std::sort(queue.begin(), queue.end());
        for (int y : queue) closure_edges.emplace_back(x, y);
        orbits[x] = queue;
    }
    return ReachResult{FiniteRelation(n, std::move(closure_edges)), std::move(orbits)};
}

SurjectivityReport surjectivity(const FiniteRelation& f) {
    SurjectivityReport r;
    r.dom_full = true;
    r.codom_full = true;
    for (int i = 0; i < f.n_points(); ++i) {
        if (f.successors(i).empty()) r.dom_full = false;
        if (f.predecessors(i).empty()) r.codom_full = false;
    }
    return r;
}

bool is_total(const FiniteRelation& f) {
    for (int i = 0; i < f.n_points(); ++i)
        if (f.successors(i).empty()) return false;
    return true;
}

bool is_function(const FiniteRelation& f) {
    for (int i = 0; i < f.n_points(); ++i)
        if (f.successors(i).size() != 1) return false;
    return true;
}

FiniteRelation load_relation_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open relation JSON: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ShapeError("bad relation JSON in " + path + ": " + e.what());
    }
    if (!j.contains("n") || !j.contains("edges"))
        throw ShapeError("relation JSON needs fields 'n' and 'edges': " + path);
    int n = j["n"].get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2)
            throw ShapeError("relation JSON edges must be [a,b] pairs: " + path);
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return FiniteRelation(n, std::move(edges));
}

std::string relation_to_json_string(const FiniteRelation& f) {
    nlohmann::ordered_json j;
    j["n"] = f.n_points();
    auto edges = nlohmann::ordered_json::array();
    for (auto [a, b] : f.edges()) edges.push_back({a, b});
    j["edges"] = std::move(edges);
    return j.dump();
}

void save_relation_json(const FiniteRelation& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write relation JSON: " + path);
    out << relation_to_json_string(f) << "\n";
}

FiniteRelation load_relation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open relation CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ShapeError("relation CSV is empty: " + path);
    std::vector<std::pair<int, int>> edges;
    int max_index = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            throw ShapeError("relation CSV rows need two columns: " + path);
        while (!b.empty() && (b.back() == '\r' || b.back() == '\n')) b.pop_back();
        int ia = std::stoi(a), ib = std::stoi(b);
        edges.emplace_back(ia, ib);
        max_index = std::max({max_index, ia, ib});
    }
    return FiniteRelation(max_index + 1, std::move(edges));
}

void save_relation_csv(const FiniteRelation& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write relation CSV: " + path);
    out << "from,to\n";
    for (auto [a, b] : f.edges()) out << a << "," << b << "\n";
}

} // namespace chainscope
