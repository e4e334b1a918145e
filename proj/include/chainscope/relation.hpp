#ifndef CHAINSCOPE_RELATION_HPP
#define CHAINSCOPE_RELATION_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "chainscope/errors.hpp"
#include "chainscope/metric_space.hpp"

namespace chainscope {

// A nonempty closed relation on a finite space: a set of ordered index pairs.
// Edges are kept both as a sorted pair list (set algebra) and as forward /
// backward stars (barrier and reachability sweeps). Immutable.
class FiniteRelation {
public:
    FiniteRelation(int n_points, std::vector<std::pair<int, int>> edges);
    static FiniteRelation identity(int n_points);

    int n_points() const { return n_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<int>& successors(int a) const { return succ_[a]; }
    const std::vector<int>& predecessors(int b) const { return pred_[b]; }
    bool contains(int a, int b) const;

    bool operator==(const FiniteRelation& other) const {
        return n_ == other.n_ && edges_ == other.edges_;
    }

private:
    int n_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> succ_, pred_;
};

// g after f: {(x,z) : exists y with (x,y) in f and (y,z) in g}.
FiniteRelation compose(const FiniteRelation& g, const FiniteRelation& f);
FiniteRelation invert(const FiniteRelation& f);

// Product relation on the product point set, row-major pair encoding.
FiniteRelation product(const FiniteRelation& f, const FiniteRelation& g,
                       std::size_t size_cap = kDefaultSizeCap);
// n-fold product power f^(n), consistent with power_metric's tuple order.
FiniteRelation product_power(const FiniteRelation& f, int n,
                             std::size_t size_cap = kDefaultSizeCap);

struct ReachResult {
    FiniteRelation n_f;                       // transitive closure, paths of length >= 1
    std::vector<std::vector<int>> orbit_sets; // orbit_sets[x]: reachable from x in >= 1 step
};
ReachResult reach(const FiniteRelation& f);

struct SurjectivityReport {
    bool dom_full = false;   // every point has an outgoing edge
    bool codom_full = false; // every point has an incoming edge
};
SurjectivityReport surjectivity(const FiniteRelation& f);

bool is_total(const FiniteRelation& f);    // dom_full
bool is_function(const FiniteRelation& f); // exactly one successor per point

// JSON {"n": int, "edges": [[a,b],...]}; CSV with header "from,to".
FiniteRelation load_relation_json(const std::string& path);
void save_relation_json(const FiniteRelation& f, const std::string& path);
FiniteRelation load_relation_csv(const std::string& path);
void save_relation_csv(const FiniteRelation& f, const std::string& path);
std::string relation_to_json_string(const FiniteRelation& f);

} // namespace chainscope

#endif
