#ifndef CHAINSCOPE_BARRIER_HPP
#define CHAINSCOPE_BARRIER_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "chainscope/digraph.hpp"
#include "chainscope/metric_space.hpp"
#include "chainscope/relation.hpp"

namespace chainscope {

// A chain is a nonempty ordered list of relation edges. Evaluating it
// between endpoints x, y charges the jump distances d(b_{i-1}, a_i) with
// b_0 = x and a_{n+1} = y.
struct Chain {
    std::vector<std::pair<int, int>> edges;
    int length() const { return static_cast<int>(edges.size()); }
};

void validate_chain(const Chain& c, const FiniteRelation& f);
Chain reverse_chain(const Chain& c);
Chain concat_chains(const Chain& c, const Chain& d);

struct ChainCost {
    double bound = 0.0;  // max of the jump distances
    double length = 0.0; // sum of the jump distances
};
ChainCost eval_chain(const Chain& c, int x, int y, const FiniteMetricSpace& d);

enum class BarrierMode { bound, length };
enum class JumpPolicy { free_initial, anchored };

const char* to_string(BarrierMode m);
const char* to_string(JumpPolicy p);

// Exact infimum of chain-bound / chain-length over all chains from x to y.
// Unreachable pairs hold +infinity.
class BarrierField {
public:
    BarrierField(BarrierMode mode, JumpPolicy policy, int n, std::vector<int> sources,
                 std::vector<double> values, std::string relation_id, std::string metric_id);

    BarrierMode mode() const { return mode_; }
    JumpPolicy policy() const { return policy_; }
    int size() const { return n_; }
    const std::vector<int>& sources() const { return sources_; }
    double at(int x, int y) const { return values_[static_cast<std::size_t>(x) * n_ + y]; }
    const std::vector<double>& values() const { return values_; }
    const std::string& relation_id() const { return relation_id_; }
    const std::string& metric_id() const { return metric_id_; }
    double finite_max() const; // max over finite entries of computed rows
    bool all_finite() const;

private:
    BarrierMode mode_;
    JumpPolicy policy_;
    int n_;
    std::vector<int> sources_;
    std::vector<double> values_;
    std::string relation_id_, metric_id_;
};

struct BarrierOptions {
    std::vector<int> sources; // empty: all points
    int threads = 1;
    std::string relation_id = "relation";
    std::string metric_id = "metric";
};

BarrierField barrier(const FiniteRelation& f, const FiniteMetricSpace& d, BarrierMode mode,
                     JumpPolicy policy, const BarrierOptions& opts = {});

// One row of the field: values[y] for a fixed source x.
std::vector<double> barrier_row(const FiniteRelation& f, const FiniteMetricSpace& d,
                                BarrierMode mode, JumpPolicy policy, int source);

// Digraph with an edge u -> v whenever some (a, v) in f has d(u, a) < eps
// (one jump-then-step at scale eps).
Digraph epsilon_chain_graph(const FiniteRelation& f, const FiniteMetricSpace& d, double eps);

// A chain attaining the barrier value for (x, y); throws NoWitnessError on
// unreachable pairs. No promise is made about chain length.
Chain witness_chain(const FiniteRelation& f, const FiniteMetricSpace& d, int x, int y,
                    BarrierMode mode, JumpPolicy policy = JumpPolicy::free_initial);

// CSV with columns from,to,value,mode,policy; +infinity as "inf".
void save_barrier_csv(const BarrierField& field, const std::vector<std::string>& labels,
                      const std::string& path);

} // namespace chainscope

#endif
