#ifndef CHAINSCOPE_DIGRAPH_HPP
#define CHAINSCOPE_DIGRAPH_HPP

#include <vector>

namespace chainscope {

struct Digraph {
    int n = 0;
    std::vector<std::vector<int>> succ; // sorted adjacency
};

// Tarjan's algorithm, iterative; components in reverse topological order,
// members sorted.
std::vector<std::vector<int>> strongly_connected_components(const Digraph& g);

bool is_strongly_connected(const Digraph& g);

// BFS distances from src; -1 where unreachable.
std::vector<int> bfs_levels(const Digraph& g, int src);

// gcd of cycle lengths of a strongly connected digraph, via
// gcd over edges u->v of |level(u) + 1 - level(v)|.
int digraph_period(const Digraph& g);

} // namespace chainscope

#endif
