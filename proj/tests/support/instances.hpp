#ifndef CHAINSCOPE_TEST_INSTANCES_HPP
#define CHAINSCOPE_TEST_INSTANCES_HPP

#include <cstdint>
#include <vector>

#include "chainscope/metric_space.hpp"
#include "chainscope/relation.hpp"

namespace chainscope::test {

inline FiniteRelation cycle_relation(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return FiniteRelation(n, std::move(edges));
}

inline FiniteRelation swap_relation() { return FiniteRelation(2, {{0, 1}, {1, 0}}); }

inline FiniteRelation complete_relation(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) edges.emplace_back(i, j);
    return FiniteRelation(n, std::move(edges));
}

// xorshift64: a tiny deterministic generator so sampled sweeps are frozen.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    std::uint64_t next() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    }
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

// All total functions on n points, as successor tables.
inline std::vector<std::vector<int>> all_functions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(n, 0);
    while (true) {
        out.push_back(cur);
        int i = 0;
        while (i < n && ++cur[i] == n) cur[i++] = 0;
        if (i == n) break;
    }
    return out;
}

inline FiniteRelation function_relation(const std::vector<int>& succ) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < static_cast<int>(succ.size()); ++i) edges.emplace_back(i, succ[i]);
    return FiniteRelation(static_cast<int>(succ.size()), std::move(edges));
}

} // namespace chainscope::test

#endif
