#include "chainscope/digraph.hpp"

#include <algorithm>
#include <numeric>

namespace chainscope {

std::vector<std::vector<int>> strongly_connected_components(const Digraph& g) {
    const int n = g.n;
    std::vector<int> index(n, -1), lowlink(n, 0), on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> sccs;
    int next_index = 0;

    // Explicit DFS frames: (vertex, next successor position).
    std::vector<std::pair<int, std::size_t>> frames;
    for (int start = 0; start < n; ++start) {
        if (index[start] != -1) continue;
        frames.emplace_back(start, 0);
        index[start] = lowlink[start] = next_index++;
        stack.push_back(start);
        on_stack[start] = 1;
        while (!frames.empty()) {
            auto& [v, pos] = frames.back();
            if (pos < g.succ[v].size()) {
                int w = g.succ[v][pos++];
                if (index[w] == -1) {
                    index[w] = lowlink[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    lowlink[v] = std::min(lowlink[v], index[w]);
                }
            } else {
                int v_done = v;
                frames.pop_back();
                if (!frames.empty())
                    lowlink[frames.back().first] =
                        std::min(lowlink[frames.back().first], lowlink[v_done]);
                if (lowlink[v_done] == index[v_done]) {
                    std::vector<int> comp;
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp.push_back(w);
                        if (w == v_done) break;
                    }
                    std::sort(comp.begin(), comp.end());
                    sccs.push_back(std::move(comp));
                }
            }
        }
    }
    return sccs;
}

bool is_strongly_connected(const Digraph& g) {
    if (g.n <= 1) return true;
    return strongly_connected_components(g).size() == 1;
}

std::vector<int> bfs_levels(const Digraph& g, int src) {
    std::vector<int> level(g.n, -1);
    std::vector<int> queue;
    level[src] = 0;
    queue.push_back(src);
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        int u = queue[qi];
        for (int v : g.succ[u])
            if (level[v] == -1) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
    }
    return level;
}

int digraph_period(const Digraph& g) {
    std::vector<int> level = bfs_levels(g, 0);
    long long p = 0;
    for (int u = 0; u < g.n; ++u) {
        if (level[u] < 0) continue;
        for (int v : g.succ[u]) {
            if (level[v] < 0) continue;
            long long diff = static_cast<long long>(level[u]) + 1 - level[v];
            p = std::gcd(p, diff < 0 ? -diff : diff);
        }
    }
    return p == 0 ? 1 : static_cast<int>(p);
}

} // namespace chainscope
