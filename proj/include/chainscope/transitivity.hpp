#ifndef CHAINSCOPE_TRANSITIVITY_HPP
#define CHAINSCOPE_TRANSITIVITY_HPP

#include <optional>
#include <utility>

#include "chainscope/relation.hpp"

namespace chainscope {

// Proximality machinery for finite total relations. Closure is trivial at
// finite scale, so proximality and regional proximality coincide: both are
// the pairs from which some diagonal node of the product digraph is reachable
// in >= 1 step. The classical equivalences hold for maps, so reports flag
// whether the input is functional.

// Requires a total relation (every point has a successor).
std::pair<FiniteRelation, FiniteRelation> prox_and_q(const FiniteRelation& f);

// Pairs reachable in >= 1 step from every diagonal node of the product
// digraph; requires topological transitivity (N_f = X x X).
FiniteRelation rn(const FiniteRelation& f);

struct WeakMixingResult {
    bool weak_mixing = false;
    std::optional<std::pair<int, int>> witness; // a pair outside R_n when not mixing
};
WeakMixingResult weak_mixing(const FiniteRelation& f);

struct QInvarianceResult {
    bool q_transitive = false;
    bool q_invariant = false; // N(f x f)(Q) = Q
    bool consistent = false;  // the two booleans agree
};
QInvarianceResult q_invariance_check(const FiniteRelation& f);

struct Section4Report {
    bool transitive;
    FiniteRelation prox;
    FiniteRelation q;
    FiniteRelation r_n;
    bool weak_mixing;
    std::optional<std::pair<int, int>> witness;
    bool q_transitive;
    bool q_invariant;
    bool consistent;
    bool functional; // the classical equivalences are asserted for maps only
};

Section4Report section4_report(const FiniteRelation& f);
std::string section4_to_json_string(const Section4Report& r);

} // namespace chainscope

#endif
