#ifndef CHAINSCOPE_PRODUCT_MIXING_HPP
#define CHAINSCOPE_PRODUCT_MIXING_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "chainscope/barrier.hpp"
#include "chainscope/metric_space.hpp"
#include "chainscope/relation.hpp"

namespace chainscope {

inline constexpr std::size_t kDefaultProductNodeCap = 4000000;

struct JumpGraphSpec {
    enum class Kind { auto_select, complete, knn };
    Kind kind = Kind::auto_select; // auto: complete when n <= 64, else knn
    int k = 8;
};

struct ProductOptions {
    JumpGraphSpec jump{};
    int base_point = 0;      // the diagonal base z
    int second_base = -1;    // -1: auto (point 1)
    bool reverse_check = true;
    bool second_base_check = true;
    double flag_tolerance = 1e-9; // declared tolerance for the quality flags
    std::size_t node_cap = kDefaultProductNodeCap;
};

struct ProductDiagnostics {
    double max_value = 0.0; // over finite entries
    bool any_unreachable = false;
    double max_asymmetry = 0.0;          // forward vs reverse runs
    double base_independence_gap = 0.0;  // vs the second diagonal base
    bool flagged = false;
};

struct PseudoMetricResult {
    PseudoMetricTable table;
    ProductDiagnostics diag;
};

// rho_d^f: additive product barrier from a diagonal base. Pseudo-metric with
// rho <= d when the relation is strong chain transitive; at finite working
// scale deviations are surfaced through the diagnostics, not hidden.
PseudoMetricResult rho_pseudometric(const FiniteRelation& f, const FiniteMetricSpace& d,
                                    const ProductOptions& opts = {});

// theta_d^f: minimax variant; pseudo-ultrametric counterpart of rho.
PseudoMetricResult theta_pseudoultrametric(const FiniteRelation& f, const FiniteMetricSpace& d,
                                           const ProductOptions& opts = {});

// gcd of cycle lengths of the eps-chain digraph, computed on its reachability
// core: the unique terminal strongly connected component every node reaches.
// Discretized non-invertible maps leave transient nodes upstream of the core,
// so the core, not the full graph, carries the cycle structure. Throws
// NotChainTransitiveError (with the SCC decomposition) when no such core
// exists.
int period(const FiniteRelation& f, const FiniteMetricSpace& d, double eps);

// Chain transitivity at scale eps: from every point, the >= 1-step reach set
// of the eps-chain digraph is eps-dense, i.e. m^f_d(x,y) < eps for all pairs.
bool chain_transitive_at_scale(const FiniteRelation& f, const FiniteMetricSpace& d, double eps);

enum class Verdict { yes, no, undetermined };
const char* to_string(Verdict v);

struct ScaleEvidence {
    double scale = 0.0;        // eps (or grid step h in refinement studies)
    bool ct_at_scale = false;  // eps-dense reachability from every point
    int scc_count = 0;         // components of the full eps-chain graph
    int period = 0;            // core period; 0 when no core exists
    double theta_max = 0.0;
    double rho_max = 0.0;
    double ell_max = 0.0;   // exact max of the length barrier, or a triangle bound
    bool ell_is_bound = false;
};

struct Classification {
    Verdict chain_transitive = Verdict::undetermined;
    Verdict chain_mixing = Verdict::undetermined;
    Verdict strong_chain_transitive = Verdict::undetermined;
    Verdict strong_chain_mixing = Verdict::undetermined;
    int period = 0; // stable period across the schedule, 0 if unstable
    double numerical_zero = 0.0;
    std::vector<ScaleEvidence> evidence;
};

struct ClassifyOptions {
    double numerical_zero = 0.0; // 0 for exact instances, 3h for discretizations
    JumpGraphSpec jump{};
    int base_point = 0;
    int threads = 1;
    std::size_t node_cap = kDefaultProductNodeCap;
    int exact_ell_limit = 600; // full length-barrier table up to this many points
};

// Instance-level classification across an eps schedule. Verdicts are the
// stable values across the schedule; disagreement yields undetermined.
Classification classify(const FiniteRelation& f, const FiniteMetricSpace& d,
                        const std::vector<double>& eps_schedule, const ClassifyOptions& opts = {});

enum class FactorKind { cyclic, isometric, trivial };
const char* to_string(FactorKind k);

struct QuotientSystem {
    Partition partition;
    PseudoMetricTable quotient_distances;
    FiniteRelation induced_relation;
    FactorKind factor_kind = FactorKind::trivial;
    double isometry_defect = 0.0;
    double min_interclass_distance = 0.0;
};

// The non-mixing branch of the dichotomy: BFS-level residues mod p collapse
// the system onto a p-cycle. Throws NoFactorError when p = 1.
QuotientSystem cyclic_factor(const FiniteRelation& f, const FiniteMetricSpace& d, double eps);

// Quotient by the (numerical) zero-set of rho_d^f or theta_d^f.
QuotientSystem quotient_factor(const FiniteRelation& f, const PseudoMetricTable& pseudo,
                               double numerical_zero);

// max over edge pairs (x1,y1),(x2,y2) of |pseudo(x1,x2) - pseudo(y1,y2)|.
double isometry_defect(const FiniteRelation& g, const PseudoMetricTable& pseudo);

// Intersection over the metric family of the threshold relations
// {(x,y): ell^f_d <= eps}; a finite-family upper approximation only.
FiniteRelation strong_chain_over_metrics(const FiniteRelation& f,
                                         const std::vector<FiniteMetricSpace>& metrics, double eps,
                                         int threads = 1);

} // namespace chainscope

#endif
