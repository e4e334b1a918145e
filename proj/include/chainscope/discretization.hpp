#ifndef CHAINSCOPE_DISCRETIZATION_HPP
#define CHAINSCOPE_DISCRETIZATION_HPP

#include <map>
#include <string>
#include <vector>

#include "chainscope/metric_space.hpp"
#include "chainscope/product_mixing.hpp"
#include "chainscope/relation.hpp"

namespace chainscope {

inline constexpr double kGoldenAlpha = 0.61803398874989484820;

enum class SystemKind { circle_rotation, doubling, grid_map, finite_relation };
enum class CircleMetricKind { arc, sqrt_distorted, discrete, table };

struct SystemSpec {
    SystemKind kind = SystemKind::circle_rotation;
    int n = 0;                 // grid size
    double alpha = kGoldenAlpha;
    CircleMetricKind metric = CircleMetricKind::arc;
    bool outer = false;        // scheme: nearest (false) or outer(lipschitz_bound)
    double lipschitz_bound = 1.0;
    std::string table_path;    // grid_map image table
    std::string relation_path; // finite_relation passthrough
    std::string metric_path;   // metric table for metric == table
};

SystemSpec parse_system_spec(const std::string& json_text);
std::string system_spec_to_json(const SystemSpec& spec);

// Exact evaluation of the circle metrics on the grid i/N. The distorted
// metric uses representatives in [-1/2, 1/2].
FiniteMetricSpace circle_metric(CircleMetricKind kind, int n);

// Grid realization of the system: scheme=nearest rounds each node's image to
// the nearest node (a functional relation); scheme=outer relates a node to
// every node within lipschitz_bound*h/2 + h/2 of its image, a closed relation
// containing the true dynamics.
std::pair<FiniteMetricSpace, FiniteRelation> discretize(const SystemSpec& spec);

// Truncated d_f: entrywise max of d over orbit pairs for 0..iterations steps.
// Monotone in iterations and >= d; stops early once the orbit map repeats.
PseudoMetricTable estimate_df(const FiniteMetricSpace& d, const FiniteRelation& f_map,
                              long iterations, int threads = 1);

struct RatioRange {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
};
// Extremes of d1(i,j)/d2(i,j) over off-diagonal pairs.
RatioRange bilipschitz_ratio(const PseudoMetricTable& d1, const PseudoMetricTable& d2);
RatioRange bilipschitz_ratio(const FiniteMetricSpace& d1, const FiniteMetricSpace& d2);

struct StudyRow {
    int n = 0;
    double h = 0.0;
    double theta_max = 0.0;
    double rho_max = 0.0;
    int period = 0;
    int scc_count = 0;
    bool chain_transitive = false; // eps-dense reachability at the working scales
    double ell_max = 0.0;
    bool ell_is_bound = false;
    double wall_ms = 0.0;
};

struct StudyOptions {
    std::vector<std::string> quantities; // subset of theta_max,rho_max,period,scc_count
    JumpGraphSpec jump{};
    int threads = 1;
    std::size_t node_cap = kDefaultProductNodeCap;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    std::map<std::string, std::string> trend; // quantity -> decreasing|stable|increasing|mixed
};

// One row per grid size with the requested quantities and a monotone-trend
// annotation; the workhorse for empirical h -> 0 studies.
StudyResult refine_study(const SystemSpec& base, const std::vector<int>& n_list,
                         const StudyOptions& opts = {});

// Trend-based classification across refinements: the underlying notions are
// h -> 0 limits, so verdicts come from agreement/vanishing across the schedule.
Classification classify_system(const SystemSpec& base, const std::vector<int>& n_list,
                               const StudyOptions& opts = {});

void save_study_csv(const StudyResult& study, const std::string& path);

} // namespace chainscope

#endif
