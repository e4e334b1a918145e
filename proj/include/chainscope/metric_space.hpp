#ifndef CHAINSCOPE_METRIC_SPACE_HPP
#define CHAINSCOPE_METRIC_SPACE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "chainscope/errors.hpp"

namespace chainscope {

inline constexpr double kTriangleTolerance = 1e-12;
inline constexpr std::size_t kDefaultSizeCap = 250000;

// Result of sweeping a square table for the (pseudo/ultra) metric axioms.
// Violations are maximal magnitudes; booleans apply the sweep tolerance.
struct MetricReport {
    bool is_pseudo_metric = false;
    bool is_metric = false;
    bool is_ultrametric = false;
    double worst_violation = 0.0; // max over the pseudo-metric axioms
    double symmetry_violation = 0.0;
    double diagonal_violation = 0.0;
    double negativity_violation = 0.0;
    double triangle_violation = 0.0;
    double ultrametric_violation = 0.0;
    double min_off_diagonal = 0.0;
};

MetricReport check_metric(const std::vector<double>& table, int n,
                          double tol = kTriangleTolerance);
MetricReport check_metric(const std::vector<std::vector<double>>& table,
                          double tol = kTriangleTolerance);

// Pseudo-metric values over n labeled points; zero off-diagonal entries and
// +infinity (unreachable at finite scale) are both legitimate.
struct PseudoMetricTable {
    int n = 0;
    std::vector<double> values; // row-major n*n
    bool is_ultrametric = false;
    std::vector<std::string> labels;

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n + j]; }
    MetricReport check(double tol = kTriangleTolerance) const { return check_metric(values, n, tol); }
};

// A finite metric space: symmetric table, zero diagonal, triangle inequality
// within the declared tolerance. Immutable after construction.
class FiniteMetricSpace {
public:
    FiniteMetricSpace(std::vector<std::string> labels, std::vector<double> dist,
                      double tol = kTriangleTolerance);
    static FiniteMetricSpace from_rows(const std::vector<std::vector<double>>& rows,
                                       double tol = kTriangleTolerance);
    static FiniteMetricSpace discrete(int n);

    int size() const { return n_; }
    const std::string& label(int i) const { return labels_[i]; }
    const std::vector<std::string>& labels() const { return labels_; }
    double operator()(int i, int j) const { return dist_[static_cast<std::size_t>(i) * n_ + j]; }
    const std::vector<double>& table() const { return dist_; }
    const double* row(int i) const { return dist_.data() + static_cast<std::size_t>(i) * n_; }

    PseudoMetricTable as_pseudo() const;

private:
    int n_;
    std::vector<std::string> labels_;
    std::vector<double> dist_;
};

// Power space (X^(n), d^(n)): points are n-tuples in row-major order, the
// distance is the coordinatewise maximum.
FiniteMetricSpace power_metric(const FiniteMetricSpace& d, int n,
                               std::size_t size_cap = kDefaultSizeCap);

struct Partition {
    std::vector<std::vector<int>> classes; // each sorted; ordered by least member
    std::vector<int> class_of;
};

struct QuotientResult {
    Partition partition;
    PseudoMetricTable quotient; // min over representatives
    // Least distance between distinct classes; lets callers detect
    // under-resolved partitions when it does not clear numerical_zero.
    double min_interclass_distance = 0.0;
};

// Classes are connected components of {(i,j): rho(i,j) <= numerical_zero}.
QuotientResult quotient_by_zero_set(const PseudoMetricTable& rho, double numerical_zero);

// CSV: header row of labels, then n rows of n decimal values.
FiniteMetricSpace load_metric_csv(const std::string& path);
void save_metric_csv(const FiniteMetricSpace& d, const std::string& path);
void save_table_csv(const PseudoMetricTable& t, const std::string& path);

// Binary container: magic "CSMS1", little-endian u32 n, then n*n f64 row-major.
FiniteMetricSpace load_metric_binary(const std::string& path);
void save_metric_binary(const FiniteMetricSpace& d, const std::string& path);

} // namespace chainscope

#endif
