#include "chainscope/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace chainscope {

namespace {

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

std::vector<std::string> default_labels(int n) {
    std::vector<std::string> out(n);
    for (int i = 0; i < n; ++i) out[i] = "p" + std::to_string(i);
    return out;
}

std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

MetricReport check_metric(const std::vector<double>& table, int n, double tol) {
    if (n < 0 || table.size() != static_cast<std::size_t>(n) * n)
        throw ShapeError("check_metric: table is not a square n*n array");
    for (double x : table)
        if (std::isnan(x))
            throw ShapeError("check_metric: table contains NaN entries");
    // +infinity entries are tolerated in pseudo-metric tables produced at
    // finite scale; they never create triangle violations below.

    MetricReport r;
    auto at = [&](int i, int j) { return table[static_cast<std::size_t>(i) * n + j]; };

    r.min_off_diagonal = n > 1 ? std::numeric_limits<double>::infinity() : 0.0;
    for (int i = 0; i < n; ++i) {
        r.diagonal_violation = std::max(r.diagonal_violation, std::fabs(at(i, i)));
        for (int j = 0; j < n; ++j) {
            r.negativity_violation = std::max(r.negativity_violation, -at(i, j));
            if (j > i) {
                r.symmetry_violation = std::max(r.symmetry_violation, std::fabs(at(i, j) - at(j, i)));
                r.min_off_diagonal = std::min(r.min_off_diagonal, std::min(at(i, j), at(j, i)));
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            double dik = at(i, k);
            if (dik == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                double a = at(i, j), b = at(j, k);
                double s = a + b;
                if (dik > s) r.triangle_violation = std::max(r.triangle_violation, dik - s);
                double m = std::max(a, b);
                if (dik > m) r.ultrametric_violation = std::max(r.ultrametric_violation, dik - m);
            }
        }
    }
    r.worst_violation = std::max({r.symmetry_violation, r.diagonal_violation,
                                  r.negativity_violation, r.triangle_violation});
    r.is_pseudo_metric = r.worst_violation <= tol;
    r.is_metric = r.is_pseudo_metric && (n <= 1 || r.min_off_diagonal > tol);
    r.is_ultrametric = r.is_pseudo_metric && r.ultrametric_violation <= tol;
    return r;
}

MetricReport check_metric(const std::vector<std::vector<double>>& table, double tol) {
    int n = static_cast<int>(table.size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n) * n);
    for (const auto& row : table) {
        if (static_cast<int>(row.size()) != n)
            throw ShapeError("check_metric: table is not square");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return check_metric(flat, n, tol);
}

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> labels, std::vector<double> dist,
                                     double tol)
    : n_(static_cast<int>(labels.size())), labels_(std::move(labels)), dist_(std::move(dist)) {
    if (dist_.size() != static_cast<std::size_t>(n_) * n_)
        throw ShapeError("FiniteMetricSpace: distance table size does not match label count");
    if (!all_finite(dist_))
        throw ShapeError("FiniteMetricSpace: distances must be finite");
    MetricReport r = check_metric(dist_, n_, tol);
    if (!r.is_pseudo_metric)
        throw ValidationError("FiniteMetricSpace: table violates metric axioms (worst violation " +
                              format_double(r.worst_violation) + ")");
}

FiniteMetricSpace FiniteMetricSpace::from_rows(const std::vector<std::vector<double>>& rows,
                                               double tol) {
    int n = static_cast<int>(rows.size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n) * n);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != n)
            throw ShapeError("FiniteMetricSpace: rows are not square");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return FiniteMetricSpace(default_labels(n), std::move(flat), tol);
}

FiniteMetricSpace FiniteMetricSpace::discrete(int n) {
    if (n < 1) throw ShapeError("discrete metric needs n >= 1");
    std::vector<double> dist(static_cast<std::size_t>(n) * n, 1.0);
    for (int i = 0; i < n; ++i) dist[static_cast<std::size_t>(i) * n + i] = 0.0;
    return FiniteMetricSpace(default_labels(n), std::move(dist));
}

PseudoMetricTable FiniteMetricSpace::as_pseudo() const {
    PseudoMetricTable t;
    t.n = n_;
    t.values = dist_;
    t.labels = labels_;
    return t;
}

FiniteMetricSpace power_metric(const FiniteMetricSpace& d, int n, std::size_t size_cap) {
    if (n < 1) throw ValidationError("power_metric: n must be >= 1");
    if (n == 1) return d;
    const int base = d.size();
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) {
        if (base != 0 && total > size_cap / static_cast<std::size_t>(base))
            throw CapacityError("power_metric: " + std::to_string(base) + "^" + std::to_string(n) +
                                " points exceeds size cap " + std::to_string(size_cap));
        total *= static_cast<std::size_t>(base);
    }
    if (total > size_cap)
        throw CapacityError("power_metric: point count exceeds size cap");

    // Row-major tuple order: index = sum x_i * base^(n-1-i).
    std::vector<std::vector<int>> tuples(total, std::vector<int>(n));
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rest = idx;
        for (int i = n - 1; i >= 0; --i) {
            tuples[idx][i] = static_cast<int>(rest % base);
            rest /= base;
        }
    }
    std::vector<std::string> labels(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::string s = d.label(tuples[idx][0]);
        for (int i = 1; i < n; ++i) s += "|" + d.label(tuples[idx][i]);
        labels[idx] = std::move(s);
    }
    std::vector<double> dist(total * total);
    for (std::size_t a = 0; a < total; ++a) {
        for (std::size_t b = 0; b < total; ++b) {
            double m = 0.0;
            for (int i = 0; i < n; ++i) m = std::max(m, d(tuples[a][i], tuples[b][i]));
            dist[a * total + b] = m;
        }
    }
    return FiniteMetricSpace(std::move(labels), std::move(dist));
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace

QuotientResult quotient_by_zero_set(const PseudoMetricTable& rho, double numerical_zero) {
    if (numerical_zero < 0) throw ValidationError("quotient_by_zero_set: numerical_zero must be >= 0");
    // Finite-scale tables may carry triangle slack of the order of the grid
    // step; validate at the resolution being quotiented, never finer.
    double tol = std::max(kTriangleTolerance, numerical_zero);
    MetricReport r = rho.check(tol);
    if (!r.is_pseudo_metric)
        throw ValidationError("quotient_by_zero_set: input fails pseudo-metric validation (worst " +
                              std::to_string(r.worst_violation) + " at tolerance " + std::to_string(tol) + ")");

    const int n = rho.n;
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rho.at(i, j) <= numerical_zero) uf.unite(i, j);

    QuotientResult out;
    out.partition.class_of.assign(n, -1);
    std::vector<int> root_to_class(n, -1);
    for (int i = 0; i < n; ++i) {
        int r0 = uf.find(i);
        if (root_to_class[r0] < 0) {
            root_to_class[r0] = static_cast<int>(out.partition.classes.size());
            out.partition.classes.emplace_back();
        }
        int c = root_to_class[r0];
        out.partition.class_of[i] = c;
        out.partition.classes[c].push_back(i);
    }
    const int k = static_cast<int>(out.partition.classes.size());

    out.quotient.n = k;
    out.quotient.is_ultrametric = rho.is_ultrametric;
    out.quotient.values.assign(static_cast<std::size_t>(k) * k,
                               std::numeric_limits<double>::infinity());
    for (int c = 0; c < k; ++c) out.quotient.at(c, c) = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            int a = out.partition.class_of[i], b = out.partition.class_of[j];
            if (a == b) continue;
            out.quotient.at(a, b) = std::min(out.quotient.at(a, b), rho.at(i, j));
        }
    }
    out.quotient.labels.resize(k);
    for (int c = 0; c < k; ++c) {
        std::string s;
        for (std::size_t m = 0; m < out.partition.classes[c].size(); ++m) {
            if (m) s += "+";
            int p = out.partition.classes[c][m];
            s += rho.labels.empty() ? "p" + std::to_string(p) : rho.labels[p];
        }
        out.quotient.labels[c] = std::move(s);
    }

    out.min_interclass_distance = std::numeric_limits<double>::infinity();
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            if (a != b)
                out.min_interclass_distance = std::min(out.min_interclass_distance, out.quotient.at(a, b));
    if (k <= 1) out.min_interclass_distance = std::numeric_limits<double>::infinity();
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_value(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ShapeError("could not parse numeric value '" + s + "'");
    }
}

} // namespace

FiniteMetricSpace load_metric_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open metric CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ShapeError("metric CSV is empty: " + path);
    std::vector<std::string> labels = split_csv_line(line);
    const int n = static_cast<int>(labels.size());
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n) * n);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != n)
            throw ShapeError("metric CSV row width does not match header: " + path);
        for (const auto& c : cells) dist.push_back(parse_value(c));
    }
    if (dist.size() != static_cast<std::size_t>(n) * n)
        throw ShapeError("metric CSV is not a square table: " + path);
    return FiniteMetricSpace(std::move(labels), std::move(dist));
}

void save_metric_csv(const FiniteMetricSpace& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write metric CSV: " + path);
    for (int j = 0; j < d.size(); ++j) out << (j ? "," : "") << d.label(j);
    out << "\n";
    for (int i = 0; i < d.size(); ++i) {
        for (int j = 0; j < d.size(); ++j) out << (j ? "," : "") << format_double(d(i, j));
        out << "\n";
    }
}

void save_table_csv(const PseudoMetricTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write table CSV: " + path);
    for (int j = 0; j < t.n; ++j) {
        out << (j ? "," : "");
        out << (t.labels.empty() ? "p" + std::to_string(j) : t.labels[j]);
    }
    out << "\n";
    for (int i = 0; i < t.n; ++i) {
        for (int j = 0; j < t.n; ++j) out << (j ? "," : "") << format_double(t.at(i, j));
        out << "\n";
    }
}

FiniteMetricSpace load_metric_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open metric container: " + path);
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, "CSMS1", 5) != 0)
        throw ShapeError("bad magic in metric container: " + path);
    std::uint8_t nb[4];
    in.read(reinterpret_cast<char*>(nb), 4);
    if (!in) throw ShapeError("truncated metric container: " + path);
    std::uint32_t n = static_cast<std::uint32_t>(nb[0]) | (static_cast<std::uint32_t>(nb[1]) << 8) |
                      (static_cast<std::uint32_t>(nb[2]) << 16) | (static_cast<std::uint32_t>(nb[3]) << 24);
    std::vector<double> dist(static_cast<std::size_t>(n) * n);
    in.read(reinterpret_cast<char*>(dist.data()),
            static_cast<std::streamsize>(dist.size() * sizeof(double)));
    if (!in) throw ShapeError("truncated metric container: " + path);
    std::vector<std::string> labels(n);
    for (std::uint32_t i = 0; i < n; ++i) labels[i] = "p" + std::to_string(i);
    return FiniteMetricSpace(std::move(labels), std::move(dist));
}

void save_metric_binary(const FiniteMetricSpace& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write metric container: " + path);
    out.write("CSMS1", 5);
    std::uint32_t n = static_cast<std::uint32_t>(d.size());
    std::uint8_t nb[4] = {static_cast<std::uint8_t>(n & 0xff), static_cast<std::uint8_t>((n >> 8) & 0xff),
                          static_cast<std::uint8_t>((n >> 16) & 0xff),
                          static_cast<std::uint8_t>((n >> 24) & 0xff)};
    out.write(reinterpret_cast<char*>(nb), 4);
    out.write(reinterpret_cast<const char*>(d.table().data()),
              static_cast<std::streamsize>(d.table().size() * sizeof(double)));
}

} // namespace chainscope
