// chainscope: barrier functions, chain relations, product-system
// pseudo-metrics, and mixing classification for finite closed relations and
// grid discretizations of circle systems.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "chainscope/barrier.hpp"
#include "chainscope/discretization.hpp"
#include "chainscope/metric_space.hpp"
#include "chainscope/parallel.hpp"
#include "chainscope/product_mixing.hpp"
#include "chainscope/relation.hpp"
#include "chainscope/transitivity.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace chainscope;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonFlags {
    std::string system;      // rotation | doubling
    std::string input;       // spec JSON or relation JSON
    int n = 0;
    std::string alpha = "golden";
    std::string metric = "arc";
    std::string scheme = "nearest";
    std::string metric_file;
    std::string jump_graph = "auto"; // auto | complete | knn:<k>
    double numerical_zero = -1.0;    // <0: resolve by instance kind
    int threads = default_threads();
    std::string out_dir = ".";
};

std::size_t size_cap_from_env() {
    const char* env = std::getenv("CHAINSCOPE_SIZE_CAP");
    if (!env) return kDefaultProductNodeCap;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || v == 0) throw ValidationError("CHAINSCOPE_SIZE_CAP must be a positive integer");
    return static_cast<std::size_t>(v);
}

JumpGraphSpec parse_jump(const std::string& text) {
    JumpGraphSpec spec;
    if (text == "auto") {
        spec.kind = JumpGraphSpec::Kind::auto_select;
    } else if (text == "complete") {
        spec.kind = JumpGraphSpec::Kind::complete;
    } else if (text.rfind("knn", 0) == 0) {
        spec.kind = JumpGraphSpec::Kind::knn;
        if (text.size() > 3) {
            if (text[3] != ':') throw ValidationError("jump graph syntax: knn:<k>");
            spec.k = std::stoi(text.substr(4));
            if (spec.k < 1) throw ValidationError("knn jump graph needs k >= 1");
        }
    } else {
        throw ValidationError("unknown jump graph: " + text);
    }
    return spec;
}

double parse_alpha(const std::string& text) {
    if (text == "golden") return kGoldenAlpha;
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        throw ValidationError("alpha must be a number or 'golden'");
    }
}

bool looks_like_relation_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ShapeError("bad JSON in " + path + ": " + e.what());
    }
    return j.contains("edges");
}

SystemSpec build_spec(const CommonFlags& flags) {
    SystemSpec spec;
    if (!flags.input.empty()) {
        if (looks_like_relation_json(flags.input)) {
            spec.kind = SystemKind::finite_relation;
            spec.relation_path = flags.input;
            if (!flags.metric_file.empty()) {
                spec.metric = CircleMetricKind::table;
                spec.metric_path = flags.metric_file;
            } else if (flags.metric == "discrete" || flags.metric == "arc" ||
                       flags.metric == "sqrt_distorted") {
                spec.metric = flags.metric == "discrete" ? CircleMetricKind::discrete
                              : flags.metric == "arc"    ? CircleMetricKind::arc
                                                         : CircleMetricKind::sqrt_distorted;
            } else {
                throw ValidationError("unknown metric kind: " + flags.metric);
            }
            return spec;
        }
        std::ifstream in(flags.input);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return parse_system_spec(text);
    }
    if (flags.system == "rotation")
        spec.kind = SystemKind::circle_rotation;
    else if (flags.system == "doubling")
        spec.kind = SystemKind::doubling;
    else
        throw ValidationError("pass --system rotation|doubling or --input <file>");
    spec.n = flags.n;
    spec.alpha = parse_alpha(flags.alpha);
    if (flags.metric == "arc")
        spec.metric = CircleMetricKind::arc;
    else if (flags.metric == "sqrt_distorted")
        spec.metric = CircleMetricKind::sqrt_distorted;
    else if (flags.metric == "discrete")
        spec.metric = CircleMetricKind::discrete;
    else
        throw ValidationError("unknown metric kind: " + flags.metric);
    if (flags.scheme == "nearest") {
        spec.outer = false;
    } else if (flags.scheme.rfind("outer", 0) == 0) {
        spec.outer = true;
        if (flags.scheme.size() > 5 && flags.scheme[5] == ':')
            spec.lipschitz_bound = std::stod(flags.scheme.substr(6));
        else
            spec.lipschitz_bound = spec.kind == SystemKind::doubling ? 2.0 : 1.0;
    } else {
        throw ValidationError("scheme must be nearest or outer[:L]");
    }
    return spec;
}

bool spec_is_discretized(const SystemSpec& spec) {
    return spec.kind != SystemKind::finite_relation;
}

ordered_json spec_json(const SystemSpec& spec) {
    return ordered_json::parse(system_spec_to_json(spec));
}

ordered_json relation_json(const FiniteRelation& f) {
    return ordered_json::parse(relation_to_json_string(f));
}

ordered_json table_json(const PseudoMetricTable& t) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < t.n; ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < t.n; ++j) {
            double v = t.at(i, j);
            if (std::isinf(v))
                row.push_back("inf");
            else
                row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json classification_json(const Classification& cls) {
    ordered_json j;
    j["verdicts"] = {{"chain_transitive", to_string(cls.chain_transitive)},
                     {"chain_mixing", to_string(cls.chain_mixing)},
                     {"strong_chain_transitive", to_string(cls.strong_chain_transitive)},
                     {"strong_chain_mixing", to_string(cls.strong_chain_mixing)}};
    j["period"] = cls.period;
    j["numerical_zero"] = cls.numerical_zero;
    ordered_json rows = ordered_json::array();
    for (const auto& ev : cls.evidence) {
        ordered_json row;
        row["scale"] = ev.scale;
        row["chain_transitive_at_scale"] = ev.ct_at_scale;
        row["scc_count"] = ev.scc_count;
        row["period"] = ev.period;
        row["theta_max"] = ev.theta_max;
        row["rho_max"] = ev.rho_max;
        row["ell_max"] = ev.ell_max;
        row["ell_is_bound"] = ev.ell_is_bound;
        rows.push_back(std::move(row));
    }
    j["evidence"] = std::move(rows);
    return j;
}

void write_evidence_csv(const Classification& cls, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write evidence CSV: " + path);
    out << "scale,theta_max,rho_max,period,scc_count\n";
    char buf[200];
    for (const auto& ev : cls.evidence) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d,%d", ev.scale, ev.theta_max,
                      ev.rho_max, ev.period, ev.scc_count);
        out << buf << "\n";
    }
}

ordered_json quotient_json(const QuotientSystem& q) {
    ordered_json j;
    j["factor_kind"] = to_string(q.factor_kind);
    ordered_json classes = ordered_json::array();
    for (const auto& cls : q.partition.classes) classes.push_back(cls);
    j["partition"] = std::move(classes);
    j["quotient_distances"] = table_json(q.quotient_distances);
    j["induced_relation"] = relation_json(q.induced_relation);
    j["isometry_defect"] = q.isometry_defect;
    if (std::isfinite(q.min_interclass_distance))
        j["min_interclass_distance"] = q.min_interclass_distance;
    else
        j["min_interclass_distance"] = "inf";
    return j;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
    if (text.empty() || text.back() != '\n') out << "\n";
}

struct Manifest {
    ordered_json config;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void emit(const std::string& command, const fs::path& out_dir) const {
        ordered_json m;
        m["command"] = command;
        m["version"] = kVersion;
        m["config"] = config;
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start)
                        .count();
        m["timings_ms"] = {{"total", ms}};
        write_file(out_dir / "manifest.json", m.dump(2));
    }
};

std::pair<FiniteMetricSpace, FiniteRelation> realize(const SystemSpec& spec) { return discretize(spec); }

double resolve_numerical_zero(const CommonFlags& flags, const SystemSpec& spec, double h) {
    if (flags.numerical_zero >= 0) return flags.numerical_zero;
    return spec_is_discretized(spec) ? 3.0 * h : 0.0;
}

int run_classify(const CommonFlags& flags, const std::vector<double>& schedule_flag,
                 const std::vector<int>& n_list) {
    Manifest manifest;
    fs::path out_dir(flags.out_dir);
    fs::create_directories(out_dir);
    SystemSpec spec = build_spec(flags);

    Classification cls;
    if (!n_list.empty()) {
        if (!spec_is_discretized(spec))
            throw ValidationError("classify --N-list applies to parametric systems");
        StudyOptions sopts;
        sopts.jump = parse_jump(flags.jump_graph);
        sopts.threads = flags.threads;
        sopts.node_cap = size_cap_from_env();
        cls = classify_system(spec, n_list, sopts);
        manifest.config = {{"spec", spec_json(spec)},
                           {"n_list", n_list},
                           {"jump_graph", flags.jump_graph},
                           {"threads", flags.threads},
                           {"numerical_zero", cls.numerical_zero},
                           {"size_cap", size_cap_from_env()}};
    } else {
        auto [d, f] = realize(spec);
        double h = 1.0 / d.size();
        ClassifyOptions copts;
        copts.numerical_zero = resolve_numerical_zero(flags, spec, h);
        copts.jump = parse_jump(flags.jump_graph);
        copts.threads = flags.threads;
        copts.node_cap = size_cap_from_env();
        std::vector<double> schedule = schedule_flag;
        if (schedule.empty()) {
            if (spec_is_discretized(spec))
                schedule = {2.0 * h, 3.0 * h, 4.0 * h};
            else
                schedule = {0.5};
        }
        cls = classify(f, d, schedule, copts);
        manifest.config = {{"spec", spec_json(spec)},
                           {"schedule", schedule},
                           {"jump_graph", flags.jump_graph},
                           {"threads", flags.threads},
                           {"numerical_zero", copts.numerical_zero},
                           {"size_cap", size_cap_from_env()}};
    }
    write_file(out_dir / "classification.json", classification_json(cls).dump(2));
    write_evidence_csv(cls, (out_dir / "evidence.csv").string());
    manifest.emit("classify", out_dir);
    std::cout << "classification: CT=" << to_string(cls.chain_transitive)
              << " CM=" << to_string(cls.chain_mixing)
              << " SCT=" << to_string(cls.strong_chain_transitive)
              << " SCM=" << to_string(cls.strong_chain_mixing) << " period=" << cls.period << "\n";
    return 0;
}

int run_barrier(const CommonFlags& flags, const std::string& mode_flag,
                const std::string& policy_flag, const std::vector<int>& sources) {
    Manifest manifest;
    fs::path out_dir(flags.out_dir);
    fs::create_directories(out_dir);
    SystemSpec spec = build_spec(flags);
    auto [d, f] = realize(spec);

    BarrierMode mode;
    if (mode_flag == "bound")
        mode = BarrierMode::bound;
    else if (mode_flag == "length")
        mode = BarrierMode::length;
    else
        throw ValidationError("mode must be bound or length");
    JumpPolicy policy;
    if (policy_flag == "free-initial")
        policy = JumpPolicy::free_initial;
    else if (policy_flag == "anchored")
        policy = JumpPolicy::anchored;
    else
        throw ValidationError("policy must be free-initial or anchored");

    BarrierOptions opts;
    opts.sources = sources;
    opts.threads = flags.threads;
    opts.relation_id = flags.input.empty() ? flags.system : flags.input;
    opts.metric_id = flags.metric_file.empty() ? flags.metric : flags.metric_file;
    BarrierField field = barrier(f, d, mode, policy, opts);
    save_barrier_csv(field, d.labels(), (out_dir / "barrier.csv").string());
    manifest.config = {{"spec", spec_json(spec)}, {"mode", mode_flag},
                       {"policy", policy_flag},   {"sources", sources},
                       {"threads", flags.threads}, {"size_cap", size_cap_from_env()}};
    manifest.emit("barrier", out_dir);
    std::cout << "barrier table written (" << field.sources().size() << " sources, max finite "
              << field.finite_max() << ")\n";
    return 0;
}

int run_factor(const CommonFlags& flags, double epsilon, const std::string& via) {
    Manifest manifest;
    fs::path out_dir(flags.out_dir);
    fs::create_directories(out_dir);
    SystemSpec spec = build_spec(flags);
    auto [d, f] = realize(spec);
    double h = 1.0 / d.size();

    QuotientSystem q = [&]() {
        if (via == "epsilon") return cyclic_factor(f, d, epsilon);
        ProductOptions popts;
        popts.jump = parse_jump(flags.jump_graph);
        popts.node_cap = size_cap_from_env();
        popts.reverse_check = false;
        popts.second_base_check = false;
        double nz = resolve_numerical_zero(flags, spec, h);
        if (via == "theta") return quotient_factor(f, theta_pseudoultrametric(f, d, popts).table, nz);
        if (via == "rho") return quotient_factor(f, rho_pseudometric(f, d, popts).table, nz);
        throw ValidationError("--via must be epsilon, theta, or rho");
    }();

    write_file(out_dir / "quotient.json", quotient_json(q).dump(2));
    manifest.config = {{"spec", spec_json(spec)},
                       {"via", via},
                       {"epsilon", epsilon},
                       {"numerical_zero", resolve_numerical_zero(flags, spec, h)},
                       {"jump_graph", flags.jump_graph},
                       {"size_cap", size_cap_from_env()}};
    manifest.emit("factor", out_dir);
    std::cout << "factor: " << to_string(q.factor_kind) << " with "
              << q.partition.classes.size() << " classes\n";
    return 0;
}

int run_section4(const CommonFlags& flags) {
    Manifest manifest;
    fs::path out_dir(flags.out_dir);
    fs::create_directories(out_dir);
    if (flags.input.empty()) throw ValidationError("section4 needs --input <relation.json>");
    FiniteRelation f = load_relation_json(flags.input);
    Section4Report rep = section4_report(f);
    write_file(out_dir / "section4.json", section4_to_json_string(rep));
    manifest.config = {{"input", flags.input}};
    manifest.emit("section4", out_dir);
    std::cout << "section4: weak_mixing=" << (rep.weak_mixing ? "true" : "false") << "\n";
    return 0;
}

int run_study(const CommonFlags& flags, const std::vector<int>& n_list,
              const std::string& schedule_file) {
    Manifest manifest;
    fs::path out_dir(flags.out_dir);
    fs::create_directories(out_dir);
    SystemSpec spec = build_spec(flags);

    std::vector<int> ns = n_list;
    StudyOptions opts;
    opts.jump = parse_jump(flags.jump_graph);
    opts.threads = flags.threads;
    opts.node_cap = size_cap_from_env();
    if (!schedule_file.empty()) {
        std::ifstream in(schedule_file);
        if (!in) throw ValidationError("cannot open schedule: " + schedule_file);
        nlohmann::json j;
        in >> j;
        if (j.contains("N_list")) ns = j["N_list"].get<std::vector<int>>();
        if (j.contains("quantities"))
            opts.quantities = j["quantities"].get<std::vector<std::string>>();
    }
    if (ns.empty()) throw ValidationError("study needs --N-list or a schedule file");
    StudyResult study = refine_study(spec, ns, opts);
    save_study_csv(study, (out_dir / "study.csv").string());
    ordered_json trends;
    for (const auto& [k, v] : study.trend) trends[k] = v;
    manifest.config = {{"spec", spec_json(spec)}, {"n_list", ns},
                       {"jump_graph", flags.jump_graph}, {"threads", flags.threads},
                       {"trends", trends}, {"size_cap", size_cap_from_env()}};
    manifest.emit("study", out_dir);
    std::cout << "study rows: " << study.rows.size() << "\n";
    return 0;
}

int run_metrics(const CommonFlags& flags, bool binary) {
    Manifest manifest;
    fs::path out_dir(flags.out_dir);
    fs::create_directories(out_dir);
    CircleMetricKind kind;
    if (flags.metric == "arc")
        kind = CircleMetricKind::arc;
    else if (flags.metric == "sqrt_distorted")
        kind = CircleMetricKind::sqrt_distorted;
    else if (flags.metric == "discrete")
        kind = CircleMetricKind::discrete;
    else
        throw ValidationError("metrics: unknown metric kind " + flags.metric);
    FiniteMetricSpace d = circle_metric(kind, flags.n);
    save_metric_csv(d, (out_dir / "metric.csv").string());
    if (binary) save_metric_binary(d, (out_dir / "metric.bin").string());
    manifest.config = {{"metric", flags.metric}, {"N", flags.n}, {"binary", binary}};
    manifest.emit("metrics", out_dir);
    std::cout << "metric table written (" << d.size() << " points)\n";
    return 0;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--system", flags.system, "parametric system: rotation | doubling");
    cmd->add_option("--input", flags.input, "system spec JSON or relation JSON");
    cmd->add_option("--N", flags.n, "grid size");
    cmd->add_option("--alpha", flags.alpha, "rotation angle (number or 'golden')");
    cmd->add_option("--metric", flags.metric, "arc | sqrt_distorted | discrete");
    cmd->add_option("--metric-file", flags.metric_file, "distance table CSV for finite inputs");
    cmd->add_option("--scheme", flags.scheme, "nearest | outer[:L]");
    cmd->add_option("--jump-graph", flags.jump_graph, "auto | complete | knn:<k>");
    cmd->add_option("--numerical-zero", flags.numerical_zero, "zero-set threshold");
    cmd->add_option("--threads", flags.threads, "worker cap");
    cmd->add_option("--out", flags.out_dir, "output directory");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chainscope: chain relations, barrier functions, and mixing classification"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::vector<double> schedule;
    std::vector<int> n_list;
    std::vector<int> sources;
    std::string mode = "length", policy = "free-initial", via = "epsilon", schedule_file;
    double epsilon = 0.0;
    bool binary = false;

    CLI::App* classify_cmd = app.add_subcommand("classify", "transitivity/mixing verdicts");
    add_common(classify_cmd, flags);
    classify_cmd->add_option("--schedule", schedule, "epsilon schedule")->delimiter(',');
    classify_cmd->add_option("--N-list", n_list, "refinement sizes for trend verdicts")
        ->delimiter(',');

    CLI::App* barrier_cmd = app.add_subcommand("barrier", "barrier field CSV");
    add_common(barrier_cmd, flags);
    barrier_cmd->add_option("--mode", mode, "bound | length");
    barrier_cmd->add_option("--policy", policy, "free-initial | anchored");
    barrier_cmd->add_option("--sources", sources, "source points (default all)")->delimiter(',');

    CLI::App* factor_cmd = app.add_subcommand("factor", "cyclic or isometric factor");
    add_common(factor_cmd, flags);
    factor_cmd->add_option("--epsilon", epsilon, "scale for the cyclic factor");
    factor_cmd->add_option("--via", via, "epsilon | theta | rho");

    CLI::App* section4_cmd = app.add_subcommand("section4", "proximality / weak mixing report");
    add_common(section4_cmd, flags);

    CLI::App* study_cmd = app.add_subcommand("study", "refinement trend table");
    add_common(study_cmd, flags);
    study_cmd->add_option("--N-list", n_list, "refinement sizes")->delimiter(',');
    study_cmd->add_option("--schedule-file", schedule_file, "JSON {N_list, quantities}");

    CLI::App* metrics_cmd = app.add_subcommand("metrics", "emit a circle metric table");
    add_common(metrics_cmd, flags);
    metrics_cmd->add_flag("--binary", binary, "also write the binary container");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(classify_cmd)) return run_classify(flags, schedule, n_list);
        if (app.got_subcommand(barrier_cmd)) return run_barrier(flags, mode, policy, sources);
        if (app.got_subcommand(factor_cmd)) return run_factor(flags, epsilon, via);
        if (app.got_subcommand(section4_cmd)) return run_section4(flags);
        if (app.got_subcommand(study_cmd)) return run_study(flags, n_list, schedule_file);
        if (app.got_subcommand(metrics_cmd)) return run_metrics(flags, binary);
    } catch (const Error& e) {
        std::cerr << "chainscope-error: " << e.kind_name() << ": " << e.what() << "\n";
        switch (e.kind()) {
        case ErrorKind::validation: return 2;
        case ErrorKind::capacity: return 3;
        case ErrorKind::hypothesis: return 4;
        }
    } catch (const std::exception& e) {
        std::cerr << "chainscope-error: internal: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
