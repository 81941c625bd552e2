#include "moprox/cli.hpp"
#include "moprox/oracles.hpp"
#include "moprox/trace_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace moprox {

namespace fs = std::filesystem;

ConfigError::ConfigError(const std::string& source, int line, int column, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) + ":" + std::to_string(column) : "") + ": " +
                         message),
      line_(line),
      column_(column) {}

std::uint64_t RunConfig::seed() const {
    if (starts.seed) return *starts.seed;
    if (const char* env = std::getenv("MOPROX_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') return v;
    }
    return 0;
}

std::vector<Algorithm> parse_algorithm_list(const std::string& text) {
    std::vector<Algorithm> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(parse_algorithm(item));
    }
    if (out.empty()) throw ArgumentError("no algorithms given");
    return out;
}

namespace {

class YamlReader {
public:
    explicit YamlReader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
        const YAML::Mark mark = node.Mark();
        if (mark.line < 0) throw ConfigError(source_, 0, 0, message);
        throw ConfigError(source_, mark.line + 1, mark.column + 1, message);
    }

    void require_map(const YAML::Node& node, const std::string& key) const {
        if (!node.IsMap()) fail(node, key + ": expected a mapping");
    }

    void allow_keys(const YAML::Node& map, std::initializer_list<std::string_view> keys, const std::string& where) const {
        for (auto it = map.begin(); it != map.end(); ++it) {
            const std::string k = it->first.as<std::string>();
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
                fail(it->first, "unknown key '" + (where.empty() ? k : where + "." + k) + "'");
            }
        }
    }

    template <class T>
    T get(const YAML::Node& node, const std::string& key, const char* kind) const {
        if (!node.IsScalar()) fail(node, key + ": expected " + kind);
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            fail(node, key + ": expected " + kind + ", got '" + node.Scalar() + "'");
        }
    }

    double real(const YAML::Node& node, const std::string& key) const {
        const double v = get<double>(node, key, "a number");
        if (!std::isfinite(v)) fail(node, key + ": must be finite");
        return v;
    }
    double positive(const YAML::Node& node, const std::string& key) const {
        const double v = real(node, key);
        if (!(v > 0.0)) fail(node, key + ": must be positive");
        return v;
    }
    double nonnegative(const YAML::Node& node, const std::string& key) const {
        const double v = real(node, key);
        if (!(v >= 0.0)) fail(node, key + ": must be nonnegative");
        return v;
    }
    int count(const YAML::Node& node, const std::string& key, int minimum) const {
        const int v = get<int>(node, key, "an integer");
        if (v < minimum) fail(node, key + ": must be at least " + std::to_string(minimum));
        return v;
    }

private:
    std::string source_;
};

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
    const YamlReader rd(source);
    if (!root.IsMap()) throw ConfigError(source, 0, 0, "top level must be a mapping");
    rd.allow_keys(root, {"problem", "algorithms", "solver", "starts", "output_dir", "jobs", "timing"}, "");

    RunConfig cfg;
    const YAML::Node problem = root["problem"];
    if (!problem) throw ConfigError(source, 0, 0, "missing required key 'problem'");
    rd.require_map(problem, "problem");
    rd.allow_keys(problem,
                  {"name", "n", "image", "synthetic", "kernel_size", "blur_sigma", "noise_sigma", "lambda_reg"},
                  "problem");
    if (!problem["name"]) rd.fail(problem, "problem.name is required (problem1, problem2 or problem3)");
    const std::string name = rd.get<std::string>(problem["name"], "problem.name", "a string");
    if (name == "problem1") {
        cfg.problem.kind = ProblemKind::kProblem1;
    } else if (name == "problem2") {
        cfg.problem.kind = ProblemKind::kProblem2;
    } else if (name == "problem3") {
        cfg.problem.kind = ProblemKind::kProblem3;
    } else {
        rd.fail(problem["name"], "problem.name: expected problem1, problem2 or problem3, got '" + name + "'");
    }
    const bool p3 = cfg.problem.kind == ProblemKind::kProblem3;
    for (const char* key : {"image", "synthetic", "kernel_size", "blur_sigma", "noise_sigma", "lambda_reg"}) {
        if (!p3 && problem[key]) rd.fail(problem[key], std::string("problem.") + key + " applies to problem3 only");
    }
    if (problem["n"]) {
        if (p3) rd.fail(problem["n"], "problem.n does not apply to problem3 (n is the pixel count)");
        cfg.problem.n = rd.count(problem["n"], "problem.n", 1);
    }
    if (problem["image"] && problem["synthetic"]) rd.fail(problem["synthetic"], "give either problem.image or problem.synthetic");
    if (problem["image"]) cfg.problem.image_path = rd.get<std::string>(problem["image"], "problem.image", "a path");
    if (const YAML::Node syn = problem["synthetic"]) {
        rd.require_map(syn, "problem.synthetic");
        rd.allow_keys(syn, {"size"}, "problem.synthetic");
        if (syn["size"]) {
            cfg.problem.synthetic_size = rd.count(syn["size"], "problem.synthetic.size", 2);
            if (!is_power_of_two(cfg.problem.synthetic_size)) rd.fail(syn["size"], "problem.synthetic.size must be a power of two");
        }
    }
    if (problem["kernel_size"]) {
        cfg.problem.kernel_size = rd.count(problem["kernel_size"], "problem.kernel_size", 1);
        if (cfg.problem.kernel_size % 2 == 0) rd.fail(problem["kernel_size"], "problem.kernel_size must be odd");
    }
    if (problem["blur_sigma"]) cfg.problem.blur_sigma = rd.positive(problem["blur_sigma"], "problem.blur_sigma");
    if (problem["noise_sigma"]) cfg.problem.noise_sigma = rd.nonnegative(problem["noise_sigma"], "problem.noise_sigma");
    if (problem["lambda_reg"]) cfg.problem.lambda_reg = rd.nonnegative(problem["lambda_reg"], "problem.lambda_reg");

    if (const YAML::Node algs = root["algorithms"]) {
        if (!algs.IsSequence() || algs.size() == 0) rd.fail(algs, "algorithms: expected a non-empty list");
        cfg.algorithms.clear();
        for (const auto& a : algs) {
            try {
                cfg.algorithms.push_back(parse_algorithm(rd.get<std::string>(a, "algorithms", "a string")));
            } catch (const ArgumentError& e) {
                rd.fail(a, std::string("algorithms: ") + e.what());
            }
        }
    } else if (p3) {
        cfg.algorithms = {Algorithm::kFista, Algorithm::kWeakMfista};
    }

    if (const YAML::Node solver = root["solver"]) {
        rd.require_map(solver, "solver");
        rd.allow_keys(solver, {"ell", "epsilon", "max_outer", "subproblem_tol", "kkt_tol", "max_inner", "ell_safeguard"},
                      "solver");
        if (const YAML::Node ell = solver["ell"]) {
            if (ell.IsScalar() && ell.Scalar() == "estimate") {
                cfg.estimate_ell = true;
            } else {
                cfg.solver.ell = rd.positive(ell, "solver.ell");
                cfg.estimate_ell = false;
            }
        }
        if (solver["epsilon"]) cfg.solver.epsilon = rd.positive(solver["epsilon"], "solver.epsilon");
        if (solver["max_outer"]) cfg.solver.max_outer = rd.count(solver["max_outer"], "solver.max_outer", 1);
        if (solver["subproblem_tol"]) cfg.solver.subproblem_tol = rd.positive(solver["subproblem_tol"], "solver.subproblem_tol");
        if (solver["kkt_tol"]) cfg.solver.kkt_tol = rd.positive(solver["kkt_tol"], "solver.kkt_tol");
        if (solver["max_inner"]) cfg.solver.max_inner = rd.count(solver["max_inner"], "solver.max_inner", 1);
        if (solver["ell_safeguard"]) cfg.solver.ell_safeguard = rd.get<bool>(solver["ell_safeguard"], "solver.ell_safeguard", "true or false");
    }

    const bool p2 = cfg.problem.kind == ProblemKind::kProblem2;
    cfg.starts.box_lower = p2 ? 0.0 : -2.0;
    if (const YAML::Node starts = root["starts"]) {
        rd.require_map(starts, "starts");
        rd.allow_keys(starts, {"count", "box_lower", "box_upper", "seed"}, "starts");
        if (starts["count"]) cfg.starts.count = rd.count(starts["count"], "starts.count", 1);
        if (starts["box_lower"]) cfg.starts.box_lower = rd.real(starts["box_lower"], "starts.box_lower");
        if (starts["box_upper"]) cfg.starts.box_upper = rd.real(starts["box_upper"], "starts.box_upper");
        if (starts["seed"]) cfg.starts.seed = rd.get<std::uint64_t>(starts["seed"], "starts.seed", "a nonnegative integer");
        if (!(cfg.starts.box_lower < cfg.starts.box_upper)) {
            rd.fail(starts["box_upper"] ? starts["box_upper"] : starts, "starts: box_lower must be below box_upper");
        }
        if (p2 && cfg.starts.box_lower < 0.0) {
            rd.fail(starts["box_lower"], "starts.box_lower: problem2 starts must lie in the nonnegative orthant");
        }
    }

    if (root["output_dir"]) cfg.output_dir = rd.get<std::string>(root["output_dir"], "output_dir", "a path");
    if (root["jobs"]) cfg.jobs = rd.count(root["jobs"], "jobs", 1);
    if (root["timing"]) cfg.record_timing = rd.get<bool>(root["timing"], "timing", "true or false");
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(path.string(), 0, 0, e.what());
    }
    return parse_config(text, path.string());
}

void apply_overrides(RunConfig& config, const Overrides& o) {
    if (o.epsilon) config.solver.epsilon = *o.epsilon;
    if (o.ell) {
        config.solver.ell = *o.ell;
        config.estimate_ell = false;
    }
    if (o.subproblem_tol) config.solver.subproblem_tol = *o.subproblem_tol;
    if (o.seed) config.starts.seed = *o.seed;
    if (o.algorithms) config.algorithms = *o.algorithms;
    if (o.jobs) config.jobs = *o.jobs;
    if (o.output_dir) config.output_dir = *o.output_dir;
    if (o.no_timing) config.record_timing = false;
    try {
        config.solver.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError("command line", 0, 0, e.what());
    }
    if (config.jobs < 1) throw ConfigError("command line", 0, 0, "--jobs must be at least 1");
}

BuiltProblem build_problem(const RunConfig& config) {
    const ProblemSpec& p = config.problem;
    const std::uint64_t seed = config.seed();
    if (p.kind == ProblemKind::kProblem3) {
        GrayImage original = p.image_path.empty() ? synthetic_image(p.synthetic_size) : read_pgm(p.image_path);
        const auto blur = make_blur(original.width, original.height, p.kernel_size, p.blur_sigma);
        GrayImage observed = make_observed(original, blur, p.noise_sigma, seed);
        Vector x0 = haar_forward(observed);
        Region region{x0.array() - 1.0, x0.array() + 1.0};
        return BuiltProblem{make_problem3(observed, p.lambda_reg, blur), "problem3", {x0}, std::move(region),
                            std::move(original), std::move(observed)};
    }
    auto problem = p.kind == ProblemKind::kProblem1 ? make_problem1(p.n) : make_problem2(p.n);
    const auto& s = config.starts;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(s.box_lower, s.box_upper);
    std::vector<Vector> starts;
    for (int i = 0; i < s.count; ++i) {
        Vector x(p.n);
        for (int j = 0; j < p.n; ++j) x[j] = unif(rng);
        starts.push_back(std::move(x));
    }
    return BuiltProblem{std::move(problem), p.kind == ProblemKind::kProblem1 ? "problem1" : "problem2",
                        std::move(starts), Region::cube(p.n, s.box_lower, s.box_upper), {}, {}};
}

namespace {

SolverConfig effective_solver(const RunConfig& config, const BuiltProblem& built) {
    SolverConfig solver = config.solver;
    solver.seed = config.seed();
    solver.storage = VectorStorage::kNever;
    if (config.estimate_ell) {
        EllEstimateOptions opt;
        opt.seed = config.seed();
        solver.ell = estimate_ell(built.problem, built.region, opt);
    }
    return solver;
}

std::string run_name(Algorithm a, int start) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s-%03d", std::string(to_string(a)).c_str(), start);
    return buf;
}

struct RunSummary {
    Algorithm algorithm;
    int start;
    Vector final_F;
    int iterations;
    double wall_ms;
    TraceStatus status;
    bool feasible;
};

// Runs every (algorithm, start) pair, writing trace CSV + manifest as each finishes.
std::vector<RunSummary> run_all(const RunConfig& config, const BuiltProblem& built, const SolverConfig& solver,
                                const fs::path& trace_dir, std::vector<SolverTrace>* keep) {
    struct Task {
        Algorithm algorithm;
        int start;
    };
    std::vector<Task> tasks;
    for (Algorithm a : config.algorithms) {
        for (int s = 0; s < static_cast<int>(built.starts.size()); ++s) tasks.push_back({a, s});
    }
    std::vector<RunSummary> results(tasks.size());
    if (keep) keep->resize(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const Task& task = tasks[i];
                SolverTrace trace = run(built.problem, task.algorithm, built.starts[task.start], solver);
                const std::string name = run_name(task.algorithm, task.start);
                write_file(trace_dir / (name + ".csv"), trace_csv(trace));
                const RunManifest manifest = make_manifest(trace, built.name, task.start, solver.epsilon,
                                                           config.record_timing, name + ".csv");
                write_file(trace_dir / (name + ".json"), manifest_json(manifest));
                results[i] = {task.algorithm, task.start, trace.final_F, trace.iterations(), manifest.wall_ms,
                              trace.status, trace.final_F.allFinite()};
                if (keep) (*keep)[i] = std::move(trace);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = tasks.size();
                return;
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(tasks.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return results;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1 denominator).
double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

int cmd_run(const RunConfig& config, std::ostream& log) {
    const BuiltProblem built = build_problem(config);
    const SolverConfig solver = effective_solver(config, built);
    const fs::path trace_dir = config.output_dir / "traces";
    fs::create_directories(trace_dir);
    log << built.name << ": n=" << built.problem.dimension() << " m=" << built.problem.num_objectives()
        << " ell=" << format_double(solver.ell) << " starts=" << built.starts.size() << "\n";

    const auto results = run_all(config, built, solver, trace_dir, nullptr);
    const std::size_t m = built.problem.num_objectives();

    std::ostringstream pareto;
    pareto << "algorithm,start";
    for (std::size_t i = 1; i <= m; ++i) pareto << ",F_" << i;
    pareto << ",iterations,wall_ms,status,feasible\n";
    for (const auto& r : results) {
        pareto << to_string(r.algorithm) << ',' << r.start;
        for (std::size_t i = 0; i < m; ++i) pareto << ',' << format_double(r.final_F[static_cast<Eigen::Index>(i)]);
        pareto << ',' << r.iterations << ',' << format_double(r.wall_ms) << ',' << to_string(r.status) << ','
               << (r.feasible ? 1 : 0) << '\n';
    }
    write_file(config.output_dir / "pareto.csv", pareto.str());

    std::ostringstream summary;
    summary << "algorithm,runs,converged,mean_iterations,std_iterations,mean_wall_ms,std_wall_ms\n";
    bool any_converged = false;
    for (Algorithm a : config.algorithms) {
        std::vector<double> its, ms;
        int converged = 0;
        for (const auto& r : results) {
            if (r.algorithm != a) continue;
            its.push_back(r.iterations);
            ms.push_back(r.wall_ms);
            converged += r.status == TraceStatus::kConverged;
        }
        any_converged = any_converged || converged > 0;
        summary << to_string(a) << ',' << its.size() << ',' << converged << ',' << format_double(mean(its)) << ','
                << format_double(stddev(its)) << ',' << format_double(mean(ms)) << ',' << format_double(stddev(ms))
                << '\n';
        char line[160];
        std::snprintf(line, sizeof line, "  %-14s iterations %10.2f +- %-9.2f time %9.2f ms  converged %d/%zu\n",
                      std::string(to_string(a)).c_str(), mean(its), stddev(its), mean(ms), converged, its.size());
        log << line;
    }
    write_file(config.output_dir / "summary.csv", summary.str());
    log << "wrote " << results.size() << " traces to " << trace_dir.string() << "\n";
    return any_converged ? 0 : 1;
}

int cmd_audit(const fs::path& trace_dir, std::ostream& log) {
    if (!fs::is_directory(trace_dir)) {
        log << "audit: " << trace_dir.string() << " is not a directory\n";
        return 2;
    }
    std::vector<fs::path> manifests;
    for (const auto& entry : fs::directory_iterator(trace_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") manifests.push_back(entry.path());
    }
    std::sort(manifests.begin(), manifests.end());
    if (manifests.empty()) {
        log << "audit: no run manifests in " << trace_dir.string() << "\n";
        return 2;
    }
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(trace_dir)) {
        if (entry.path().extension() == ".csv") {
            auto manifest = entry.path();
            if (!fs::exists(manifest.replace_extension(".json"))) {
                log << "audit: " << entry.path().filename().string() << " has no manifest\n";
                return 2;
            }
        }
    }

    bool all_pass = true;
    for (const auto& path : manifests) {
        SolverTrace trace;
        try {
            const RunManifest manifest = parse_manifest(read_file(path));
            trace = read_trace(read_file(trace_dir / manifest.trace_file), manifest);
        } catch (const std::exception& e) {
            log << "audit: " << path.filename().string() << ": " << e.what() << "\n";
            return 2;
        }
        const AuditReport report = audit_trace(trace, trace.algorithm);
        all_pass = all_pass && report.overall;
        log << path.stem().string() << " (" << to_string(trace.algorithm) << "): " << (report.overall ? "PASS" : "FAIL")
            << "\n"
            << report.table();
    }
    log << (all_pass ? "all audits passed" : "audit failures found") << " (" << manifests.size() << " runs)\n";
    return all_pass ? 0 : 1;
}

int cmd_deblur(const RunConfig& config, std::ostream& log) {
    if (config.problem.kind != ProblemKind::kProblem3) {
        throw ConfigError("config", 0, 0, "deblur needs problem.name: problem3");
    }
    const BuiltProblem built = build_problem(config);
    const SolverConfig solver = effective_solver(config, built);
    const fs::path trace_dir = config.output_dir / "traces";
    fs::create_directories(trace_dir);
    const int w = built.observed.width, h = built.observed.height;
    write_pgm(built.original, config.output_dir / "original.pgm");
    write_pgm(built.observed, config.output_dir / "observed.pgm");
    log << "problem3: " << w << "x" << h << " ell=" << format_double(solver.ell) << "\n";

    std::vector<SolverTrace> traces;
    run_all(config, built, solver, trace_dir, &traces);

    std::ostringstream values;
    values << "algorithm,k,F_1,F_2\n";
    std::vector<PlotSeries> series;
    for (const auto& trace : traces) {
        const std::string alg(to_string(trace.algorithm));
        write_pgm(haar_inverse(trace.final_x, w, h), config.output_dir / ("restored-" + alg + ".pgm"));

        std::vector<Vector> F{trace.F_x0};
        for (const auto& r : trace.records) {
            if (!r.terminal) F.push_back(r.F_x);
        }
        for (std::size_t k = 0; k < F.size(); ++k) {
            values << alg << ',' << k << ',' << format_double(F[k][0]) << ',' << format_double(F[k][1]) << '\n';
        }
        // x* is the run's own final iterate.
        for (Eigen::Index i = 0; i < 2; ++i) {
            PlotSeries s;
            s.label = alg + " F_" + std::to_string(i + 1);
            for (std::size_t k = 0; k < F.size(); ++k) {
                const double gap = std::abs(F[k][i] - trace.final_F[i]);
                if (gap > 0.0) {
                    s.xs.push_back(static_cast<double>(k));
                    s.ys.push_back(std::log10(gap));
                }
            }
            series.push_back(std::move(s));
        }
        char line[200];
        std::snprintf(line, sizeof line, "  %-14s iterations %6d  %-10s F = (%.10g, %.10g) from (%.10g, %.10g)\n",
                      alg.c_str(), trace.iterations(), std::string(to_string(trace.status)).c_str(), trace.final_F[0],
                      trace.final_F[1], trace.F_x0[0], trace.F_x0[1]);
        log << line;
    }
    write_file(config.output_dir / "values.csv", values.str());
    write_file(config.output_dir / "values.svg",
               render_svg_plot(series, "Problem 3 objective gaps", "iteration k", "log10 |F_i(x^k) - F_i(x*)|"));
    log << "wrote images, traces, values.csv and values.svg to " << config.output_dir.string() << "\n";
    return 0;
}

}  // namespace moprox
