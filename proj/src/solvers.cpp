#include "moprox/solvers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <string>

namespace moprox {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::kPgm: return "pgm";
        case Algorithm::kFista: return "fista";
        case Algorithm::kWeakMfista: return "weak-mfista";
        case Algorithm::kStrongMfista: return "strong-mfista";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
    const std::string s = lower(name);
    if (s == "pgm") return Algorithm::kPgm;
    if (s == "fista") return Algorithm::kFista;
    if (s == "weak-mfista" || s == "mfista") return Algorithm::kWeakMfista;
    if (s == "strong-mfista") return Algorithm::kStrongMfista;
    throw ArgumentError("unknown algorithm '" + std::string(name) + "'");
}

bool is_mfista(Algorithm algorithm) {
    return algorithm == Algorithm::kWeakMfista || algorithm == Algorithm::kStrongMfista;
}

MonotonicityMode monotonicity_mode(Algorithm algorithm) {
    return algorithm == Algorithm::kStrongMfista ? MonotonicityMode::kStrong : MonotonicityMode::kWeak;
}

std::string_view to_string(TraceStatus status) {
    switch (status) {
        case TraceStatus::kConverged: return "converged";
        case TraceStatus::kMaxIter: return "max_iter";
        case TraceStatus::kSubproblemFailure: return "subproblem_failure";
    }
    return "unknown";
}

TraceStatus parse_status(std::string_view name) {
    const std::string s = lower(name);
    if (s == "converged") return TraceStatus::kConverged;
    if (s == "max_iter") return TraceStatus::kMaxIter;
    if (s == "subproblem_failure") return TraceStatus::kSubproblemFailure;
    throw ArgumentError("unknown status '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
    if (!(ell > 0.0) || !std::isfinite(ell)) throw ArgumentError("solver: ell must be positive and finite");
    if (!(epsilon > 0.0)) throw ArgumentError("solver: epsilon must be positive");
    if (max_outer < 1) throw ArgumentError("solver: max_outer must be at least 1");
    if (!(subproblem_tol > 0.0)) throw ArgumentError("solver: subproblem_tol must be positive");
    if (max_inner < 1) throw ArgumentError("solver: max_inner must be at least 1");
}

int SolverTrace::iterations() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [](const IterationRecord& r) { return !r.terminal; }));
}

double t_update(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

bool monotone_accept(const Vector& F_prev, const Vector& F_cand, MonotonicityMode mode) {
    if (F_prev.size() != F_cand.size() || F_prev.size() == 0) {
        throw ArgumentError("monotone_accept: vectors must be nonempty and of equal size");
    }
    if (!F_prev.allFinite() || !F_cand.allFinite()) throw ArgumentError("monotone_accept: non-finite objective values");
    const Vector decrease = F_prev - F_cand;
    return mode == MonotonicityMode::kWeak ? decrease.maxCoeff() >= 0.0 : decrease.minCoeff() >= 0.0;
}

double descent_violation(const SubproblemInstance& instance, const Vector& z, double ell) {
    const Vector d = z - instance.y();
    const Vector fz = instance.problem().evaluate_smooth(z);
    const Vector model = instance.smooth_at_y() + instance.gradients() * d;
    const double quad = 0.5 * ell * d.squaredNorm();
    double worst = -kInf;
    for (Eigen::Index i = 0; i < fz.size(); ++i) {
        const double slack = 1e-12 * (1.0 + std::abs(instance.smooth_at_y()[i]));
        worst = std::max(worst, fz[i] - model[i] - quad - slack);
    }
    return worst;
}

SolverTrace run(const MultiObjectiveProblem& problem, Algorithm algorithm, const Vector& x0, const SolverConfig& config) {
    config.validate();
    require_dimension(x0.size(), problem.dimension(), "run x0");
    const EvaluationResult f0 = problem.evaluate_objectives(x0);
    if (!f0.all_finite()) throw ArgumentError("run: the initial point must lie in dom F");

    const bool keep_vectors = config.storage == VectorStorage::kAlways ||
                              (config.storage == VectorStorage::kAuto && problem.dimension() <= 64);
    const auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };

    SolverTrace trace;
    trace.algorithm = algorithm;
    trace.x0 = x0;
    trace.F_x0 = f0.values;
    trace.ell_initial = config.ell;

    SubproblemOptions sub_options;
    sub_options.tol = config.subproblem_tol;
    sub_options.kkt_tol = config.kkt_tol;
    sub_options.max_inner = config.max_inner;

    double ell = config.ell;
    Vector x_prev = x0;
    Vector F_prev = f0.values;
    Vector y = x0;
    double t = 1.0;
    trace.status = TraceStatus::kMaxIter;

    for (int k = 1; k <= config.max_outer; ++k) {
        if (algorithm == Algorithm::kPgm) y = x_prev;

        SubproblemSolution sol;
        for (;;) {
            SubproblemInstance instance(problem, ell, F_prev, y, 0);
            sol = instance.solve(sub_options);
            if (!config.ell_safeguard || !sol.converged || descent_violation(instance, sol.z, ell) <= 0.0 ||
                ell > 1e300) {
                break;
            }
            ell *= 2.0;
            ++trace.safeguard_triggers;
        }
        sub_options.warm_start = sol.lambda;

        IterationRecord rec;
        rec.k = k;
        rec.t = t;
        rec.ell = ell;
        rec.stationarity = (sol.z - y).norm();
        rec.inner_iterations = sol.inner_iterations;
        rec.duality_gap = sol.duality_gap;
        rec.kkt_residual = sol.kkt_residual;
        const EvaluationResult fz = problem.evaluate_objectives(sol.z);
        rec.F_z = fz.values;

        const bool stop = !sol.converged || rec.stationarity < config.epsilon;
        bool accepted = true;
        if (!stop && is_mfista(algorithm)) {
            accepted = fz.all_finite() && monotone_accept(F_prev, fz.values, monotonicity_mode(algorithm));
        }
        rec.terminal = stop;
        rec.accepted = !stop && accepted;

        const Vector x = rec.accepted ? sol.z : x_prev;
        rec.F_x = rec.accepted ? fz.values : F_prev;
        if (keep_vectors) {
            rec.x = x;
            rec.z = sol.z;
            rec.y = y;
        }
        rec.wall_seconds = elapsed();
        trace.records.push_back(std::move(rec));

        if (!sol.converged) {
            trace.status = TraceStatus::kSubproblemFailure;
            break;
        }
        if (stop) {
            trace.status = TraceStatus::kConverged;
            break;
        }
        if (!fz.all_finite() && !is_mfista(algorithm)) {
            // The next subproblem would need F(x^k) finite.
            x_prev = x;
            F_prev = fz.values;
            trace.status = TraceStatus::kSubproblemFailure;
            break;
        }

        const double t_next = t_update(t);
        switch (algorithm) {
            case Algorithm::kPgm:
                y = x;
                break;
            case Algorithm::kFista:
                y = x + ((t - 1.0) / t_next) * (x - x_prev);
                break;
            case Algorithm::kWeakMfista:
            case Algorithm::kStrongMfista:
                y = x + (t / t_next) * (sol.z - x) + ((t - 1.0) / t_next) * (x - x_prev);
                break;
        }
        if (algorithm != Algorithm::kPgm) t = t_next;
        F_prev = trace.records.back().F_x;
        x_prev = x;
    }

    trace.final_x = x_prev;
    trace.final_F = F_prev;
    trace.ell_final = ell;
    trace.wall_seconds = elapsed();
    return trace;
}

std::vector<double> sigma_diagnostic(const SolverTrace& trace, const Vector& F_ref) {
    if (!F_ref.allFinite()) throw ArgumentError("sigma_diagnostic: F(z_ref) must be finite");
    require_dimension(F_ref.size(), trace.F_x0.size(), "sigma_diagnostic");
    std::vector<double> sigma;
    sigma.reserve(trace.records.size() + 1);
    sigma.push_back((trace.F_x0 - F_ref).minCoeff());
    for (const auto& rec : trace.records) {
        if (!rec.terminal) sigma.push_back((rec.F_x - F_ref).minCoeff());
    }
    return sigma;
}

std::vector<double> sigma_diagnostic(const SolverTrace& trace, const Vector& z_ref,
                                     const MultiObjectiveProblem& problem) {
    const EvaluationResult f = problem.evaluate_objectives(z_ref);
    if (!f.all_finite()) throw ArgumentError("sigma_diagnostic: F(z_ref) must be finite");
    return sigma_diagnostic(trace, f.values);
}

}  // namespace moprox
