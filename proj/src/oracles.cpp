#include "moprox/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace moprox {

Vector finite_diff_gradient(const std::function<double(const Vector&)>& value, const Vector& x, double h) {
    if (!(h > 0.0)) throw ArgumentError("finite_diff_gradient: h must be positive");
    Vector g(x.size());
    Vector probe = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        probe[j] = x[j] + h;
        const double up = value(probe);
        probe[j] = x[j] - h;
        const double down = value(probe);
        probe[j] = x[j];
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw ArgumentError("finite_diff_gradient: non-finite evaluation at component " + std::to_string(j));
        }
        g[j] = (up - down) / (2.0 * h);
    }
    return g;
}

double gradient_relative_error(const SmoothOracle& oracle, const Vector& x) {
    const double h = 1e-6 * (1.0 + x.norm());
    const Vector analytic = oracle.gradient(x);
    const Vector numeric = finite_diff_gradient(oracle.value, x, h);
    return (analytic - numeric).norm() / std::max(1.0, analytic.norm());
}

namespace {

// Direct evaluation of the min-max objective and its Lagrangian at z; independent of
// SubproblemInstance.
struct DirectObjective {
    const MultiObjectiveProblem& problem;
    double ell;
    Vector y;
    Matrix grads;
    Vector constants;

    DirectObjective(const MultiObjectiveProblem& p, double ell_, const Vector& x, const Vector& y_)
        : problem(p), ell(ell_), y(y_) {
        grads = p.evaluate_gradients(y_);
        const EvaluationResult fx = p.evaluate_objectives(x);
        if (!fx.all_finite()) throw ArgumentError("brute_force_subproblem: F(x) must be finite");
        constants = p.evaluate_smooth(y_) - fx.values;
    }

    Vector z_of(const Vector& lambda) const {
        Vector v = y;
        for (Eigen::Index i = 0; i < lambda.size(); ++i) v -= (lambda[i] / ell) * grads.row(i).transpose();
        WeightedCombination comb{problem.nonsmooth_terms(),
                                 std::span<const double>(lambda.data(), static_cast<std::size_t>(lambda.size())),
                                 DomainPolicy::kAllTerms};
        return prox_weighted_combination(comb, 1.0 / ell, v);
    }

    Vector terms(const Vector& z) const {
        Vector phi(constants.size());
        const auto g = problem.evaluate_nonsmooth(z);
        for (Eigen::Index i = 0; i < phi.size(); ++i) {
            phi[i] = grads.row(i).dot(z - y) + g[static_cast<std::size_t>(i)].value() + constants[i];
        }
        return phi;
    }
};

void enumerate_grid(int m, const Vector& center, double window, double resolution,
                    const std::function<void(const Vector&)>& visit) {
    // Barycentric points lambda = center + (a, b) * resolution restricted to the
    // simplex; integer counters keep the coordinates drift-free.
    const long steps = std::lround(window / resolution);
    Vector lambda(m);
    if (m == 1) {
        lambda[0] = 1.0;
        visit(lambda);
        return;
    }
    for (long a = -steps; a <= steps; ++a) {
        const double l0 = center[0] + static_cast<double>(a) * resolution;
        if (l0 < -1e-15 || l0 > 1.0 + 1e-15) continue;
        if (m == 2) {
            lambda[0] = std::clamp(l0, 0.0, 1.0);
            lambda[1] = 1.0 - lambda[0];
            visit(lambda);
            continue;
        }
        for (long b = -steps; b <= steps; ++b) {
            const double l1 = center[1] + static_cast<double>(b) * resolution;
            if (l1 < -1e-15 || l0 + l1 > 1.0 + 1e-15) continue;
            lambda[0] = std::clamp(l0, 0.0, 1.0);
            lambda[1] = std::clamp(l1, 0.0, 1.0 - lambda[0]);
            lambda[2] = 1.0 - lambda[0] - lambda[1];
            visit(lambda);
        }
    }
}

}  // namespace

BruteForceResult brute_force_subproblem(const MultiObjectiveProblem& problem, double ell, const Vector& x,
                                        const Vector& y, double grid_resolution, int refinements) {
    const int m = static_cast<int>(problem.num_objectives());
    if (m > 3) throw UnsupportedError("brute_force_subproblem supports at most 3 objectives");
    if (!(grid_resolution > 0.0) || grid_resolution > 1.0) {
        throw ArgumentError("brute_force_subproblem: resolution must be in (0, 1]");
    }
    const DirectObjective obj(problem, ell, x, y);

    BruteForceResult best;
    best.primal_value = kInf;
    best.dual_value = -kInf;
    Vector dual_argmax;
    auto visit = [&](const Vector& lambda) {
        const Vector z = obj.z_of(lambda);
        const Vector phi = obj.terms(z);
        const double quad = 0.5 * ell * (z - y).squaredNorm();
        const double primal = phi.maxCoeff() + quad;
        const double dual = lambda.dot(phi) + quad;
        ++best.evaluated;
        // Ties resolve to the lexicographically first lambda (enumeration order).
        if (primal < best.primal_value) {
            best.primal_value = primal;
            best.z = z;
            best.lambda = lambda;
        }
        if (dual > best.dual_value) {
            best.dual_value = dual;
            dual_argmax = lambda;
        }
    };

    // Full grid {0, res, ..., 1}^m clipped to the simplex.
    const long n_steps = std::lround(1.0 / grid_resolution);
    const double res = 1.0 / static_cast<double>(n_steps);
    enumerate_grid(m, Vector::Zero(m), 1.0, res, visit);

    double level_res = res;
    for (int r = 0; r < refinements && m > 1; ++r) {
        // The dual is concave in lambda, so its grid argmax localizes lambda*;
        // the primal at z(lambda) need not.
        const Vector center = dual_argmax;
        const double window = 2.0 * level_res;
        level_res /= 100.0;
        enumerate_grid(m, center, window, level_res, visit);
    }
    return best;
}

const AuditCheck* AuditReport::find(std::string_view name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::string AuditReport::table() const {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-26s %14s %8s %10s  %s\n", "check", "worst", "at k", "tolerance", "result");
    out << line;
    for (const auto& c : checks) {
        std::snprintf(line, sizeof line, "%-26s %14.6e %8d %10.1e  %s\n", c.name.c_str(), c.worst_violation,
                      c.location, c.tolerance, c.pass ? "PASS" : "FAIL");
        out << line;
    }
    out << (overall ? "overall: PASS\n" : "overall: FAIL\n");
    return out.str();
}

namespace {

class CheckBuilder {
public:
    CheckBuilder(std::string name, double tol) {
        check_.name = std::move(name);
        check_.tolerance = tol;
        check_.worst_violation = -kInf;
    }

    void observe(double violation, int k) {
        if (std::isnan(violation)) violation = kInf;
        if (violation > check_.worst_violation) {
            check_.worst_violation = violation;
            check_.location = k;
        }
    }

    AuditCheck done() {
        if (check_.worst_violation == -kInf) check_.worst_violation = 0.0;
        check_.pass = check_.worst_violation <= check_.tolerance;
        return check_;
    }

private:
    AuditCheck check_;
};

std::vector<const IterationRecord*> completed(const SolverTrace& trace) {
    std::vector<const IterationRecord*> out;
    for (const auto& r : trace.records) {
        if (!r.terminal) out.push_back(&r);
    }
    return out;
}

}  // namespace

AuditCheck check_sigma_bound(const SolverTrace& trace, const SigmaReference& ref, double ell) {
    CheckBuilder b("sigma_bound", tolerance::kSigmaBound);
    const double bound = 0.5 * ell * ref.dist_sq;
    for (const auto* r : completed(trace)) {
        const double sigma = (r->F_x - ref.F_ref).minCoeff();
        b.observe((r->t * r->t * sigma - bound) / (1.0 + bound), r->k);
    }
    return b.done();
}

AuditReport audit_trace(const SolverTrace& trace, Algorithm algorithm,
                        const std::vector<SigmaReference>& extra_references) {
    AuditReport report;
    const auto recs = completed(trace);
    const bool accelerated = algorithm != Algorithm::kPgm;

    if (accelerated) {
        CheckBuilder lower("t_lower_bound", 0.0);
        CheckBuilder identity("t_identity", tolerance::kStepsizeIdentity);
        for (std::size_t j = 0; j < recs.size(); ++j) {
            const auto* r = recs[j];
            lower.observe(0.5 * (r->k + 1) - r->t, r->k);
            if (j + 1 < recs.size()) {
                const double tn = recs[j + 1]->t;
                identity.observe(std::abs(r->t * r->t - tn * tn + tn) / (tn * tn), r->k);
            }
        }
        report.checks.push_back(lower.done());
        report.checks.push_back(identity.done());
    }

    const bool strong = algorithm == Algorithm::kStrongMfista;
    const bool weak = algorithm == Algorithm::kWeakMfista;
    if (algorithm == Algorithm::kPgm || strong) {
        CheckBuilder mono(strong ? "strong_decrease" : "pgm_monotone", tolerance::kMonotone);
        Vector prev = trace.F_x0;
        for (const auto* r : recs) {
            mono.observe((r->F_x - prev).maxCoeff(), r->k);
            prev = r->F_x;
        }
        report.checks.push_back(mono.done());
    }
    if (weak) {
        CheckBuilder mono("weak_decrease", tolerance::kMonotone);
        CheckBuilder start("bounded_by_start", tolerance::kBoundedByStart);
        Vector prev = trace.F_x0;
        const Vector scale = (1.0 + trace.F_x0.array().abs()).matrix();
        for (const auto* r : recs) {
            mono.observe(-(prev - r->F_x).maxCoeff(), r->k);
            start.observe(((r->F_x - trace.F_x0).array() / scale.array()).maxCoeff(), r->k);
            prev = r->F_x;
        }
        report.checks.push_back(mono.done());
        report.checks.push_back(start.done());
    }
    if (weak) {
        // Only the weak test rejects exactly when z^k is worse in every objective.
        CheckBuilder cand("candidate_dominates", tolerance::kCandidateGap);
        for (const auto* r : recs) cand.observe(-(r->F_z - r->F_x).minCoeff(), r->k);
        report.checks.push_back(cand.done());
    }
    if (is_mfista(algorithm)) {
        CheckBuilder first("first_iterate_accepted", tolerance::kMonotone);
        if (!recs.empty()) {
            const auto* r = recs.front();
            const Vector scale = (1.0 + trace.F_x0.array().abs()).matrix();
            const double excess = ((r->F_z - trace.F_x0).array() / scale.array()).maxCoeff();
            first.observe(r->accepted ? excess : std::max(excess, 1.0), r->k);
        }
        report.checks.push_back(first.done());
    }

    if (weak && trace.x0.size() > 0 && trace.final_x.size() == trace.x0.size() && trace.final_F.allFinite()) {
        const double ell = trace.ell_final;
        const SigmaReference final_ref{trace.final_F, (trace.x0 - trace.final_x).squaredNorm()};
        AuditCheck sigma = check_sigma_bound(trace, final_ref, ell);
        sigma.name = "sigma_bound_final";
        report.checks.push_back(sigma);

        CheckBuilder rate("rate_surrogate", tolerance::kSigmaBound);
        const double bound = 2.0 * ell * final_ref.dist_sq;
        for (const auto* r : recs) {
            const double sigma_plus = std::max(0.0, (r->F_x - final_ref.F_ref).minCoeff());
            const double k1 = r->k + 1.0;
            rate.observe((sigma_plus * k1 * k1 - bound) / (1.0 + bound), r->k);
        }
        report.checks.push_back(rate.done());
    }
    if (weak) {
        for (std::size_t j = 0; j < extra_references.size(); ++j) {
            AuditCheck c = check_sigma_bound(trace, extra_references[j], trace.ell_final);
            c.name = "sigma_bound_ref" + std::to_string(j + 1);
            report.checks.push_back(c);
        }
    }

    report.overall = std::all_of(report.checks.begin(), report.checks.end(), [](const AuditCheck& c) { return c.pass; });
    return report;
}

SolverTrace scalar_mfista_reference(const ScalarComposite& problem, double ell, const Vector& x0, double epsilon,
                                    int max_outer) {
    auto F = [&](const Vector& x) { return problem.f(x) + problem.g(x); };
    SolverTrace trace;
    trace.algorithm = Algorithm::kWeakMfista;
    trace.x0 = x0;
    trace.F_x0 = Vector::Constant(1, F(x0));
    trace.ell_initial = trace.ell_final = ell;

    Vector x = x0;
    Vector y = x0;
    double fx = trace.F_x0[0];
    double t = 1.0;
    trace.status = TraceStatus::kMaxIter;
    for (int k = 1; k <= max_outer; ++k) {
        const Vector z = problem.prox(y - problem.grad(y) / ell, 1.0 / ell);
        const double fz = F(z);
        IterationRecord rec;
        rec.k = k;
        rec.t = t;
        rec.ell = ell;
        rec.y = y;
        rec.z = z;
        rec.F_z = Vector::Constant(1, fz);
        rec.stationarity = (z - y).norm();
        if (rec.stationarity < epsilon) {
            rec.terminal = true;
            rec.x = x;
            rec.F_x = Vector::Constant(1, fx);
            trace.records.push_back(rec);
            trace.status = TraceStatus::kConverged;
            break;
        }
        // x_k = argmin { F(u) : u in {z_k, x_{k-1}} }, ties to z_k.
        const Vector x_prev = x;
        rec.accepted = fz <= fx;
        if (rec.accepted) {
            x = z;
            fx = fz;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
        t = t_next;
        rec.x = x;
        rec.F_x = Vector::Constant(1, fx);
        trace.records.push_back(rec);
    }
    trace.final_x = x;
    trace.final_F = Vector::Constant(1, fx);
    return trace;
}

}  // namespace moprox
