#pragma once

#include "moprox/solvers.hpp"

#include <functional>
#include <string>
#include <vector>

namespace moprox {

/// Audit tolerances. Every check in audit_trace compares a normalized violation
/// against one of these.
namespace tolerance {
inline constexpr double kMonotone = 1e-10;        // Def. (a)/(b) checks, PGM monotonicity
inline constexpr double kCandidateGap = 1e-10;    // min_i (F_i(z^k) - F_i(x^k)) >= -tol
inline constexpr double kBoundedByStart = 1e-8;   // F_i(x^k) <= F_i(x^0), relative
inline constexpr double kStepsizeIdentity = 1e-9; // |t_k^2 - t_{k+1}^2 + t_{k+1}| / t_{k+1}^2
inline constexpr double kSigmaBound = 1e-8;       // t_k^2 sigma_k(z) <= ell/2 ||x^0 - z||^2, relative
inline constexpr double kGradient = 1e-5;         // analytic vs central differences, relative
}  // namespace tolerance

/// Central differences (f(x + h e_j) - f(x - h e_j)) / 2h. Throws ArgumentError
/// naming the coordinate when an evaluation is not finite.
Vector finite_diff_gradient(const std::function<double(const Vector&)>& value, const Vector& x, double h);

/// ||grad - fd|| / max(1, ||grad||) with h = 1e-6 (1 + ||x||).
double gradient_relative_error(const SmoothOracle& oracle, const Vector& x);

struct BruteForceResult {
    /// min over the grid of the true min-max objective at z(lambda): an upper bound on the optimum.
    double primal_value = 0.0;
    /// max over the grid of the Lagrangian at z(lambda): a lower bound on the optimum.
    double dual_value = 0.0;
    Vector z;
    Vector lambda;
    std::size_t evaluated = 0;
};

/// Enumerates lambda on a barycentric grid of the simplex (m <= 3), maps each point
/// to z(lambda) through the weighted prox and evaluates the subproblem objective
/// directly. `refinements` re-grids a +-2 cell window around the best dual point at
/// 1/100 of the previous resolution. Throws UnsupportedError for m > 3.
BruteForceResult brute_force_subproblem(const MultiObjectiveProblem& problem, double ell, const Vector& x,
                                        const Vector& y, double grid_resolution, int refinements = 0);

struct AuditCheck {
    std::string name;
    double worst_violation = 0.0;  // <= 0 means satisfied with margin
    int location = 0;              // iteration index of the worst violation
    double tolerance = 0.0;
    bool pass = true;
};

struct AuditReport {
    std::vector<AuditCheck> checks;
    bool overall = true;

    const AuditCheck* find(std::string_view name) const;
    std::string table() const;
};

/// Optional extra information for the sigma-bound checks.
struct SigmaReference {
    Vector F_ref;         // F(z)
    double dist_sq = 0.0; // ||x^0 - z||^2
};

/// Checks every applicable trace invariant for `algorithm`:
///   all accelerated: stepsize lower bound and identity
///   pgm:             per-objective monotonicity
///   strong-mfista:   per-objective monotonicity
///   weak-mfista:     weak decrease, bounded by start, candidate dominance,
///                    sigma bound and rate surrogate with z = final iterate
///                    (needs x^0 and final x)
///   both mfista:     first-iterate acceptance
/// Never mutates the trace.
AuditReport audit_trace(const SolverTrace& trace, Algorithm algorithm,
                        const std::vector<SigmaReference>& extra_references = {});

/// The sigma bound for one reference point: worst value of
/// (t_k^2 sigma_k - ell/2 dist_sq) / (1 + ell/2 dist_sq) over completed iterates.
AuditCheck check_sigma_bound(const SolverTrace& trace, const SigmaReference& ref, double ell);

struct ScalarComposite {
    std::function<double(const Vector&)> f;
    std::function<Vector(const Vector&)> grad;
    std::function<double(const Vector&)> g;
    /// argmin_z g(z) + ||z - v||^2 / (2 step)
    std::function<Vector(const Vector&, double)> prox;
};

/// Single-objective monotone FISTA written directly (no simplex machinery), with
/// the same record layout as run().
SolverTrace scalar_mfista_reference(const ScalarComposite& problem, double ell, const Vector& x0, double epsilon,
                                    int max_outer);

}  // namespace moprox
