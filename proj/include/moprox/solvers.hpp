#pragma once

#include "moprox/subproblem.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace moprox {

/// Monotonicity test applied to candidate iterates.
///   kWeak:   max_i (F_i(prev) - F_i(cand)) >= 0   (some objective does not increase)
///   kStrong: min_i (F_i(prev) - F_i(cand)) >= 0   (no objective increases)
enum class MonotonicityMode { kWeak, kStrong };

enum class Algorithm { kPgm, kFista, kWeakMfista, kStrongMfista };

std::string_view to_string(Algorithm algorithm);
/// Accepts "pgm", "fista", "weak-mfista", "strong-mfista" (case-insensitive).
Algorithm parse_algorithm(std::string_view name);
bool is_mfista(Algorithm algorithm);
MonotonicityMode monotonicity_mode(Algorithm algorithm);

enum class VectorStorage { kAuto, kAlways, kNever };

struct SolverConfig {
    double ell = 1.0;
    double epsilon = 1e-5;
    int max_outer = 100000;
    double subproblem_tol = 1e-10;
    /// Dual projection residual bound; non-positive means 10 * subproblem_tol.
    double kkt_tol = 0.0;
    int max_inner = 10000;
    /// Double ell and re-solve whenever the descent inequality fails at (y, z).
    bool ell_safeguard = true;
    std::uint64_t seed = 0;
    /// kAuto keeps x, y, z per record only when n <= 64.
    VectorStorage storage = VectorStorage::kAuto;

    void validate() const;
};

enum class TraceStatus { kConverged, kMaxIter, kSubproblemFailure };

std::string_view to_string(TraceStatus status);
TraceStatus parse_status(std::string_view name);

struct IterationRecord {
    int k = 0;
    Vector x;  // empty when vectors are not stored
    Vector z;
    Vector y;
    Vector F_x;
    Vector F_z;
    double stationarity = 0.0;
    double t = 1.0;
    bool accepted = false;
    /// The stopping test fired at this record: z^k was computed but x^k = x^{k-1}.
    bool terminal = false;
    double ell = 0.0;
    int inner_iterations = 0;
    double duality_gap = 0.0;
    double kkt_residual = 0.0;
    double wall_seconds = 0.0;
};

struct SolverTrace {
    Algorithm algorithm = Algorithm::kPgm;
    Vector x0;
    Vector F_x0;
    std::vector<IterationRecord> records;
    Vector final_x;
    Vector final_F;
    TraceStatus status = TraceStatus::kMaxIter;
    double ell_initial = 0.0;
    double ell_final = 0.0;
    int safeguard_triggers = 0;
    double wall_seconds = 0.0;

    /// Completed updates x^{k-1} -> x^k (the terminal record is not counted).
    int iterations() const;
};

/// (1 + sqrt(1 + 4 t^2)) / 2
double t_update(double t);

/// Throws ArgumentError on non-finite input. Ties (difference exactly 0) accept.
bool monotone_accept(const Vector& F_prev, const Vector& F_cand, MonotonicityMode mode);

SolverTrace run(const MultiObjectiveProblem& problem, Algorithm algorithm, const Vector& x0, const SolverConfig& config);

/// sigma_k(z_ref) = min_i (F_i(x^k) - F_i(z_ref)) for x^0 followed by each
/// completed iterate x^1, ..., x^K.
std::vector<double> sigma_diagnostic(const SolverTrace& trace, const Vector& z_ref,
                                     const MultiObjectiveProblem& problem);
std::vector<double> sigma_diagnostic(const SolverTrace& trace, const Vector& F_ref);

/// Largest amount by which f_i(z) <= f_i(y) + <grad f_i(y), z - y> + ell/2 ||z - y||^2
/// is violated beyond 1e-12 (1 + |f_i(y)|). Nonpositive when the inequality holds.
double descent_violation(const SubproblemInstance& instance, const Vector& z, double ell);

}  // namespace moprox
