#pragma once

#include "moprox/problem.hpp"

#include <optional>

namespace moprox {

struct SubproblemOptions {
    /// Relative duality-gap tolerance: stop once gap <= tol * (1 + |primal|).
    double tol = 1e-10;
    /// Bound on the dual projection residual ||lambda - P(lambda + phi)||.
    /// Non-positive means "10 * tol".
    double kkt_tol = 0.0;
    int max_inner = 10000;
    /// Starting dual weights (projected onto the simplex). Uniform when absent.
    std::optional<Vector> warm_start;

    double effective_kkt_tol() const { return kkt_tol > 0.0 ? kkt_tol : 10.0 * tol; }
};

/// The minimizer d_ell(x, y) of
///     max_i ( <grad f_i(y), z - y> + g_i(z) + f_i(y) - F_i(x) ) + ell/2 ||z - y||^2
/// together with the dual certificate.
struct SubproblemSolution {
    Vector z;
    Vector lambda;
    /// phi_i(z): the bracketed per-objective term. Its argmax is the active set.
    Vector phi;
    double primal_value = 0.0;
    double dual_value = 0.0;
    double duality_gap = 0.0;
    double kkt_residual = 0.0;
    int inner_iterations = 0;
    /// False when max_inner ran out; z/lambda then hold the best iterate seen.
    bool converged = true;
};

/// One instance of the min-max subproblem with everything that depends only on
/// (x, y) precomputed: the gradient matrix G (row i = grad f_i(y)) and the
/// constants c_i = f_i(y) - F_i(x).
class SubproblemInstance {
public:
    SubproblemInstance(const MultiObjectiveProblem& problem, double ell, const Vector& x, const Vector& y);
    /// Variant reusing already computed F(x).
    SubproblemInstance(const MultiObjectiveProblem& problem, double ell, const Vector& fx_values, const Vector& y,
                       int /*tag*/);

    const MultiObjectiveProblem& problem() const { return *problem_; }
    double ell() const { return ell_; }
    const Vector& y() const { return y_; }
    const Matrix& gradients() const { return grads_; }
    const Vector& smooth_at_y() const { return fy_; }

    /// z(lambda) = prox_{(1/ell) sum lambda_i g_i}(y - (1/ell) G^T lambda), all boxes enforced.
    Vector primal_from_dual(const Vector& lambda) const;
    /// phi_i(z). Components are +inf outside dom g_i.
    Vector slack(const Vector& z) const;
    /// max_i phi_i(z) + ell/2 ||z - y||^2.
    double primal_value(const Vector& z) const;
    /// theta(lambda) = sum_i lambda_i phi_i(z(lambda)) + ell/2 ||z(lambda) - y||^2.
    double dual_value(const Vector& lambda, const Vector& z, const Vector& phi) const;

    SubproblemSolution solve(const SubproblemOptions& options = {}) const;

    double kkt_residual(const Vector& z, const Vector& lambda) const;

    /// Negative Hessian of the dual at lambda, valid on the region where the set of
    /// coordinates frozen at box bounds or L1 breakpoints does not change.
    Matrix dual_curvature(const Vector& z, const Vector& lambda) const;

private:
    void init();

    const MultiObjectiveProblem* problem_;
    double ell_;
    Vector y_;
    Vector constants_;
    Vector fy_;
    Matrix grads_;
};

SubproblemSolution solve_subproblem(const MultiObjectiveProblem& problem, double ell, const Vector& x, const Vector& y,
                                    const SubproblemOptions& options = {});

/// max of the dual projection residual, |sum lambda - 1| and the prox fixed-point
/// residual ||z - z(lambda)||. Zero exactly at a KKT point.
double kkt_residual(const MultiObjectiveProblem& problem, double ell, const Vector& x, const Vector& y,
                    const SubproblemSolution& sol);

/// ||z - y||; zero certifies weak Pareto optimality of y.
double stationarity_norm(const SubproblemSolution& sol, const Vector& y);

}  // namespace moprox
