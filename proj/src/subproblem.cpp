#include "moprox/subproblem.hpp"

#include <algorithm>
#include <cmath>

namespace moprox {

SubproblemInstance::SubproblemInstance(const MultiObjectiveProblem& problem, double ell, const Vector& x,
                                       const Vector& y)
    : problem_(&problem), ell_(ell), y_(y) {
    const EvaluationResult fx = problem.evaluate_objectives(x);
    if (!fx.all_finite()) throw ArgumentError("subproblem: F(x) must be finite");
    constants_ = fx.values;
    init();
}

SubproblemInstance::SubproblemInstance(const MultiObjectiveProblem& problem, double ell, const Vector& fx_values,
                                       const Vector& y, int)
    : problem_(&problem), ell_(ell), y_(y), constants_(fx_values) {
    if (!fx_values.allFinite()) throw ArgumentError("subproblem: F(x) must be finite");
    require_dimension(fx_values.size(), static_cast<Eigen::Index>(problem.num_objectives()), "subproblem F(x)");
    init();
}

void SubproblemInstance::init() {
    if (!(ell_ > 0.0) || !std::isfinite(ell_)) throw ArgumentError("subproblem: ell must be positive and finite");
    require_dimension(y_.size(), problem_->dimension(), "subproblem y");
    grads_ = problem_->evaluate_gradients(y_);
    fy_ = problem_->evaluate_smooth(y_);
    constants_ = fy_ - constants_;
}

Vector SubproblemInstance::primal_from_dual(const Vector& lambda) const {
    const Vector v = y_ - grads_.transpose() * lambda / ell_;
    const auto& terms = problem_->nonsmooth_terms();
    WeightedCombination comb{terms, std::span<const double>(lambda.data(), static_cast<std::size_t>(lambda.size())),
                             DomainPolicy::kAllTerms};
    return prox_weighted_combination(comb, 1.0 / ell_, v);
}

Vector SubproblemInstance::slack(const Vector& z) const {
    const Vector dz = z - y_;
    Vector phi = grads_ * dz + constants_;
    const auto& terms = problem_->nonsmooth_terms();
    for (std::size_t i = 0; i < terms.size(); ++i) phi[static_cast<Eigen::Index>(i)] += terms[i].value(z).value();
    return phi;
}

double SubproblemInstance::primal_value(const Vector& z) const {
    return slack(z).maxCoeff() + 0.5 * ell_ * (z - y_).squaredNorm();
}

double SubproblemInstance::dual_value(const Vector& lambda, const Vector& z, const Vector& phi) const {
    return lambda.dot(phi) + 0.5 * ell_ * (z - y_).squaredNorm();
}

double SubproblemInstance::kkt_residual(const Vector& z, const Vector& lambda) const {
    const Vector phi = slack(z);
    if (!phi.allFinite()) return kInf;
    const double stationarity = (lambda - project_simplex(lambda + phi)).norm();
    const double simplex = std::abs(lambda.sum() - 1.0);
    const double fixed_point = (z - primal_from_dual(lambda)).norm();
    return std::max({stationarity, simplex, fixed_point});
}

namespace {

struct DualPoint {
    Vector lambda;
    Vector z;
    Vector phi;
    double theta = 0.0;
};

// max_i phi_i - <lambda, phi>, summed term by term so large shared constants in phi cancel exactly.
double gap_of(const DualPoint& p) {
    const double top = p.phi.maxCoeff();
    double gap = 0.0;
    for (Eigen::Index i = 0; i < p.phi.size(); ++i) gap += p.lambda[i] * (top - p.phi[i]);
    return gap;
}

}  // namespace

Matrix SubproblemInstance::dual_curvature(const Vector& z, const Vector& lambda) const {
    // Locally z(lambda) is affine on coordinates strictly inside the box and away
    // from every L1 breakpoint: dz_j/dlambda_i = -(G_ij + s_ij) / ell with s_ij the
    // sign derivative of g_i. Frozen coordinates contribute nothing.
    const Eigen::Index m = grads_.rows();
    const Eigen::Index n = grads_.cols();
    const auto& terms = problem_->nonsmooth_terms();
    Matrix a = grads_;
    std::vector<bool> frozen(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& term = terms[static_cast<std::size_t>(i)];
        if (const auto* l1 = term.as_l1()) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double d = z[j] - l1->shift[j];
                if (d == 0.0) {
                    if (lambda[i] > 0.0 && l1->weight > 0.0) frozen[static_cast<std::size_t>(j)] = true;
                } else {
                    a(i, j) += l1->weight * (d > 0.0 ? 1.0 : -1.0);
                }
            }
        } else if (const auto* box = term.as_box()) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (z[j] <= box->lower[j] || z[j] >= box->upper[j]) frozen[static_cast<std::size_t>(j)] = true;
            }
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (frozen[static_cast<std::size_t>(j)]) a.col(j).setZero();
    }
    return a * a.transpose() / ell_;
}

SubproblemSolution SubproblemInstance::solve(const SubproblemOptions& options) const {
    const Eigen::Index m = static_cast<Eigen::Index>(problem_->num_objectives());
    auto evaluate = [&](Vector lambda) {
        DualPoint p;
        p.z = primal_from_dual(lambda);
        p.phi = slack(p.z);
        p.lambda = std::move(lambda);
        p.theta = dual_value(p.lambda, p.z, p.phi);
        return p;
    };
    auto finish = [&](const DualPoint& p, int iterations, bool converged) {
        SubproblemSolution sol;
        sol.z = p.z;
        sol.lambda = p.lambda;
        sol.phi = p.phi;
        sol.primal_value = p.phi.maxCoeff() + 0.5 * ell_ * (p.z - y_).squaredNorm();
        sol.dual_value = p.theta;
        sol.duality_gap = gap_of(p);
        sol.kkt_residual = kkt_residual(p.z, p.lambda);
        sol.inner_iterations = iterations;
        sol.converged = converged;
        return sol;
    };

    if (m == 1) return finish(evaluate(Vector::Ones(1)), 0, true);

    Vector start = Vector::Constant(m, 1.0 / static_cast<double>(m));
    if (options.warm_start && options.warm_start->size() == m && options.warm_start->allFinite()) {
        start = project_simplex(*options.warm_start);
    }

    // The dual gradient phi(z(lambda)) is Lipschitz with constant at most
    // sum_i (||G_i|| + ||subgradient bound of g_i||)^2 / ell.
    double rho = 0.0;
    const auto& terms = problem_->nonsmooth_terms();
    const double sqrt_n = std::sqrt(static_cast<double>(problem_->dimension()));
    for (Eigen::Index i = 0; i < m; ++i) {
        double row = grads_.row(i).norm();
        if (const auto* l1 = terms[static_cast<std::size_t>(i)].as_l1()) row += l1->weight * sqrt_n;
        rho += row * row;
    }
    const double base_step = rho > 0.0 ? ell_ / rho : 1.0;
    double step = base_step;

    const double kkt_tol = options.effective_kkt_tol();
    auto residual_of = [](const DualPoint& p) { return (p.lambda - project_simplex(p.lambda + p.phi)).norm(); };
    auto score_of = [&](const DualPoint& p) { return std::max(gap_of(p), residual_of(p)); };
    auto done = [&](const DualPoint& p) {
        const double primal = p.phi.maxCoeff() + 0.5 * ell_ * (p.z - y_).squaredNorm();
        return gap_of(p) <= options.tol * (1.0 + std::abs(primal)) && residual_of(p) <= kkt_tol;
    };
    // Dual values carry rounding of order eps * |constants|; ascent tests allow that much.
    const double noise = 1e-13 * (1.0 + constants_.cwiseAbs().maxCoeff());

    // Newton step on the face {lambda_i > 0, sum lambda = 1} using the local dual curvature.
    auto newton = [&](const DualPoint& p) -> std::optional<DualPoint> {
        std::vector<Eigen::Index> face;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (p.lambda[i] > 0.0) face.push_back(i);
        }
        const Eigen::Index f = static_cast<Eigen::Index>(face.size());
        if (f < 2) return std::nullopt;
        const Matrix q = dual_curvature(p.z, p.lambda);
        Matrix kkt = Matrix::Zero(f + 1, f + 1);
        Vector rhs = Vector::Zero(f + 1);
        for (Eigen::Index a = 0; a < f; ++a) {
            for (Eigen::Index b = 0; b < f; ++b) kkt(a, b) = q(face[a], face[b]);
            kkt(a, f) = 1.0;
            kkt(f, a) = 1.0;
            rhs[a] = p.phi[face[a]];
        }
        const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
        Vector d = Vector::Zero(m);
        double drift = 0.0;
        for (Eigen::Index a = 0; a < f; ++a) drift += sol[a];
        for (Eigen::Index a = 0; a < f; ++a) d[face[a]] = sol[a] - drift / static_cast<double>(f);
        if (!d.allFinite() || d.norm() == 0.0) return std::nullopt;
        double alpha = 1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (d[i] < 0.0) alpha = std::min(alpha, p.lambda[i] / -d[i]);
        }
        Vector lambda = p.lambda + alpha * d;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (d[i] < 0.0 && p.lambda[i] / -d[i] == alpha) lambda[i] = 0.0;
        }
        lambda = lambda.cwiseMax(0.0);
        lambda /= lambda.sum();
        DualPoint next = evaluate(std::move(lambda));
        if (next.theta < p.theta - noise) return std::nullopt;
        return next;
    };

    DualPoint current = evaluate(start);
    if (done(current)) return finish(current, 0, true);
    DualPoint best = current;
    double best_score = score_of(current);

    // Accelerated projected gradient ascent (backtracking, function-value restart),
    // interleaved with face Newton steps that finish the solve once the face is right.
    DualPoint anchor = current;
    Vector previous = current.lambda;
    double t = 1.0;
    for (int it = 1; it <= options.max_inner; ++it) {
        if (auto candidate = newton(current); candidate && score_of(*candidate) < score_of(current)) {
            current = std::move(*candidate);
            anchor = current;
            previous = current.lambda;
            t = 1.0;
        } else {
            DualPoint next;
            for (;;) {
                next = evaluate(project_simplex(anchor.lambda + step * anchor.phi));
                const Vector d = next.lambda - anchor.lambda;
                const double model = anchor.theta + anchor.phi.dot(d) - 0.5 / step * d.squaredNorm();
                if (next.theta >= model - noise || step < base_step * 1e-6) break;
                step *= 0.5;
            }
            if (next.theta < current.theta - noise) {
                // Momentum overshot: restart from the last iterate.
                t = 1.0;
                anchor = current;
                previous = current.lambda;
                continue;
            }
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            Vector extrapolated = next.lambda + ((t - 1.0) / t_next) * (next.lambda - previous);
            t = t_next;
            previous = next.lambda;
            current = std::move(next);
            anchor = evaluate(project_simplex(extrapolated));
        }

        if (done(current)) return finish(current, it, true);
        if (const double score = score_of(current); score < best_score) {
            best = current;
            best_score = score;
        }
    }
    return finish(best, options.max_inner, false);
}

SubproblemSolution solve_subproblem(const MultiObjectiveProblem& problem, double ell, const Vector& x, const Vector& y,
                                    const SubproblemOptions& options) {
    return SubproblemInstance(problem, ell, x, y).solve(options);
}

double kkt_residual(const MultiObjectiveProblem& problem, double ell, const Vector& x, const Vector& y,
                    const SubproblemSolution& sol) {
    return SubproblemInstance(problem, ell, x, y).kkt_residual(sol.z, sol.lambda);
}

double stationarity_norm(const SubproblemSolution& sol, const Vector& y) { return (sol.z - y).norm(); }

}  // namespace moprox
