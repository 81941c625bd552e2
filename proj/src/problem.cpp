#include "moprox/problem.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace moprox {

bool EvaluationResult::all_finite() const {
    return std::all_of(finite.begin(), finite.end(), [](bool b) { return b; });
}

MultiObjectiveProblem::MultiObjectiveProblem(std::string name, Eigen::Index dimension,
                                             std::vector<Objective> objectives)
    : name_(std::move(name)), dimension_(dimension), objectives_(std::move(objectives)) {
    if (dimension_ < 1) throw ArgumentError("problem: dimension must be at least 1");
    if (objectives_.empty()) throw ArgumentError("problem: at least one objective is required");
    for (std::size_t i = 0; i < objectives_.size(); ++i) {
        const auto& obj = objectives_[i];
        if (!obj.smooth.value || !obj.smooth.gradient) {
            throw ArgumentError("problem: objective " + std::to_string(i + 1) + " lacks a value or gradient");
        }
        if (obj.smooth.lipschitz_hint && !(*obj.smooth.lipschitz_hint >= 0.0)) {
            throw ArgumentError("problem: lipschitz hints must be nonnegative");
        }
        const Eigen::Index d = obj.nonsmooth.dimension();
        if (d >= 0 && d != dimension_) {
            throw ArgumentError("problem: nonsmooth term " + std::to_string(i + 1) + " has dimension " +
                                std::to_string(d) + ", expected " + std::to_string(dimension_));
        }
        terms_.push_back(obj.nonsmooth);
    }
}

EvaluationResult MultiObjectiveProblem::evaluate_objectives(const Vector& x) const {
    require_dimension(x.size(), dimension_, "evaluate_objectives");
    const std::size_t m = objectives_.size();
    EvaluationResult out{Vector(m), std::vector<bool>(m)};
    for (std::size_t i = 0; i < m; ++i) {
        const ExtendedReal g = objectives_[i].nonsmooth.value(x);
        if (g.is_infinite()) {
            out.values[i] = kInf;
            out.finite[i] = false;
            continue;
        }
        out.values[i] = objectives_[i].smooth.value(x) + g.value();
        out.finite[i] = std::isfinite(out.values[i]);
    }
    return out;
}

Vector MultiObjectiveProblem::evaluate_smooth(const Vector& x) const {
    require_dimension(x.size(), dimension_, "evaluate_smooth");
    Vector out(objectives_.size());
    for (std::size_t i = 0; i < objectives_.size(); ++i) out[i] = objectives_[i].smooth.value(x);
    return out;
}

std::vector<ExtendedReal> MultiObjectiveProblem::evaluate_nonsmooth(const Vector& x) const {
    require_dimension(x.size(), dimension_, "evaluate_nonsmooth");
    std::vector<ExtendedReal> out;
    out.reserve(objectives_.size());
    for (const auto& obj : objectives_) out.push_back(obj.nonsmooth.value(x));
    return out;
}

Matrix MultiObjectiveProblem::evaluate_gradients(const Vector& y) const {
    require_dimension(y.size(), dimension_, "evaluate_gradients");
    if (!y.allFinite()) throw ArgumentError("evaluate_gradients: non-finite point");
    Matrix grads(objectives_.size(), dimension_);
    for (std::size_t i = 0; i < objectives_.size(); ++i) {
        Vector g = objectives_[i].smooth.gradient(y);
        require_dimension(g.size(), dimension_, "gradient oracle");
        grads.row(static_cast<Eigen::Index>(i)) = g.transpose();
    }
    return grads;
}

double estimate_ell(const MultiObjectiveProblem& problem, const Region& region,
                    const EllEstimateOptions& options) {
    const auto& objs = problem.objectives();
    const bool all_hinted =
        std::all_of(objs.begin(), objs.end(), [](const Objective& o) { return o.smooth.lipschitz_hint.has_value(); });
    if (all_hinted) {
        double ell = 0.0;
        for (const auto& o : objs) ell = std::max(ell, *o.smooth.lipschitz_hint);
        if (ell > 0.0) return ell;
    }

    const Eigen::Index n = problem.dimension();
    require_dimension(region.lower.size(), n, "estimate_ell region");
    require_dimension(region.upper.size(), n, "estimate_ell region");
    if (!region.lower.allFinite() || !region.upper.allFinite() ||
        (region.upper - region.lower).minCoeff() <= 0.0) {
        throw ArgumentError("estimate_ell: region must be a bounded box with positive volume");
    }
    if (options.sample_pairs < 1 || !(options.safety_factor > 0.0)) {
        throw ArgumentError("estimate_ell: sample_pairs and safety_factor must be positive");
    }

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto sample = [&] {
        Vector p(n);
        for (Eigen::Index j = 0; j < n; ++j) p[j] = region.lower[j] + unit(rng) * (region.upper[j] - region.lower[j]);
        return p;
    };
    double ell = 0.0;
    for (int s = 0; s < options.sample_pairs; ++s) {
        const Vector p = sample();
        const Vector q = sample();
        const double dist = (p - q).norm();
        if (dist == 0.0) continue;
        for (const auto& o : objs) {
            const double ratio = (o.smooth.gradient(p) - o.smooth.gradient(q)).norm() / dist;
            ell = std::max(ell, ratio);
        }
    }
    for (const auto& o : objs) {
        if (o.smooth.lipschitz_hint) ell = std::max(ell, *o.smooth.lipschitz_hint / options.safety_factor);
    }
    ell *= options.safety_factor;
    // Every f_i affine: any positive ell is valid.
    return ell > 0.0 ? ell : 1.0;
}

}  // namespace moprox
