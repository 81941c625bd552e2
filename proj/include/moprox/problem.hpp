#pragma once

#include "moprox/nonsmooth.hpp"
#include "moprox/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace moprox {

/// Value and gradient of one convex, continuously differentiable f_i.
struct SmoothOracle {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    /// Global Lipschitz constant of the gradient, when known.
    std::optional<double> lipschitz_hint;
};

struct Objective {
    SmoothOracle smooth;
    NonsmoothTerm nonsmooth;
};

/// F_i(x) for every objective, with an explicit finiteness flag per component.
struct EvaluationResult {
    Vector values;             // +inf where the indicator is violated
    std::vector<bool> finite;

    bool all_finite() const;
};

/// min F(x) = (f_1 + g_1, ..., f_m + g_m)(x) over R^n. Immutable after construction,
/// so a single instance can be shared across threads.
class MultiObjectiveProblem {
public:
    MultiObjectiveProblem(std::string name, Eigen::Index dimension, std::vector<Objective> objectives);

    const std::string& name() const { return name_; }
    Eigen::Index dimension() const { return dimension_; }
    std::size_t num_objectives() const { return objectives_.size(); }
    const std::vector<Objective>& objectives() const { return objectives_; }
    const std::vector<NonsmoothTerm>& nonsmooth_terms() const { return terms_; }

    EvaluationResult evaluate_objectives(const Vector& x) const;
    /// f_i(x) only.
    Vector evaluate_smooth(const Vector& x) const;
    /// g_i(x) only.
    std::vector<ExtendedReal> evaluate_nonsmooth(const Vector& x) const;
    /// Row i is grad f_i(y).
    Matrix evaluate_gradients(const Vector& y) const;

private:
    std::string name_;
    Eigen::Index dimension_;
    std::vector<Objective> objectives_;
    std::vector<NonsmoothTerm> terms_;  // copy of objectives_[i].nonsmooth for span access
};

/// Axis-aligned box used to sample start points and Lipschitz estimates.
struct Region {
    Vector lower;
    Vector upper;

    static Region cube(Eigen::Index n, double lo, double hi) {
        return {Vector::Constant(n, lo), Vector::Constant(n, hi)};
    }
};

struct EllEstimateOptions {
    int sample_pairs = 256;
    double safety_factor = 2.0;
    std::uint64_t seed = 0;
};

/// A surrogate for L = max_i L_i. Uses the hints when every objective has one,
/// otherwise samples gradient difference quotients over `region` (a heuristic
/// lower bound on L scaled by the safety factor).
double estimate_ell(const MultiObjectiveProblem& problem, const Region& region,
                    const EllEstimateOptions& options = {});

}  // namespace moprox
