#pragma once

#include "moprox/types.hpp"

#include <span>
#include <variant>
#include <vector>

namespace moprox {

struct ZeroTerm {};

/// Indicator of {x : lower <= x <= upper}. Bounds may be +-inf.
struct BoxIndicator {
    Vector lower;
    Vector upper;
};

/// weight * sum_j |x_j - shift_j|
struct ShiftedWeightedL1 {
    double weight = 0.0;
    Vector shift;
};

/// The closed, proper, convex terms g_i supported by the solvers. Each has a cheap
/// value and an exact coordinatewise prox.
class NonsmoothTerm {
public:
    using Variant = std::variant<ZeroTerm, BoxIndicator, ShiftedWeightedL1>;

    NonsmoothTerm() = default;

    static NonsmoothTerm zero() { return NonsmoothTerm(ZeroTerm{}); }
    static NonsmoothTerm box(Vector lower, Vector upper);
    static NonsmoothTerm nonnegative_orthant(Eigen::Index n);
    static NonsmoothTerm shifted_l1(double weight, Vector shift);

    const Variant& variant() const { return term_; }

    bool is_zero() const { return std::holds_alternative<ZeroTerm>(term_); }
    const BoxIndicator* as_box() const { return std::get_if<BoxIndicator>(&term_); }
    const ShiftedWeightedL1* as_l1() const { return std::get_if<ShiftedWeightedL1>(&term_); }

    /// Dimension the term is bound to, or -1 for Zero (dimension-free).
    Eigen::Index dimension() const;

    ExtendedReal value(const Vector& x) const;

private:
    explicit NonsmoothTerm(Variant v) : term_(std::move(v)) {}
    Variant term_ = ZeroTerm{};
};

/// Which box indicators constrain a weighted combination.
///
/// With kPositiveWeights a term with weight 0 contributes nothing, so its box is
/// dropped (0 * indicator read as 0 everywhere). With kAllTerms every box is
/// enforced regardless of weight (0 * indicator read as the indicator of its
/// domain), which is what the subproblem dual needs: the primal max over i is
/// +inf outside any dom g_i.
enum class DomainPolicy { kPositiveWeights, kAllTerms };

/// sum_i weights_i * g_i over a shared dimension.
struct WeightedCombination {
    std::span<const NonsmoothTerm> terms;
    std::span<const double> weights;
    DomainPolicy domain = DomainPolicy::kPositiveWeights;
};

ExtendedReal term_value(const NonsmoothTerm& term, const Vector& x);

/// argmin_z  sum_i w_i g_i(z) + ||z - v||^2 / (2 step), solved exactly per coordinate.
///
/// Per coordinate the objective is a sum of weighted absolute values (breakpoints at
/// the L1 shifts) plus a quadratic; the zero of its subdifferential is located by a
/// sweep over the sorted breakpoints and then clamped to the intersection of the
/// active boxes. Throws InfeasibleError if that intersection is empty.
Vector prox_weighted_combination(const WeightedCombination& comb, double step, const Vector& v);

/// Exact minimizer of  sum_k c_k |z - s_k| + (z - v)^2 / 2  over the reals (c_k >= 0).
double prox_abs_sum_1d(std::span<const double> shifts, std::span<const double> coefficients, double v);

/// Euclidean projection onto {lambda >= 0, sum lambda = 1} by sort and threshold.
Vector project_simplex(const Vector& v);

}  // namespace moprox
