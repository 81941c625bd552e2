#include "moprox/nonsmooth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace moprox {

NonsmoothTerm NonsmoothTerm::box(Vector lower, Vector upper) {
    if (lower.size() != upper.size() || lower.size() == 0) {
        throw ArgumentError("box: lower and upper must be nonempty and of equal size");
    }
    for (Eigen::Index j = 0; j < lower.size(); ++j) {
        if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
            throw ArgumentError("box: lower must not exceed upper (coordinate " + std::to_string(j) + ")");
        }
    }
    return NonsmoothTerm(BoxIndicator{std::move(lower), std::move(upper)});
}

NonsmoothTerm NonsmoothTerm::nonnegative_orthant(Eigen::Index n) {
    return box(Vector::Zero(n), Vector::Constant(n, kInf));
}

NonsmoothTerm NonsmoothTerm::shifted_l1(double weight, Vector shift) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
        throw ArgumentError("shifted_l1: weight must be finite and nonnegative");
    }
    if (shift.size() == 0 || !shift.allFinite()) {
        throw ArgumentError("shifted_l1: shift must be a nonempty finite vector");
    }
    return NonsmoothTerm(ShiftedWeightedL1{weight, std::move(shift)});
}

Eigen::Index NonsmoothTerm::dimension() const {
    if (const auto* b = as_box()) return b->lower.size();
    if (const auto* l1 = as_l1()) return l1->shift.size();
    return -1;
}

ExtendedReal NonsmoothTerm::value(const Vector& x) const {
    if (const auto* b = as_box()) {
        require_dimension(x.size(), b->lower.size(), "term_value");
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            if (!(x[j] >= b->lower[j] && x[j] <= b->upper[j])) return ExtendedReal::infinity();
        }
        return 0.0;
    }
    if (const auto* l1 = as_l1()) {
        require_dimension(x.size(), l1->shift.size(), "term_value");
        return l1->weight * (x - l1->shift).lpNorm<1>();
    }
    return 0.0;
}

ExtendedReal term_value(const NonsmoothTerm& term, const Vector& x) { return term.value(x); }

double prox_abs_sum_1d(std::span<const double> shifts, std::span<const double> coefficients, double v) {
    // Merge breakpoints: sorted (s, c) with equal shifts combined.
    std::vector<std::pair<double, double>> bp;
    bp.reserve(shifts.size());
    for (std::size_t k = 0; k < shifts.size(); ++k) {
        if (coefficients[k] > 0.0) bp.emplace_back(shifts[k], coefficients[k]);
    }
    if (bp.empty()) return v;
    std::sort(bp.begin(), bp.end());
    std::size_t w = 0;
    for (std::size_t k = 1; k < bp.size(); ++k) {
        if (bp[k].first == bp[w].first) {
            bp[w].second += bp[k].second;
        } else {
            bp[++w] = bp[k];
        }
    }
    bp.resize(w + 1);

    // Derivative on an open interval is z - v + (left - right), where left sums the
    // coefficients of breakpoints below z and right those above.
    double right = 0.0;
    for (const auto& [s, c] : bp) right += c;
    double left = 0.0;
    for (std::size_t p = 0; p <= bp.size(); ++p) {
        const double lo = p == 0 ? -kInf : bp[p - 1].first;
        const double hi = p == bp.size() ? kInf : bp[p].first;
        const double z = v - left + right;
        if (z > lo && z < hi) return z;
        if (p == bp.size()) break;
        // Subdifferential at the breakpoint: s - v + left - right + [-c, c].
        const auto [s, c] = bp[p];
        const double base = s - v + left - (right - c);
        if (base - c <= 0.0 && base + c >= 0.0) return s;
        left += c;
        right -= c;
    }
    // Unreachable for c_k >= 0: the subdifferential is strictly increasing.
    return v;
}

Vector prox_weighted_combination(const WeightedCombination& comb, double step, const Vector& v) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ArgumentError("prox: step must be positive and finite");
    if (comb.terms.size() != comb.weights.size()) {
        throw ArgumentError("prox: terms and weights differ in length");
    }
    const Eigen::Index n = v.size();
    Vector lower = Vector::Constant(n, -kInf);
    Vector upper = Vector::Constant(n, kInf);
    std::vector<const ShiftedWeightedL1*> l1_terms;
    std::vector<double> l1_coef;
    for (std::size_t i = 0; i < comb.terms.size(); ++i) {
        const double w = comb.weights[i];
        if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("prox: weights must be finite and nonnegative");
        const auto& term = comb.terms[i];
        const Eigen::Index dim = term.dimension();
        if (dim >= 0) require_dimension(n, dim, "prox");
        if (const auto* b = term.as_box()) {
            if (w > 0.0 || comb.domain == DomainPolicy::kAllTerms) {
                lower = lower.cwiseMax(b->lower);
                upper = upper.cwiseMin(b->upper);
            }
        } else if (const auto* l1 = term.as_l1()) {
            if (w > 0.0 && l1->weight > 0.0) {
                l1_terms.push_back(l1);
                l1_coef.push_back(step * w * l1->weight);
            }
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (lower[j] > upper[j]) {
            throw InfeasibleError("prox: box intersection is empty at coordinate " + std::to_string(j));
        }
    }

    Vector z(n);
    std::vector<double> shifts(l1_terms.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        double zj = v[j];
        if (!l1_terms.empty()) {
            for (std::size_t k = 0; k < l1_terms.size(); ++k) shifts[k] = l1_terms[k]->shift[j];
            zj = prox_abs_sum_1d(shifts, l1_coef, v[j]);
        }
        // A 1-D convex minimizer over an interval is the clamp of the free minimizer.
        z[j] = std::clamp(zj, lower[j], upper[j]);
    }
    return z;
}

Vector project_simplex(const Vector& v) {
    const Eigen::Index m = v.size();
    if (m < 1) throw ArgumentError("project_simplex: empty vector");
    if (!v.allFinite()) throw ArgumentError("project_simplex: non-finite input");
    std::vector<double> u(v.data(), v.data() + m);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        cumsum += u[k];
        const double candidate = (cumsum - 1.0) / static_cast<double>(k + 1);
        if (u[k] - candidate > 0.0) theta = candidate;
    }
    Vector out = (v.array() - theta).cwiseMax(0.0);
    // Renormalize away the rounding in the threshold so the sum is exactly 1 to ~ulp.
    const double s = out.sum();
    if (s > 0.0) out /= s;
    return out;
}

}  // namespace moprox
