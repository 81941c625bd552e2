#pragma once

#include "moprox/problem.hpp"

#include <random>

namespace moprox::testing {

// f(x) = ||x - c||^2 / 2 with an arbitrary g.
inline Objective shifted_quadratic(const Vector& c, NonsmoothTerm g = NonsmoothTerm::zero()) {
    SmoothOracle f;
    f.value = [c](const Vector& x) { return 0.5 * (x - c).squaredNorm(); };
    f.gradient = [c](const Vector& x) { return Vector(x - c); };
    f.lipschitz_hint = 1.0;
    return {std::move(f), std::move(g)};
}

inline Objective zero_smooth(Eigen::Index n, NonsmoothTerm g) {
    SmoothOracle f;
    f.value = [](const Vector&) { return 0.0; };
    f.gradient = [n](const Vector&) { return Vector(Vector::Zero(n)); };
    f.lipschitz_hint = 0.0;
    return {std::move(f), std::move(g)};
}

inline Vector uniform(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

}  // namespace moprox::testing
