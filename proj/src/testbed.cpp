#include "moprox/testbed.hpp"

#include <cmath>

namespace moprox {

namespace {

std::vector<Objective> problem1_smooth_parts(int n) {
    if (n < 1) throw ArgumentError("problem: n must be at least 1");
    const double dn = n;
    Vector idx = Vector::LinSpaced(n, 1.0, dn);
    // i (n - i + 1) / (n (n + 1))
    const Vector w3 = (idx.array() * (dn - idx.array() + 1.0) / (dn * (dn + 1.0))).matrix();

    SmoothOracle f1;
    f1.value = [idx, dn](const Vector& x) { return (idx.array() * (x - idx).array().pow(4)).sum() / (dn * dn); };
    f1.gradient = [idx, dn](const Vector& x) -> Vector {
        return (4.0 * idx.array() * (x - idx).array().cube() / (dn * dn)).matrix();
    };

    SmoothOracle f2;
    f2.value = [dn](const Vector& x) { return std::exp(x.sum() / dn) + x.squaredNorm(); };
    f2.gradient = [dn](const Vector& x) -> Vector {
        return Vector::Constant(x.size(), std::exp(x.sum() / dn) / dn) + 2.0 * x;
    };

    SmoothOracle f3;
    f3.value = [w3](const Vector& x) { return (w3.array() * (-x.array()).exp()).sum(); };
    f3.gradient = [w3](const Vector& x) -> Vector { return (-w3.array() * (-x.array()).exp()).matrix(); };

    std::vector<Objective> out;
    out.push_back({std::move(f1), NonsmoothTerm::zero()});
    out.push_back({std::move(f2), NonsmoothTerm::zero()});
    out.push_back({std::move(f3), NonsmoothTerm::zero()});
    return out;
}

}  // namespace

MultiObjectiveProblem make_problem1(int n) {
    return MultiObjectiveProblem("problem1", n, problem1_smooth_parts(n));
}

MultiObjectiveProblem make_problem2(int n) {
    auto objectives = problem1_smooth_parts(n);
    for (auto& obj : objectives) obj.nonsmooth = NonsmoothTerm::nonnegative_orthant(n);
    return MultiObjectiveProblem("problem2", n, std::move(objectives));
}

MultiObjectiveProblem make_problem3(const GrayImage& observed, double lambda_reg, const LinearOperatorPair& blur) {
    if (!(lambda_reg >= 0.0)) throw ArgumentError("problem3: lambda_reg must be nonnegative");
    const int w = observed.width;
    const int h = observed.height;
    const Eigen::Index n = static_cast<Eigen::Index>(w) * h;
    const Vector b = observed.pixels;

    // A = B W acting on wavelet coefficients.
    LinearOperatorPair composite;
    composite.apply = [blur, w, h](const Vector& x) { return blur.apply(haar_inverse(x, w, h).pixels); };
    composite.apply_adjoint = [blur, w, h](const Vector& r) {
        return haar_forward(GrayImage(w, h, blur.apply_adjoint(r)));
    };
    const double norm_sq = estimate_op_norm_sq(composite, n, 100);

    SmoothOracle f1;
    f1.value = [composite, b](const Vector& x) { return (composite.apply(x) - b).squaredNorm(); };
    f1.gradient = [composite, b](const Vector& x) -> Vector {
        return 2.0 * composite.apply_adjoint(composite.apply(x) - b);
    };
    f1.lipschitz_hint = 2.0 * 1.05 * norm_sq;

    SmoothOracle f2;
    f2.value = [](const Vector&) { return 0.0; };
    f2.gradient = [n](const Vector&) -> Vector { return Vector::Zero(n); };
    f2.lipschitz_hint = 0.0;

    std::vector<Objective> objectives;
    objectives.push_back({std::move(f1), NonsmoothTerm::shifted_l1(lambda_reg, Vector::Zero(n))});
    objectives.push_back({std::move(f2), NonsmoothTerm::shifted_l1(lambda_reg, Vector::Ones(n))});
    return MultiObjectiveProblem("problem3", n, std::move(objectives));
}

}  // namespace moprox
