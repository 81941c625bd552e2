#include "doctest.h"
#include "helpers.hpp"

#include "moprox/oracles.hpp"
#include "moprox/subproblem.hpp"

using namespace moprox;
using moprox::testing::shifted_quadratic;
using moprox::testing::uniform;
using moprox::testing::zero_smooth;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

MultiObjectiveProblem symmetric_pair() {
    Vector a(2);
    a << 1, 0;
    return MultiObjectiveProblem("sym", 2, {shifted_quadratic(a), shifted_quadratic(-a)});
}

NonsmoothTerm random_term(std::mt19937_64& rng, int kind, Eigen::Index n) {
    switch (kind % 3) {
        case 0: return NonsmoothTerm::zero();
        case 1: {
            const Vector lo = uniform(rng, n, -2, -0.2);
            return NonsmoothTerm::box(lo, lo + uniform(rng, n, 0.5, 3));
        }
        default: return NonsmoothTerm::shifted_l1(uniform(rng, 1, 0.1, 1.5)[0], uniform(rng, n, -1, 1));
    }
}

// m objectives f_i = a_i/2 ||x - c_i||^2 with random terms; x kept inside every box.
MultiObjectiveProblem random_instance(std::mt19937_64& rng, int m, int n, int variant) {
    std::vector<Objective> objs;
    for (int i = 0; i < m; ++i) {
        const Vector c = uniform(rng, n, -1, 1);
        const double a = uniform(rng, 1, 0.5, 2)[0];
        SmoothOracle f;
        f.value = [c, a](const Vector& x) { return 0.5 * a * (x - c).squaredNorm(); };
        f.gradient = [c, a](const Vector& x) { return Vector(a * (x - c)); };
        f.lipschitz_hint = a;
        objs.push_back({std::move(f), random_term(rng, variant + i, n)});
    }
    return MultiObjectiveProblem("random", n, std::move(objs));
}

// A point inside every box of the problem (boxes here all contain a neighbourhood of their centre).
Vector feasible_point(const MultiObjectiveProblem& p, std::mt19937_64& rng) {
    Vector lo = Vector::Constant(p.dimension(), -kInf), hi = Vector::Constant(p.dimension(), kInf);
    for (const auto& g : p.nonsmooth_terms()) {
        if (const auto* b = g.as_box()) {
            lo = lo.cwiseMax(b->lower);
            hi = hi.cwiseMin(b->upper);
        }
    }
    Vector x = uniform(rng, p.dimension(), -0.5, 0.5);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (lo[j] > hi[j]) return Vector();
        x[j] = std::clamp(x[j], lo[j], hi[j]);
    }
    return x;
}

}  // namespace

TEST_CASE("m = 1 reduces to the prox-gradient step") {
    SmoothOracle f;
    f.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
    f.gradient = [](const Vector& x) { return x; };
    const MultiObjectiveProblem quad("x2", 1, {{f, NonsmoothTerm::zero()}});
    const auto s = solve_subproblem(quad, 1.0, scalar(1), scalar(1));
    CHECK(s.z[0] == 0.0);
    CHECK(s.primal_value == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(s.inner_iterations == 0);
    CHECK(kkt_residual(quad, 1.0, scalar(1), scalar(1), s) <= 1e-12);

    const MultiObjectiveProblem abs("abs", 1, {zero_smooth(1, NonsmoothTerm::shifted_l1(1, Vector::Zero(1)))});
    CHECK(solve_subproblem(abs, 1.0, scalar(3), scalar(3)).z[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("symmetric pair: lambda = (1/2, 1/2), z = 0") {
    const auto p = symmetric_pair();
    const Vector o = Vector::Zero(2);
    const auto s = solve_subproblem(p, 1.0, o, o);
    CHECK(s.converged);
    CHECK(s.z.norm() <= 1e-12);
    CHECK(std::abs(s.lambda[0] - 0.5) <= 1e-10);
    CHECK(std::abs(s.phi[0] - s.phi[1]) <= 1e-12);  // both active
    CHECK(s.primal_value == doctest::Approx(s.phi.maxCoeff() + 0.5 * s.z.squaredNorm()));
    CHECK(stationarity_norm(s, o) <= 1e-12);
    CHECK(kkt_residual(p, 1.0, o, o, s) <= 1e-10);

    const auto bf = brute_force_subproblem(p, 1.0, o, o, 1e-3);
    CHECK(std::abs(bf.lambda[0] - 0.5) <= 1e-3);

    SubproblemInstance inst(p, 1.0, o, o);
    Vector lam(2);
    lam << 0.6, 0.4;
    SubproblemSolution off;
    off.lambda = lam;
    off.z = inst.primal_from_dual(lam);
    CHECK(kkt_residual(p, 1.0, o, o, off) > 1e-3);
}

TEST_CASE("stationarity_norm") {
    SubproblemSolution s;
    s.z = Vector::Zero(2);
    CHECK(stationarity_norm(s, Vector::Zero(2)) == 0.0);
    s.z << 1, 0;
    CHECK(stationarity_norm(s, Vector::Zero(2)) == 1.0);
}

TEST_CASE("random instances: feasibility, gap, duality, uniqueness, brute force") {
    std::mt19937_64 rng(77);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int m = 2 + trial % 2;
        const int n = 1 + trial % 3;
        const auto p = random_instance(rng, m, n, trial);
        const Vector x = feasible_point(p, rng);
        if (x.size() == 0) continue;
        const Vector y = x + uniform(rng, n, -0.3, 0.3);
        const double ell = uniform(rng, 1, 1, 4)[0];

        SubproblemOptions opt;
        const auto s = solve_subproblem(p, ell, x, y, opt);
        REQUIRE(s.converged);
        CHECK(s.lambda.minCoeff() >= 0.0);
        CHECK(std::abs(s.lambda.sum() - 1.0) <= 1e-10);
        CHECK(s.duality_gap >= -1e-10);
        CHECK(s.duality_gap <= opt.tol * (1 + std::abs(s.primal_value)));
        CHECK(s.kkt_residual <= 1e-8);

        // weak duality at arbitrary simplex points
        SubproblemInstance inst(p, ell, x, y);
        for (int r = 0; r < 20; ++r) {
            const Vector lam = project_simplex(uniform(rng, m, -1, 1));
            const Vector z = inst.primal_from_dual(lam);
            CHECK(inst.dual_value(lam, z, inst.slack(z)) <= s.primal_value + 1e-10);
        }

        // uniqueness: start the dual from a vertex instead of the barycentre
        SubproblemOptions vertex = opt;
        vertex.warm_start = Vector::Unit(m, trial % m);
        const auto s2 = solve_subproblem(p, ell, x, y, vertex);
        CHECK((s.z - s2.z).norm() <= 2 * opt.tol);

        const auto bf = brute_force_subproblem(p, ell, x, y, 1e-3, 1);
        CHECK(bf.primal_value >= s.primal_value - 1e-8);
        CHECK(std::abs(bf.primal_value - s.primal_value) <= 1e-5);
        ++checked;
    }
    CHECK(checked >= 40);
}

TEST_CASE("soft failure when max_inner is too small") {
    std::mt19937_64 rng(3);
    const auto p = random_instance(rng, 3, 3, 2);
    const Vector x = feasible_point(p, rng);
    SubproblemOptions opt;
    opt.max_inner = 1;
    opt.tol = 1e-15;
    const auto s = solve_subproblem(p, 1.0, x, x + Vector::Constant(3, 0.2), opt);
    CHECK_FALSE(s.converged);
    CHECK(s.z.allFinite());
}

TEST_CASE("disjoint boxes are a hard error") {
    const MultiObjectiveProblem p("disjoint", 1,
                                  {zero_smooth(1, NonsmoothTerm::box(Vector::Zero(1), Vector::Ones(1))),
                                   zero_smooth(1, NonsmoothTerm::box(Vector::Constant(1, 2), Vector::Constant(1, 3)))});
    SubproblemInstance inst(p, 1.0, Vector::Constant(2, 0.0), scalar(0.5), 0);
    CHECK_THROWS_AS(inst.solve(), InfeasibleError);
}
