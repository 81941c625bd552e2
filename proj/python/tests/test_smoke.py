import math

import numpy as np
import pytest

import moprox


def test_t_update_golden_ratio():
    assert moprox.t_update(1.0) == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-12)


def test_monotone_accept_modes():
    assert moprox.monotone_accept([1, 1], [0.9, 1.1], "weak")
    assert not moprox.monotone_accept([1, 1], [0.9, 1.1], "strong")
    with pytest.raises(ValueError):
        moprox.monotone_accept([1, 1], [math.inf, 1], "weak")


def test_project_simplex():
    lam = moprox.project_simplex(np.array([0.3, 2.0, -1.0]))
    assert lam.min() >= 0
    assert lam.sum() == pytest.approx(1.0, abs=1e-12)


def test_problem1_values_at_origin():
    p = moprox.make_problem1(10)
    F = p.evaluate(np.zeros(10))
    assert F[1] == pytest.approx(1.0)
    assert F[2] == pytest.approx(2.0)
    assert F[0] == pytest.approx(2208.25)


def test_problem2_infeasible_point():
    p = moprox.make_problem2(3)
    assert np.all(np.isinf(p.evaluate(np.array([-1.0, 0.0, 0.0]))))


def test_weak_mfista_run_and_audit():
    p = moprox.make_problem1(10)
    rng = np.random.default_rng(3)
    x0 = rng.uniform(-2, 2, 10)
    ell = moprox.estimate_ell(p, -2 * np.ones(10), 2 * np.ones(10), seed=1)
    trace = moprox.run(p, "weak-mfista", x0, ell)
    assert trace.status == "converged"
    assert np.all(trace.final_F <= trace.F_x0 + 1e-8 * (1 + np.abs(trace.F_x0)))
    ok, checks = moprox.audit(trace)
    assert ok, checks
    rec = trace.records()
    assert rec["F_x"].shape == (len(rec["k"]), 3)
    assert trace.to_csv().startswith("k,stationarity,t,accepted,F_1,F_2,F_3,Fz_1,Fz_2,Fz_3\n")


def test_custom_problem_single_objective_matches_prox_gradient():
    # f(x) = ||x - c||^2 / 2, g = 0: one step with ell = 1 lands on c.
    c = np.array([1.0, -2.0])
    p = moprox.Problem(
        "quad", 2,
        values=[lambda x: 0.5 * float(np.sum((x - c) ** 2))],
        gradients=[lambda x: x - c],
        terms=[moprox.NonsmoothTerm.zero()],
        lipschitz=[1.0],
    )
    sol = moprox.solve_subproblem(p, 1.0, np.zeros(2), np.zeros(2))
    np.testing.assert_allclose(sol.z, c, atol=1e-12)
    trace = moprox.run(p, "pgm", np.zeros(2), 1.0)
    assert trace.status == "converged"
    np.testing.assert_allclose(trace.final_x, c, atol=1e-12)


def test_haar_round_trip_and_blur_constant():
    img = moprox.synthetic_image(16)
    back = moprox.haar_inverse(moprox.haar_forward(img), 16, 16)
    np.testing.assert_allclose(back, img, atol=1e-12)
    assert np.linalg.norm(moprox.haar_forward(img)) == pytest.approx(np.linalg.norm(img), abs=1e-12)
    assert np.allclose(moprox.blur(img, 1, 4.0), img)


def test_problem3_builds_and_descends():
    img = moprox.synthetic_image(16)
    b = moprox.blur(img, 9, 4.0)
    p = moprox.make_problem3(b, 2e-5, 9, 4.0)
    x0 = moprox.haar_forward(b)
    ell = moprox.estimate_ell(p, x0 - 1, x0 + 1)
    trace = moprox.run(p, "weak-mfista", x0, ell, max_outer=50)
    assert trace.final_F[0] <= trace.F_x0[0]
