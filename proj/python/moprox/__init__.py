"""Multiobjective proximal gradient methods: PGM, FISTA and monotone FISTA."""

from ._core import (
    ArgumentError,
    InfeasibleError,
    NonsmoothTerm,
    Problem,
    SubproblemSolution,
    Trace,
    UnsupportedError,
    audit,
    blur,
    estimate_ell,
    haar_forward,
    haar_inverse,
    make_problem1,
    make_problem2,
    make_problem3,
    monotone_accept,
    project_simplex,
    prox_weighted_combination,
    run,
    solve_subproblem,
    synthetic_image,
    t_update,
)

ALGORITHMS = ("pgm", "fista", "weak-mfista", "strong-mfista")

__all__ = [name for name in dir() if not name.startswith("_")]
