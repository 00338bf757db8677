"""Benchmark suites, global averaging, fixed-point oracles."""

import numpy as np
import pytest

from fpnet.errors import InvalidParameterError
from fpnet.operators import (GlobalOperator, OperatorSpec, apply_global,
                             certify_lipschitz, estimate_heterogeneity,
                             find_fixed_point, make_nonconvex_suite,
                             make_quadratic_suite, make_strongly_convex_suite)


@pytest.fixture(scope="module")
def nonconvex():
    return make_nonconvex_suite(30)


@pytest.fixture(scope="module")
def convex():
    return make_strongly_convex_suite(30)


def test_nonconvex_f4_hand_values(nonconvex):
    # f4(u) = 0.14 u^4 - 0.2 u^2: f4(1) = -0.06, f4'(1) = 0.16, T4(1) = 0.984
    op = nonconvex.locals[3]
    x = np.ones(30)
    assert op.potential(x) == pytest.approx(30 * -0.06, abs=1e-12)
    assert op.grad(x)[0] == pytest.approx(0.16, abs=1e-12)
    assert op.apply(x)[0] == pytest.approx(0.984, abs=1e-12)


def test_nonconvex_first_operator_fixes_origin(nonconvex):
    # odd derivative at 0 vanishes
    x = np.zeros(30)
    assert np.allclose(nonconvex.locals[0].apply(x), 0.0, atol=1e-15)


def test_nonconvex_suite_is_expansive(nonconvex):
    assert nonconvex.lipschitz > 1.0
    assert nonconvex.n_agents == 6
    assert not nonconvex.contractive


def test_saddle_quadratic_lipschitz_constant():
    # potential u1^2 - u2^2 with tau = 0.1: L = max{|1-2 tau|, |1+2 tau|} = 1.2
    tau = 0.1
    def apply(x):
        out = x.copy()
        out[..., 0] = (1 - 2 * tau) * x[..., 0]
        out[..., 1] = (1 + 2 * tau) * x[..., 1]
        return out
    op = OperatorSpec(dim=2, apply=apply, lipschitz=1.2)
    assert certify_lipschitz(op, 5.0, n_pairs=500) <= 1.2 + 1e-9
    assert certify_lipschitz(op, 5.0, n_pairs=500) > 1.19


def test_convex_f1_hand_values(convex):
    # f1'(u) = 2u + 1.5, T1(0) = -0.5 * 1.5 = -0.75
    op = convex.locals[0]
    assert op.apply(np.zeros(30))[0] == pytest.approx(-0.75, abs=1e-15)


def test_convex_f3_fixes_origin(convex):
    assert np.allclose(convex.locals[2].apply(np.zeros(30)), 0.0, atol=1e-15)


def test_convex_suite_is_contractive_on_box(convex):
    assert convex.lipschitz < 1.0
    for op in convex.locals:
        assert certify_lipschitz(op, convex.box_halfwidth, n_pairs=400) <= op.lipschitz + 1e-6


def test_quadratic_contraction_factor_formula():
    # |1 - 2 tau mu + tau^2 m^2| with tau=0.5, mu=m=1.2 -> squared factor 0.16
    tau, mu = 0.5, 1.2
    factor_sq = 1.0 - 2.0 * tau * mu + tau**2 * mu**2
    assert factor_sq == pytest.approx(0.16, abs=1e-12)
    suite = make_quadratic_suite(4, n_agents=2, tau=tau, curvatures=[mu, mu],
                                 shifts=[0.0, 0.0])
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal((2, 4))
    lhs = np.sum((apply_global(suite, x) - apply_global(suite, y)) ** 2)
    assert lhs <= factor_sq * np.sum((x - y) ** 2) + 1e-12


def test_empirical_lipschitz_never_exceeds_declared(nonconvex, convex):
    for suite in (nonconvex, convex):
        for op in suite.locals:
            ratio = certify_lipschitz(op, suite.box_halfwidth, n_pairs=300)
            assert ratio <= op.lipschitz + 1e-6


def test_analytic_gradient_matches_finite_differences(convex, nonconvex):
    rng = np.random.default_rng(1)
    h = 1e-6
    for suite in (convex, nonconvex):
        for op in suite.locals:
            for _ in range(3):  # 20 points total across operators
                x = rng.uniform(-suite.box_halfwidth, suite.box_halfwidth, size=30)
                g = op.grad(x)
                for k in rng.choice(30, size=3, replace=False):
                    e = np.zeros(30)
                    e[k] = h
                    fd = (op.potential(x + e) - op.potential(x - e)) / (2 * h)
                    assert fd == pytest.approx(g[k], rel=1e-5, abs=1e-8)


def test_potential_derived_apply_matches_gradient(convex):
    rng = np.random.default_rng(2)
    for op in convex.locals:
        x = rng.uniform(-0.5, 0.5, size=30)
        assert np.allclose(op.apply(x), x - op.tau * op.grad(x), atol=1e-10)


def test_apply_global_identity_case():
    ident = OperatorSpec(dim=3, apply=lambda x: x.copy(), lipschitz=1.0)
    g = GlobalOperator(locals=[ident, ident], heterogeneity_zeta=0.0, box_halfwidth=1.0)
    x = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(apply_global(g, x), x)


def test_apply_global_symmetric_cancellation():
    lo = OperatorSpec(dim=3, apply=lambda x: 0.5 * x, lipschitz=0.5)
    hi = OperatorSpec(dim=3, apply=lambda x: 1.5 * x, lipschitz=1.5)
    g = GlobalOperator(locals=[lo, hi], heterogeneity_zeta=1.0, box_halfwidth=1.0)
    x = np.array([1.0, 2.0, -4.0])
    assert np.allclose(apply_global(g, x), x, atol=1e-15)


def test_apply_global_matches_summation_oracle(nonconvex):
    x = np.ones(30)
    expected = sum(op.apply(x) for op in nonconvex.locals) / 6.0
    assert np.allclose(apply_global(nonconvex, x), expected, atol=1e-12)


def test_apply_global_dimension_mismatch(nonconvex):
    with pytest.raises(InvalidParameterError):
        apply_global(nonconvex, np.zeros(7))


def test_heterogeneity_bound_holds_on_samples(convex):
    rng = np.random.default_rng(3)
    x = rng.uniform(-0.5, 0.5, size=(200, 30))
    vals = np.stack([op.apply(x) for op in convex.locals])
    spread = np.mean(np.sum((vals - vals.mean(axis=0)) ** 2, axis=-1), axis=0)
    assert np.max(spread) <= convex.heterogeneity_zeta**2 + 1e-6


def test_heterogeneity_monotone_in_box():
    ops = make_strongly_convex_suite(10).locals
    small = estimate_heterogeneity(ops, 0.5, n_samples=4000, seed=5)
    large = estimate_heterogeneity(ops, 2.0, n_samples=4000, seed=5)
    assert large >= small


def test_linear_contraction_reaches_origin():
    half = OperatorSpec(dim=1, apply=lambda x: 0.5 * x, lipschitz=0.5)
    g = GlobalOperator(locals=[half], heterogeneity_zeta=0.0, box_halfwidth=10.0)
    x = find_fixed_point(g, tol=1e-12, x0=np.array([1.0]), max_iter=50)
    assert abs(x[0]) <= 1e-12


def test_identity_operator_returns_start_immediately():
    ident = OperatorSpec(dim=2, apply=lambda x: x.copy(), lipschitz=1.0)
    g = GlobalOperator(locals=[ident], heterogeneity_zeta=0.0, box_halfwidth=1.0)
    x0 = np.array([0.3, -0.7])
    assert np.array_equal(find_fixed_point(g, tol=1e-10, x0=x0), x0)


def scalar_aggregate_derivative(u):
    # sum of the six strongly convex derivatives at scalar u
    return 8.0 * u + 4.0 * u**3 + np.exp(u) + 3.0


def test_convex_fixed_point_matches_bisection_oracle(convex):
    xstar = find_fixed_point(convex, tol=1e-13)
    lo, hi = -1.0, 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if scalar_aggregate_derivative(mid) > 0:
            hi = mid
        else:
            lo = mid
    assert np.allclose(xstar, 0.5 * (lo + hi), atol=1e-9)


def test_banach_uniqueness_from_random_starts(convex):
    rng = np.random.default_rng(4)
    tol = 1e-12
    a = find_fixed_point(convex, tol=tol, x0=rng.uniform(-0.5, 0.5, 30))
    b = find_fixed_point(convex, tol=tol, x0=rng.uniform(-0.5, 0.5, 30))
    assert np.linalg.norm(a - b) <= 10 * tol


def test_nonconvex_fixed_point_is_stationary(nonconvex):
    x = find_fixed_point(nonconvex, tol=1e-9, max_iter=200_000)
    assert np.linalg.norm(apply_global(nonconvex, x) - x) <= 1e-9
