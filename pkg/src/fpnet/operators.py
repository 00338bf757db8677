"""Local/global operators, the two benchmark suites, and fixed-point oracles.

Both benchmark suites apply a scalar formula coordinate-wise, so each local
map is T_i(x) = x - tau * f_i'(x) elementwise. Lipschitz constants are
certified on an operating box [-B, B]^n: the quartic terms make the global
constant infinite, so every certified L is box-relative. Box membership is
asserted while the engine runs; a violation raises a diagnostic rather than
silently leaving the certified region.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameterError, NoFixedPointError

_L_GRID = 20001  # grid used to bound |1 - tau f''| on the operating box


@dataclass
class OperatorSpec:
    """One agent's local operator T_i: R^n -> R^n.

    apply is vectorized over leading axes (accepts (n,) or (batch, n)).
    For potential-derived operators, apply(x) == x - tau * grad(x) and
    smoothness bounds |f''| on the operating box.
    """

    dim: int
    apply: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    potential: Optional[Callable[[np.ndarray], float]] = None
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    tau: Optional[float] = None
    smoothness: Optional[float] = None
    name: str = ""

    def residual_norm(self, x):
        return float(np.linalg.norm(self.apply(x) - x))


@dataclass
class GlobalOperator:
    """Average of N local operators sharing one state dimension."""

    locals: list
    heterogeneity_zeta: float
    box_halfwidth: float
    tau: Optional[float] = None
    name: str = ""
    lipschitz: float = field(init=False)

    def __post_init__(self):
        dims = {op.dim for op in self.locals}
        if len(dims) != 1:
            raise InvalidParameterError(f"local operators disagree on dim: {dims}")
        self.lipschitz = max(op.lipschitz for op in self.locals)

    @property
    def dim(self):
        return self.locals[0].dim

    @property
    def n_agents(self):
        return len(self.locals)

    @property
    def contractive(self):
        return self.lipschitz < 1.0


def apply_global(g: GlobalOperator, x):
    """T(x) = (1/N) sum_i T_i(x); x may be (n,) or (batch, n)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != g.dim:
        raise InvalidParameterError(f"x has dim {x.shape[-1]}, operator expects {g.dim}")
    out = g.locals[0].apply(x).astype(float, copy=True)
    for op in g.locals[1:]:
        out += op.apply(x)
    out /= g.n_agents
    return out


# ---------------------------------------------------------------------------
# scalar formula tables for the benchmark suites
# ---------------------------------------------------------------------------

def _nonconvex_scalars():
    """(f, f', f'') triples; each f maps scalars/arrays elementwise."""
    return [
        (lambda u: 0.06 * u**4 - 0.02 * u**2,
         lambda u: 0.24 * u**3 - 0.04 * u,
         lambda u: 0.72 * u**2 - 0.04),
        (lambda u: 0.05 * np.sin(u + 0.5) + 0.15 * np.cos(10.0 * u / 3.0),
         lambda u: 0.05 * np.cos(u + 0.5) - 0.5 * np.sin(10.0 * u / 3.0),
         lambda u: -0.05 * np.sin(u + 0.5) - (5.0 / 3.0) * np.cos(10.0 * u / 3.0)),
        (lambda u: 0.1 * np.exp(-u**2) + 0.1 * u**4 - 0.3 * u**2,
         lambda u: -0.2 * u * np.exp(-u**2) + 0.4 * u**3 - 0.6 * u,
         lambda u: (0.4 * u**2 - 0.2) * np.exp(-u**2) + 1.2 * u**2 - 0.6),
        (lambda u: 0.14 * u**4 - 0.2 * u**2,
         lambda u: 0.56 * u**3 - 0.4 * u,
         lambda u: 1.68 * u**2 - 0.4),
        (lambda u: 0.45 * np.cos(u) + 0.15 * np.sin(10.0 * u / 3.0 + 0.5),
         lambda u: -0.45 * np.sin(u) + 0.5 * np.cos(10.0 * u / 3.0 + 0.5),
         lambda u: -0.45 * np.cos(u) - (5.0 / 3.0) * np.sin(10.0 * u / 3.0 + 0.5)),
        (lambda u: 0.4 * np.exp(-u**2) - 0.3 * u**2,
         lambda u: -0.8 * u * np.exp(-u**2) - 0.6 * u,
         lambda u: (1.6 * u**2 - 0.8) * np.exp(-u**2) - 0.6),
    ]


def _strongly_convex_scalars():
    return [
        (lambda u: u**2 + 1.5 * u + 0.9,
         lambda u: 2.0 * u + 1.5,
         lambda u: 2.0 * np.ones_like(u)),
        (lambda u: 0.4 * u**2 + 0.7 * np.exp(u),
         lambda u: 0.8 * u + 0.7 * np.exp(u),
         lambda u: 0.8 + 0.7 * np.exp(u)),
        (lambda u: 0.2 * u**4 + 0.6 * u**2,
         lambda u: 0.8 * u**3 + 1.2 * u,
         lambda u: 2.4 * u**2 + 1.2),
        (lambda u: u**2 + 1.5 * u + 0.1,
         lambda u: 2.0 * u + 1.5,
         lambda u: 2.0 * np.ones_like(u)),
        (lambda u: 0.6 * u**2 + 0.3 * np.exp(u),
         lambda u: 1.2 * u + 0.3 * np.exp(u),
         lambda u: 1.2 + 0.3 * np.exp(u)),
        (lambda u: 0.8 * u**4 + 0.4 * u**2,
         lambda u: 3.2 * u**3 + 0.8 * u,
         lambda u: 9.6 * u**2 + 0.8),
    ]


def _coordinatewise_operator(dim, f, df, d2f, tau, box_halfwidth, name):
    """Build an OperatorSpec for T(x) = x - tau f'(x) applied elementwise.

    The elementwise slope of T is 1 - tau f''(u); its extreme absolute value
    over [-B, B] is the box Lipschitz constant.
    """
    grid = np.linspace(-box_halfwidth, box_halfwidth, _L_GRID)
    d2 = d2f(grid)
    lips = float(np.max(np.abs(1.0 - tau * d2)))
    smooth = float(np.max(np.abs(d2)))

    def potential(x):
        return float(np.sum(f(np.asarray(x, dtype=float)), axis=-1))

    def gradient(x):
        return df(np.asarray(x, dtype=float))

    def apply(x):
        x = np.asarray(x, dtype=float)
        return x - tau * df(x)

    return OperatorSpec(dim=dim, apply=apply, lipschitz=lips, potential=potential,
                        grad=gradient, tau=tau, smoothness=smooth, name=name)


def estimate_heterogeneity(locals_, box_halfwidth, n_samples=10_000, seed=0,
                           inflation=1.1):
    """Empirical bound zeta on (1/N) sum_i ||T_i(x) - T(x)||^2 over the box.

    Uniform sampling, inflated by 10%; monotone in the box half-width.
    """
    rng = np.random.default_rng(seed)
    dim = locals_[0].dim
    x = rng.uniform(-box_halfwidth, box_halfwidth, size=(n_samples, dim))
    # box corners anchor the estimate where the spread usually peaks
    corners = np.vstack([np.full(dim, box_halfwidth), np.full(dim, -box_halfwidth)])
    x = np.vstack([x, corners])
    vals = np.stack([op.apply(x) for op in locals_])  # (N, samples, n)
    mean = vals.mean(axis=0)
    spread = np.mean(np.sum((vals - mean) ** 2, axis=-1), axis=0)  # per sample
    return float(inflation * np.sqrt(np.max(spread)))


def make_nonconvex_suite(dim, tau=0.1, box_halfwidth=5.0) -> GlobalOperator:
    """Six expansive coordinate-wise operators (quartic/trigonometric mix)."""
    if dim < 1:
        raise InvalidParameterError("dim must be >= 1")
    ops = [
        _coordinatewise_operator(dim, f, df, d2f, tau, box_halfwidth, name=f"nonconvex_f{k+1}")
        for k, (f, df, d2f) in enumerate(_nonconvex_scalars())
    ]
    zeta = estimate_heterogeneity(ops, box_halfwidth)
    return GlobalOperator(locals=ops, heterogeneity_zeta=zeta,
                          box_halfwidth=box_halfwidth, tau=tau, name="nonconvex")


def make_strongly_convex_suite(dim, tau=0.5, box_halfwidth=0.5) -> GlobalOperator:
    """Six contractive coordinate-wise operators; L < 1 on the default box.

    The default box is the largest symmetric interval on which the stiffest
    member (9.6 u^2 + 0.8 curvature) keeps tau f'' below 2.
    """
    if dim < 1:
        raise InvalidParameterError("dim must be >= 1")
    ops = [
        _coordinatewise_operator(dim, f, df, d2f, tau, box_halfwidth, name=f"convex_f{k+1}")
        for k, (f, df, d2f) in enumerate(_strongly_convex_scalars())
    ]
    zeta = estimate_heterogeneity(ops, box_halfwidth)
    return GlobalOperator(locals=ops, heterogeneity_zeta=zeta,
                          box_halfwidth=box_halfwidth, tau=tau, name="strongly_convex")


def make_quadratic_suite(dim, n_agents=6, tau=0.5, curvatures=None, shifts=None,
                         box_halfwidth=5.0) -> GlobalOperator:
    """Custom quadratic suite: f_i(u) = q_i u^2 / 2 + c_i u coordinate-wise."""
    if dim < 1 or n_agents < 1:
        raise InvalidParameterError("dim and n_agents must be >= 1")
    q = np.linspace(1.0, 2.0, n_agents) if curvatures is None else np.asarray(curvatures, float)
    c = np.linspace(-0.5, 0.5, n_agents) if shifts is None else np.asarray(shifts, float)
    if len(q) != n_agents or len(c) != n_agents:
        raise InvalidParameterError("curvatures/shifts must have one entry per agent")
    ops = []
    for k in range(n_agents):
        qi, ci = float(q[k]), float(c[k])
        ops.append(_coordinatewise_operator(
            dim,
            lambda u, qi=qi, ci=ci: 0.5 * qi * u**2 + ci * u,
            lambda u, qi=qi, ci=ci: qi * u + ci,
            lambda u, qi=qi: qi * np.ones_like(u),
            tau, box_halfwidth, name=f"quadratic_q{qi:g}"))
    zeta = estimate_heterogeneity(ops, box_halfwidth)
    return GlobalOperator(locals=ops, heterogeneity_zeta=zeta,
                          box_halfwidth=box_halfwidth, tau=tau, name="quadratic")


def certify_lipschitz(op: OperatorSpec, box_halfwidth, n_pairs=200, seed=0):
    """Largest sampled ratio ||T(x)-T(y)|| / ||x-y||, for contract checks."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-box_halfwidth, box_halfwidth, size=(n_pairs, op.dim))
    y = rng.uniform(-box_halfwidth, box_halfwidth, size=(n_pairs, op.dim))
    num = np.linalg.norm(op.apply(x) - op.apply(y), axis=-1)
    den = np.linalg.norm(x - y, axis=-1)
    keep = den > 1e-12
    return float(np.max(num[keep] / den[keep]))


def find_fixed_point(g: GlobalOperator, tol=1e-10, max_iter=1_000_000, x0=None,
                     seed=0):
    """Centralized fixed-point oracle for the distance-to-optimum metric.

    Contractive case: Picard iteration x <- T(x) until ||T(x) - x|| <= tol.
    Non-contractive case: Krasnosel'skii-Mann averaging with eta_t =
    1/sqrt(t+100) until the residual drops below tol (the result is then a
    stationary point of the residual field, not necessarily unique).
    """
    if x0 is None:
        x = np.zeros(g.dim)
    else:
        x = np.asarray(x0, dtype=float).copy()
    if g.contractive:
        for _ in range(max_iter):
            tx = apply_global(g, x)
            if np.linalg.norm(tx - x) <= tol:
                return tx
            x = tx
        raise NoFixedPointError(
            f"Picard iteration did not reach tol={tol} in {max_iter} steps",
            last_residual=float(np.linalg.norm(apply_global(g, x) - x)))
    for t in range(max_iter):
        tx = apply_global(g, x)
        res = np.linalg.norm(tx - x)
        if res <= tol:
            return x
        eta = 1.0 / np.sqrt(t + 100.0)
        x = (1.0 - eta) * x + eta * tx
    raise NoFixedPointError(
        f"KM iteration did not reach tol={tol} in {max_iter} steps",
        last_residual=float(res))
