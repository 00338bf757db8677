"""Biased stochastic oracles wrapping deterministic local operators.

Every mechanism ships with declared growth constants (beta, P, sigma, M)
such that, for draws xi at a fixed state x,

    || E[T~(x, xi)] - T(x) ||^2  <=  beta^2 + P ||T(x) - x||^2     (P < 1)
    E || T~(x, xi) - T(x) ||^2   <=  sigma^2 + M ||T(x) - x||^2

and a certified bound D with E||T~(x, xi) - x||^2 <= D^2 on the operating
box. certify_oracle() checks all three empirically with 3-sigma Monte-Carlo
slack; a mechanism whose declared constants understate reality fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameterError
from .operators import OperatorSpec

MECHANISMS = ("additive_gaussian", "zeroth_order", "synthetic_bias")


@dataclass
class OracleConfig:
    mechanism: str
    dim: int
    beta: float
    p: float
    sigma: float
    m_growth: float
    d_bound: Optional[float] = None
    # mechanism parameters
    noise_variance: float = 0.0     # per-coordinate Gaussian variance
    z_radius: float = 0.0           # zeroth-order smoothing radius
    bias_scale: float = 0.0         # synthetic constant-bias magnitude
    bias_slope: float = 0.0         # synthetic state-dependent bias factor

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise InvalidParameterError(
                f"unknown mechanism {self.mechanism!r}; expected one of {MECHANISMS}")
        if not (0.0 <= self.p < 1.0):
            raise InvalidParameterError(f"state-dependent bias slope P={self.p} must be in [0,1)")
        if min(self.beta, self.sigma, self.m_growth) < 0.0:
            raise InvalidParameterError("beta, sigma and M must be nonnegative")

    # -- constructors ------------------------------------------------------

    @classmethod
    def additive_gaussian(cls, dim, noise_variance):
        """Unbiased T_i(x) + eps, eps ~ N(0, v I): sigma^2 = n v, M = 0."""
        if noise_variance < 0.0:
            raise InvalidParameterError("noise variance must be >= 0")
        return cls(mechanism="additive_gaussian", dim=dim, beta=0.0, p=0.0,
                   sigma=float(np.sqrt(dim * noise_variance)), m_growth=0.0,
                   noise_variance=noise_variance)

    @classmethod
    def zeroth_order(cls, dim, z_radius, tau, smoothness):
        """Two-point sphere estimator of the potential gradient.

        The sphere moment E[uu^T] = I/n attenuates the directional estimate
        by 1/n, so the mean deviates from T by nearly the full residual:
        the certifiable state-dependent slope is (1+1/n)(1-1/n)^2 < 1.
        The remaining constants reuse the standard smoothing bounds
        beta^2 = tau^2 z^2 m^2 (n+3)^2 / 4, sigma^2 = 3 tau^2 z^2 m^2 (n+4)^3
        and M = 4(n+4), which stay valid upper bounds here.
        """
        if z_radius <= 0.0:
            raise InvalidParameterError("z_radius must be > 0")
        ref = zeroth_order_reference_constants(tau, z_radius, smoothness, dim)
        p_cert = (1.0 + 1.0 / dim) * (1.0 - 1.0 / dim) ** 2
        return cls(mechanism="zeroth_order", dim=dim,
                   beta=float(np.sqrt(ref["beta_sq"])), p=p_cert,
                   sigma=float(np.sqrt(ref["sigma_sq"])), m_growth=ref["m_growth"],
                   z_radius=z_radius)

    @classmethod
    def synthetic_bias(cls, dim, bias_scale, bias_slope, noise_variance=0.0):
        """T_i(x) + b0 u_fixed + p0 (T_i(x) - x) + eps, u_fixed = 1/sqrt(n).

        The deterministic bias also contributes to the second moment around
        T_i, so the variance constants carry the same split as (beta, P).
        """
        beta, p = synthetic_bias_constants(bias_scale, bias_slope)
        sigma_sq = dim * noise_variance + beta**2
        return cls(mechanism="synthetic_bias", dim=dim, beta=beta, p=p,
                   sigma=float(np.sqrt(sigma_sq)), m_growth=p,
                   noise_variance=noise_variance,
                   bias_scale=bias_scale, bias_slope=bias_slope)


@dataclass
class OracleSample:
    value: np.ndarray
    rng_draw_id: int = 0


def zeroth_order_reference_constants(tau, z_radius, smoothness, dim):
    """Textbook smoothing-estimator constants for an m-smooth potential."""
    m = smoothness
    return {
        "beta_sq": tau**2 * z_radius**2 * m**2 * (dim + 3) ** 2 / 4.0,
        "p": 0.0,
        "sigma_sq": 3.0 * tau**2 * z_radius**2 * m**2 * (dim + 4) ** 3,
        "m_growth": 4.0 * (dim + 4),
    }


def synthetic_bias_constants(bias_scale, bias_slope):
    """Declared (beta, P) for the synthetic mechanism.

    The two bias components are orthogonalized by Young's inequality when
    both are active; either alone is declared exactly.
    """
    if bias_slope < 0.0 or bias_scale < 0.0:
        raise InvalidParameterError("bias parameters must be >= 0")
    if bias_scale == 0.0:
        return 0.0, bias_slope**2
    if bias_slope == 0.0:
        return bias_scale, 0.0
    beta = float(np.sqrt(2.0) * bias_scale)
    p = 2.0 * bias_slope**2
    if p >= 1.0:
        raise InvalidParameterError(
            f"bias_slope={bias_slope} gives declared P={p} >= 1; mechanism rejected")
    return beta, p


def zeroth_order_gradient(f, x, z_radius, rng):
    """(f(x + z u) - f(x)) / z * u with u uniform on the unit sphere."""
    if z_radius <= 0.0:
        raise InvalidParameterError(f"z_radius must be > 0, got {z_radius}")
    x = np.asarray(x, dtype=float)
    u = rng.standard_normal(x.shape[-1])
    u /= np.linalg.norm(u)
    return (f(x + z_radius * u) - f(x)) / z_radius * u


def sample(cfg: OracleConfig, op: OperatorSpec, x, rng, draw_id=0) -> OracleSample:
    """One noisy evaluation of T_i at x using the given random stream."""
    x = np.asarray(x, dtype=float)
    if cfg.mechanism == "additive_gaussian":
        value = op.apply(x)
        if cfg.noise_variance > 0.0:
            value = value + np.sqrt(cfg.noise_variance) * rng.standard_normal(x.shape)
    elif cfg.mechanism == "zeroth_order":
        if op.potential is None or op.tau is None:
            raise InvalidParameterError("zeroth_order mechanism needs a potential-derived operator")
        g = zeroth_order_gradient(op.potential, x, cfg.z_radius, rng)
        value = x - op.tau * g
    else:  # synthetic_bias
        tx = op.apply(x)
        u_fixed = np.full(cfg.dim, 1.0 / np.sqrt(cfg.dim))
        value = tx + cfg.bias_scale * u_fixed + cfg.bias_slope * (tx - x)
        if cfg.noise_variance > 0.0:
            value = value + np.sqrt(cfg.noise_variance) * rng.standard_normal(x.shape)
    if not math.isfinite(float(value.sum())):  # nan/inf propagate through the sum
        raise FloatingPointError("oracle produced a non-finite value")
    return OracleSample(value=value, rng_draw_id=draw_id)


def _batch_values(cfg, op, x, n, rng):
    """n oracle draws at a fixed x, vectorized per mechanism."""
    if cfg.mechanism == "additive_gaussian":
        tx = op.apply(x)
        eps = np.sqrt(cfg.noise_variance) * rng.standard_normal((n, cfg.dim))
        return tx[None, :] + eps
    if cfg.mechanism == "zeroth_order":
        u = rng.standard_normal((n, cfg.dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        fx = op.potential(x)
        fz = np.array([op.potential(x + cfg.z_radius * u[k]) for k in range(n)])
        g = ((fz - fx) / cfg.z_radius)[:, None] * u
        return x[None, :] - op.tau * g
    tx = op.apply(x)
    u_fixed = np.full(cfg.dim, 1.0 / np.sqrt(cfg.dim))
    base = tx + cfg.bias_scale * u_fixed + cfg.bias_slope * (tx - x)
    eps = np.sqrt(cfg.noise_variance) * rng.standard_normal((n, cfg.dim))
    return base[None, :] + eps


@dataclass
class PointCheck:
    x_norm: float
    residual_sq: float
    bias_sq_est: float
    bias_sq_bound: float
    bias_slack: float
    var_est: float
    var_bound: float
    var_slack: float
    dist_est: float
    dist_slack: float
    d_bound_sq: Optional[float]

    @property
    def bias_ok(self):
        return self.bias_sq_est <= self.bias_sq_bound + self.bias_slack

    @property
    def var_ok(self):
        return self.var_est <= self.var_bound + self.var_slack

    @property
    def dist_ok(self):
        if self.d_bound_sq is None:
            return True
        return self.dist_est <= self.d_bound_sq + self.dist_slack


@dataclass
class CertificationReport:
    what: str
    passed: bool
    checks: list = field(default_factory=list)
    notes: str = ""

    def __str__(self):
        lines = [f"certification: {self.what}", f"status: {'PASS' if self.passed else 'FAIL'}"]
        if self.notes:
            lines.append(f"notes: {self.notes}")
        for k, c in enumerate(self.checks):
            lines.append(f"  point {k}: {c}")
        return "\n".join(lines)


def _mean_sq_bias_estimate(devs, n_pairs=25):
    """Unbiased estimate of ||E d||^2 with a 3-sigma slack.

    Inner products of disjoint block-mean pairs are i.i.d. and unbiased for
    ||E d||^2 (the cross product removes the tr(cov)/K inflation of the
    naive ||mean||^2 statistic). The slack uses the plug-in variance
    2 e'Se/m + tr(S^2)/m^2 per pair, with S and e estimated from all draws,
    which is far more stable than the raw spread of a handful of pairs.
    """
    n_blocks = 2 * n_pairs
    k = devs.shape[0] // n_blocks * n_blocks
    m = k // n_blocks
    blocks = devs[:k].reshape(n_blocks, m, devs.shape[1]).mean(axis=1)
    u = np.einsum("ij,ij->i", blocks[0::2], blocks[1::2])
    est = float(np.mean(u))
    e_hat = devs.mean(axis=0)
    centered = devs - e_hat
    cov = centered.T @ centered / (devs.shape[0] - 1)
    var_pair = 2.0 * float(e_hat @ cov @ e_hat) / m + float(np.sum(cov * cov)) / m**2
    slack = 3.0 * float(np.sqrt(max(var_pair, 0.0) / n_pairs))
    return est, slack


def certify_oracle(cfg: OracleConfig, op: OperatorSpec, n_samples=10_000,
                   sample_box=1.0, seed=0, n_points=8) -> CertificationReport:
    """Monte-Carlo check of the declared growth constants at sampled states."""
    if n_samples < 10_000:
        raise InvalidParameterError("certification needs n_samples >= 10^4")
    rng = np.random.default_rng(seed)
    checks = []
    for _ in range(n_points):
        x = rng.uniform(-sample_box, sample_box, size=cfg.dim)
        tx = op.apply(x)
        res_sq = float(np.sum((tx - x) ** 2))
        vals = _batch_values(cfg, op, x, n_samples, rng)
        devs = vals - tx[None, :]
        bias_est, bias_slack = _mean_sq_bias_estimate(devs)
        sq = np.sum(devs**2, axis=1)
        var_est = float(np.mean(sq))
        var_slack = 3.0 * float(np.std(sq, ddof=1)) / np.sqrt(len(sq))
        dist_sq = np.sum((vals - x[None, :]) ** 2, axis=1)
        dist_est = float(np.mean(dist_sq))
        dist_slack = 3.0 * float(np.std(dist_sq, ddof=1)) / np.sqrt(len(dist_sq))
        checks.append(PointCheck(
            x_norm=float(np.linalg.norm(x)), residual_sq=res_sq,
            bias_sq_est=bias_est, bias_sq_bound=cfg.beta**2 + cfg.p * res_sq,
            bias_slack=bias_slack,
            var_est=var_est, var_bound=cfg.sigma**2 + cfg.m_growth * res_sq,
            var_slack=var_slack,
            dist_est=dist_est, dist_slack=dist_slack,
            d_bound_sq=None if cfg.d_bound is None else cfg.d_bound**2))
    passed = all(c.bias_ok and c.var_ok and c.dist_ok for c in checks)
    return CertificationReport(what=f"oracle/{cfg.mechanism}", passed=passed, checks=checks)


def estimate_d_bound(cfg: OracleConfig, op: OperatorSpec, box_halfwidth,
                     n_samples=2000, n_points=32, seed=0, inflation=1.1):
    """Empirical Assumption-style bound D: sup_x E||T~(x) - x||^2 on the box."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    pts = rng.uniform(-box_halfwidth, box_halfwidth, size=(n_points, cfg.dim))
    pts = np.vstack([pts, np.full(cfg.dim, box_halfwidth), np.full(cfg.dim, -box_halfwidth)])
    for x in pts:
        vals = _batch_values(cfg, op, x, n_samples, rng)
        worst = max(worst, float(np.mean(np.sum((vals - x) ** 2, axis=1))))
    return float(inflation * np.sqrt(worst))
