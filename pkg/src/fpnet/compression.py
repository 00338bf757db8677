"""Unified compressor family with certified constants and exact bit accounting.

Every kind satisfies, for declared constants r > 0, phi in (0,1], delta^2 >= 0,

    E || C(x)/r - x ||^2  <=  (1 - phi) ||x||^2 + delta^2.

Shipped kinds and their analytic constants (n = vector dimension):

    c1  l-bit infinity-norm quantizer   r = 1 + n/4^l, phi = 1/r, delta^2 = 0
    c2  uniform quantizer, step Delta   r = 1, phi = 1, delta^2 = n Delta^2/4
    c3  sparsify (keep prob p) + dithered uniform quantizer
                                        r = 1/p, phi = p, delta^2 = n p^3 Delta^2/4
    identity                            r = 1, phi = 1, delta^2 = 0

Bit costs: c1 sends l magnitude bits plus a sign per coordinate plus one
scalar, (l+1)n + b bits; c2 sends n q-bit integers; c3 sends q bits per kept
coordinate (n q p expected). For c3 the realized message also reports the
cost with explicit ceil(log2 n)-bit indices, since sparse payloads need the
support on the wire.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameterError

KINDS = ("c1_inf_quantizer", "c2_uniform", "c3_sparsify_quantize", "identity")


@dataclass(frozen=True)
class CompressorSpec:
    kind: str
    dim: int
    r: float
    phi: float
    delta_sq: float
    l_bits: Optional[int] = None
    delta_step: Optional[float] = None
    p_keep: Optional[float] = None
    float_bits: int = 64
    int_bits: int = 8

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown compressor kind {self.kind!r}")
        if not (0.0 < self.phi <= 1.0) or self.r <= 0.0 or self.delta_sq < 0.0:
            raise InvalidParameterError("compressor constants out of domain")


def c1_inf_quantizer(dim, l_bits=2, float_bits=64) -> CompressorSpec:
    if l_bits < 1:
        raise InvalidParameterError("l_bits must be >= 1")
    r = 1.0 + dim / 4.0**l_bits
    return CompressorSpec(kind="c1_inf_quantizer", dim=dim, r=r, phi=1.0 / r,
                          delta_sq=0.0, l_bits=l_bits, float_bits=float_bits)


def c2_uniform(dim, delta_step=1.0, int_bits=8) -> CompressorSpec:
    if delta_step <= 0.0:
        raise InvalidParameterError("delta_step must be > 0")
    return CompressorSpec(kind="c2_uniform", dim=dim, r=1.0, phi=1.0,
                          delta_sq=dim * delta_step**2 / 4.0,
                          delta_step=delta_step, int_bits=int_bits)


def c3_sparsify_quantize(dim, p_keep=0.75, delta_step=1.0, int_bits=8) -> CompressorSpec:
    if not (0.0 < p_keep < 1.0):
        raise InvalidParameterError("p_keep must be in (0,1)")
    if delta_step <= 0.0:
        raise InvalidParameterError("delta_step must be > 0")
    return CompressorSpec(kind="c3_sparsify_quantize", dim=dim, r=1.0 / p_keep,
                          phi=p_keep, delta_sq=dim * p_keep**3 * delta_step**2 / 4.0,
                          p_keep=p_keep, delta_step=delta_step, int_bits=int_bits)


def identity_compressor(dim, float_bits=64) -> CompressorSpec:
    return CompressorSpec(kind="identity", dim=dim, r=1.0, phi=1.0, delta_sq=0.0,
                          float_bits=float_bits)


@dataclass
class CompressedMessage:
    kind: str
    payload: dict
    bits: float
    bits_with_index: float


def bit_cost(spec: CompressorSpec, dim=None) -> float:
    """Expected bits per message (exact for the deterministic-support kinds)."""
    n = spec.dim if dim is None else dim
    if n < 1:
        raise InvalidParameterError("dim must be >= 1")
    if spec.kind == "c1_inf_quantizer":
        return (spec.l_bits + 1) * n + spec.float_bits
    if spec.kind == "c2_uniform":
        return n * spec.int_bits
    if spec.kind == "c3_sparsify_quantize":
        return n * spec.int_bits * spec.p_keep
    return n * spec.float_bits


def compress(spec: CompressorSpec, x, rng) -> CompressedMessage:
    """Quantize x; randomized kinds draw dithers/masks from rng."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise InvalidParameterError(f"expected shape ({spec.dim},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError("cannot compress non-finite vector")
    n = spec.dim
    if spec.kind == "c1_inf_quantizer":
        scale = float(np.max(np.abs(x)))
        half = 2.0 ** (spec.l_bits - 1)
        if scale == 0.0:
            q = np.zeros(n, dtype=np.int64)  # zero vector, same wire cost
        else:
            dither = rng.uniform(0.0, 1.0, size=n)
            q = (np.sign(x) * np.floor(half * np.abs(x) / scale + dither)).astype(np.int64)
        cost = float((spec.l_bits + 1) * n + spec.float_bits)
        return CompressedMessage("c1_inf_quantizer",
                                 {"q": q, "scale": scale, "half": half, "dim": n},
                                 cost, cost)
    if spec.kind == "c2_uniform":
        q = np.floor(x / spec.delta_step + 0.5).astype(np.int64)
        cost = float(n * spec.int_bits)
        return CompressedMessage("c2_uniform",
                                 {"q": q, "delta": spec.delta_step, "dim": n},
                                 cost, cost)
    if spec.kind == "c3_sparsify_quantize":
        keep = rng.uniform(0.0, 1.0, size=n) < spec.p_keep
        idx = np.nonzero(keep)[0]
        dither = rng.uniform(-0.5, 0.5, size=idx.size)
        q = np.rint(x[idx] / spec.p_keep / spec.delta_step + dither).astype(np.int64)
        payload_bits = float(idx.size * spec.int_bits)
        index_bits = float(idx.size * max(1, math.ceil(math.log2(max(n, 2)))))
        return CompressedMessage("c3_sparsify_quantize",
                                 {"idx": idx, "q": q, "delta": spec.delta_step, "dim": n},
                                 payload_bits, payload_bits + index_bits)
    cost = float(n * spec.float_bits)
    return CompressedMessage("identity", {"v": x.copy(), "dim": n}, cost, cost)


def decode(msg: CompressedMessage) -> np.ndarray:
    """Reconstruct the compressor output C(x) exactly from the payload."""
    p = msg.payload
    if msg.kind == "c1_inf_quantizer":
        return (p["scale"] / p["half"]) * p["q"].astype(float)
    if msg.kind == "c2_uniform":
        return p["delta"] * p["q"].astype(float)
    if msg.kind == "c3_sparsify_quantize":
        out = np.zeros(p["dim"])
        out[p["idx"]] = p["delta"] * p["q"].astype(float)
        return out
    return p["v"].copy()


def scaled_compress(spec: CompressorSpec, y, s_t, rng) -> CompressedMessage:
    """Dynamic-scaling wrapper: the payload encodes C(y / s_t).

    The receiver reconstitutes s_t * decode(msg), shrinking the absolute
    error term to s_t^2 delta^2 while the relative term is unchanged.
    """
    if s_t <= 0.0:
        raise InvalidParameterError(f"scale s_t must be > 0, got {s_t}")
    y = np.asarray(y, dtype=float)
    return compress(spec, y / s_t, rng)


# -- certification -----------------------------------------------------------

def gaussian_sampler(dim, scale=1.0):
    return lambda rng: scale * rng.standard_normal(dim)


def uniform_box_sampler(dim, halfwidth=1.0):
    return lambda rng: rng.uniform(-halfwidth, halfwidth, size=dim)


def sparse_sampler(dim, density=0.2, scale=1.0):
    def draw(rng):
        x = scale * rng.standard_normal(dim)
        x[rng.uniform(size=dim) >= density] = 0.0
        return x
    return draw


@dataclass
class CompressorPointCheck:
    x_norm_sq: float
    lhs_est: float
    rhs: float
    slack: float

    @property
    def ok(self):
        return self.lhs_est <= self.rhs + self.slack


@dataclass
class CompressorReport:
    what: str
    passed: bool
    checks: list = field(default_factory=list)

    def __str__(self):
        lines = [f"certification: {self.what}", f"status: {'PASS' if self.passed else 'FAIL'}"]
        for k, c in enumerate(self.checks):
            margin = c.rhs + c.slack - c.lhs_est
            lines.append(
                f"  point {k}: lhs={c.lhs_est:.6g} rhs={c.rhs:.6g} slack={c.slack:.3g} "
                f"margin={margin:.3g} [{'ok' if c.ok else 'VIOLATED'}]")
        return "\n".join(lines)


def certify_compressor(spec: CompressorSpec, n_trials=10_000, vector_sampler=None,
                       seed=0, n_points=5) -> CompressorReport:
    """Monte-Carlo verification of the unified inequality at sampled vectors."""
    if n_trials < 10_000:
        raise InvalidParameterError("certification needs n_trials >= 10^4")
    if vector_sampler is None:
        vector_sampler = gaussian_sampler(spec.dim)
    rng = np.random.default_rng(seed)
    checks = []
    for _ in range(n_points):
        x = np.asarray(vector_sampler(rng), dtype=float)
        sq = np.empty(n_trials)
        for j in range(n_trials):
            out = decode(compress(spec, x, rng))
            sq[j] = np.sum((out / spec.r - x) ** 2)
        lhs = float(np.mean(sq))
        slack = 3.0 * float(np.std(sq, ddof=1)) / np.sqrt(n_trials)
        rhs = (1.0 - spec.phi) * float(np.sum(x**2)) + spec.delta_sq
        checks.append(CompressorPointCheck(
            x_norm_sq=float(np.sum(x**2)), lhs_est=lhs, rhs=rhs, slack=slack))
    return CompressorReport(what=f"compressor/{spec.kind}",
                            passed=all(c.ok for c in checks), checks=checks)
