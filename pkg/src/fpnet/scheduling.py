"""Communication schedules, step-size schedules, and parameter feasibility.

The communication index set I_T is an ascending subset of {1..T} whose first
element is 1 and whose consecutive gaps never exceed the maximum interval H.
Step sizes and compression scales are coupled (eta_t = s_t) as

    eta_t = b / sqrt(t + a)   (general, non-contractive regime)
    eta_t = b / (t + a)       (contractive regime)

The feasibility machinery evaluates the closed-form consensus-contraction
margins zeta_1(gamma), zeta_2(gamma), the trace constants C_1 / C_2 they
induce, and the admissibility conditions of the two convergence theorems
shipped with this toolkit (README: "Validated theory statements").
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InfeasibleParametersError, InvalidParameterError

POLICIES = ("every_step", "fixed_period", "random_gap", "front_loaded")


# ---------------------------------------------------------------------------
# communication schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CommSchedule:
    indices: tuple
    h_max: int

    def __post_init__(self):
        idx = self.indices
        if len(idx) == 0 or idx[0] != 1:
            raise InvalidParameterError("schedule must start at index 1")
        gaps = np.diff(idx)
        if len(gaps) and (np.min(gaps) < 1 or np.max(gaps) > self.h_max):
            raise InvalidParameterError(
                f"schedule gaps must lie in [1, {self.h_max}], got range "
                f"[{np.min(gaps)}, {np.max(gaps)}]")

    def gaps(self):
        return np.diff(self.indices)

    def contains(self):
        """Set view for O(1) membership tests inside the engine loop."""
        return frozenset(self.indices)

    def rounds_up_to(self, t):
        return int(np.searchsorted(self.indices, t, side="right"))


def make_schedule(policy: str, T: int, h: int = 1, seed: int = 0) -> CommSchedule:
    """Build the communication index set for horizon T.

    every_step: gap 1 (per-iteration communication). fixed_period: arithmetic
    progression with gap h. random_gap: i.i.d. gaps uniform on {1..h}.
    front_loaded: each gap value 1,2,...,h-1 used twice, then h forever, so
    early iterations communicate densely and late ones sparsely.
    """
    if T < 1:
        raise InvalidParameterError("T must be >= 1")
    if h < 1:
        raise InvalidParameterError(f"period h must be >= 1, got {h}")
    if policy == "every_step":
        return CommSchedule(tuple(range(1, T + 1)), h_max=1)
    if policy == "fixed_period":
        return CommSchedule(tuple(range(1, T + 1, h)), h_max=h)
    if policy == "random_gap":
        rng = np.random.default_rng(seed)
        idx = [1]
        while idx[-1] <= T:
            idx.append(idx[-1] + int(rng.integers(1, h + 1)))
        return CommSchedule(tuple(i for i in idx if i <= T), h_max=h)
    if policy == "front_loaded":
        idx = [1]
        gap, uses = 1, 0
        while idx[-1] <= T:
            idx.append(idx[-1] + gap)
            uses += 1
            if uses == 2 and gap < h:
                gap, uses = gap + 1, 0
        return CommSchedule(tuple(i for i in idx if i <= T), h_max=h)
    raise InvalidParameterError(f"unknown schedule policy {policy!r}; expected one of {POLICIES}")


# ---------------------------------------------------------------------------
# step-size / scaling schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepSchedule:
    """eta_t = s_t = b/sqrt(t+a) (inv_sqrt) or b/(t+a) (inv_linear)."""

    kind: str
    a: float
    b: float

    def __post_init__(self):
        if self.kind not in ("inv_sqrt", "inv_linear"):
            raise InvalidParameterError(f"unknown step schedule kind {self.kind!r}")
        if self.a <= 0.0 or self.b <= 0.0:
            raise InvalidParameterError("offsets a and scales b must be > 0")
        eta0 = self.eta(0)
        if not (0.0 < eta0 < 1.0):
            raise InvalidParameterError(f"eta_0 = {eta0} must lie in (0,1)")

    def eta(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "inv_sqrt":
            out = self.b / np.sqrt(t + self.a)
        else:
            out = self.b / (t + self.a)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ConstantStep:
    """Constant relaxation, for diagnostics and closed-form checks."""

    value: float

    def __post_init__(self):
        if not (0.0 < self.value < 1.0):
            raise InvalidParameterError("constant step must lie in (0,1)")

    def eta(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.value)
        return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# consensus feasibility: gamma bound, zeta_1/zeta_2, trace constants
# ---------------------------------------------------------------------------

@dataclass
class ConsensusParams:
    gamma: float
    psi: float
    r: float
    phi: float
    delta_sq: float
    alpha: float
    kappa: float

    def psi_range(self):
        return 3.0 / (4.0 * self.r), 1.0 / self.r


def gamma_upper_bound(varphi, kappa, alpha, psi, r):
    """Supremum of admissible consensus steps gamma.

    Minimum of two closed-form branches; each branch is exactly the value at
    which the corresponding zeta_1 branch hits zero.
    """
    term1 = varphi / (8.0 * (1.0 + 4.0 / kappa) * alpha**2
                      + 16.0 * (1.0 - varphi / 4.0) * alpha)
    term2 = (1.5 * kappa) / (9.0 * kappa**2 / 16.0
                             + 2.0 * (1.0 - psi * r * varphi) * (1.0 + 4.0 / varphi) * alpha**2)
    return float(min(term1, term2))


def auto_gamma(varphi, kappa, alpha, psi, r, safety=0.9):
    """Strictly interior default: 0.9 of the admissible supremum."""
    return safety * gamma_upper_bound(varphi, kappa, alpha, psi, r)


def auto_psi(r):
    """Top of the admissible range (3/(4r), 1/r]."""
    return 1.0 / r


def zeta1(gamma, varphi, kappa, alpha, psi, r):
    """Consensus contraction margin; positive iff gamma is admissible."""
    branch1 = (varphi / 4.0
               - 2.0 * (1.0 + 4.0 / kappa) * gamma * alpha**2
               - (1.0 - varphi / 4.0) * 4.0 * gamma * alpha)
    branch2 = (1.5 * kappa * gamma
               - 9.0 * kappa**2 * gamma**2 / 16.0
               - 2.0 * (1.0 - psi * r * varphi) * (1.0 + 4.0 / varphi) * gamma**2 * alpha**2)
    z = min(branch1, branch2)
    if z <= 0.0:
        which = "relative-fidelity" if branch1 <= branch2 else "spectral-gap"
        raise InfeasibleParametersError(
            f"zeta_1 = {z:.3e} <= 0: the {which} branch is violated "
            f"(branch1={branch1:.3e}, branch2={branch2:.3e}); decrease gamma")
    assert z < 1.0
    return float(z)


def zeta2(gamma, varphi, kappa, alpha, psi, r, n_agents, d_bound):
    """Forcing constant of the consensus recursion (scales with N D^2)."""
    nd2 = n_agents * d_bound**2
    mixing = (1.0 + 4.0 / (kappa * gamma)) * (
        2.0 * gamma**2 * alpha**2
        + 3.0 * (1.0 + kappa * gamma / 4.0)
        * ((1.0 - kappa * gamma + gamma) ** 2 + gamma**2 + (1.0 - kappa * gamma) ** 2)
    ) * nd2
    tracking = (1.0 - psi * r * varphi) * (1.0 + 4.0 / varphi) * (
        (1.0 + varphi / 4.0) * (1.0 + gamma * alpha) ** 2 + 2.0 * gamma**2 * alpha**2
    ) * nd2
    return float(mixing + tracking)


def theorem1_constants(zeta_1, zeta_2, n_agents, psi, r, delta_sq, d_bound, h_max):
    """C_1: per-step consensus-error envelope in the sqrt-step regime."""
    if not (0.0 < zeta_1 < 1.0):
        raise InfeasibleParametersError(f"zeta_1={zeta_1} must lie in (0,1)")
    return float((16.0 * zeta_2 * h_max**2 + 16.0 * n_agents * psi * r * delta_sq)
                 / zeta_1**2 + 8.0 * n_agents * d_bound**2 * h_max**2)


def theorem2_constants(zeta_1, zeta_2, n_agents, psi, r, delta_sq, d_bound, h_max):
    """C_2: same structure as C_1 with every coefficient doubled."""
    if not (0.0 < zeta_1 < 1.0):
        raise InfeasibleParametersError(f"zeta_1={zeta_1} must lie in (0,1)")
    return float((32.0 * zeta_2 * h_max**2 + 32.0 * n_agents * psi * r * delta_sq)
                 / zeta_1**2 + 16.0 * n_agents * d_bound**2 * h_max**2)


# ---------------------------------------------------------------------------
# theorem condition validators
# ---------------------------------------------------------------------------

@dataclass
class ConditionCheck:
    name: str
    satisfied: bool
    margin: float
    detail: str
    hard: bool = False  # hard failures refuse to run; soft ones warn

    @property
    def status(self):
        return "ok" if self.satisfied else ("FAIL" if self.hard else "WARN")


@dataclass
class ValidationReport:
    theorem: str
    checks: list = field(default_factory=list)
    zeta_1: Optional[float] = None

    @property
    def status(self):
        if any((not c.satisfied) and c.hard for c in self.checks):
            return "FAIL"
        if any(not c.satisfied for c in self.checks):
            return "WARN"
        return "PASS"

    def __str__(self):
        lines = [f"{self.theorem} parameter validation: {self.status}"]
        for c in self.checks:
            lines.append(f"  [{c.status:4s}] {c.name}: {c.detail} (margin {c.margin:+.4g})")
        return "\n".join(lines)


@dataclass
class TheoremInputs:
    """Everything the admissibility conditions read."""

    gamma: float
    psi: float
    r: float
    phi: float
    alpha: float
    kappa: float
    h_max: int
    a: float
    b: float
    lipschitz: float
    p_bias: float
    m_growth: float


def _common_checks(p: TheoremInputs):
    checks = []
    lo, hi = 3.0 / (4.0 * p.r), 1.0 / p.r
    checks.append(ConditionCheck(
        "psi range", lo < p.psi <= hi, min(p.psi - lo, hi - p.psi),
        f"psi={p.psi:.4g} vs ({lo:.4g}, {hi:.4g}]"))
    g_max = gamma_upper_bound(p.phi, p.kappa, p.alpha, p.psi, p.r)
    checks.append(ConditionCheck(
        "gamma bound", 0.0 < p.gamma < g_max, g_max - p.gamma,
        f"gamma={p.gamma:.4g} vs (0, {g_max:.4g})"))
    z1 = None
    if 0.0 < p.gamma < g_max and lo < p.psi <= hi:
        z1 = zeta1(p.gamma, p.phi, p.kappa, p.alpha, p.psi, p.r)
    return checks, z1


def validate_theorem1(p: TheoremInputs) -> ValidationReport:
    """Admissibility of the sqrt-step (non-contractive) guarantee."""
    checks, z1 = _common_checks(p)
    eta0 = p.b / np.sqrt(p.a)
    checks.append(ConditionCheck(
        "eta_0 in (0,1)", 0.0 < eta0 < 1.0, min(eta0, 1.0 - eta0),
        f"eta_0={eta0:.4g}", hard=True))
    checks.append(ConditionCheck(
        "P < 1", p.p_bias < 1.0, 1.0 - p.p_bias, f"P={p.p_bias:.4g}", hard=True))
    if z1 is not None:
        a_min = 4.0 * p.h_max / (3.0 * z1)
        checks.append(ConditionCheck(
            "a > 4H/(3 zeta_1)", p.a > a_min, p.a - a_min,
            f"a={p.a:.4g} vs > {a_min:.4g}"))
        b_max = (1.0 - p.p_bias) * np.sqrt(p.a) / (6.0 * (1.0 + p.lipschitz) * (1.0 + 4.0 * p.m_growth))
        checks.append(ConditionCheck(
            "b <= (1-P) sqrt(a) / (6(1+L)(1+4M))", 0.0 < p.b <= b_max, b_max - p.b,
            f"b={p.b:.4g} vs <= {b_max:.4g}"))
    else:
        checks.append(ConditionCheck(
            "zeta_1 > 0", False, float("-inf"),
            "gamma/psi outside admissible region; a,b conditions not evaluable"))
    return ValidationReport(theorem="theorem 1 (sublinear regime)", checks=checks, zeta_1=z1)


def validate_theorem2(p: TheoremInputs) -> ValidationReport:
    """Admissibility of the 1/t-step (contractive) guarantee; needs L < 1."""
    checks, z1 = _common_checks(p)
    checks.append(ConditionCheck(
        "contractive L < 1", p.lipschitz < 1.0, 1.0 - p.lipschitz,
        f"L={p.lipschitz:.4g}", hard=True))
    checks.append(ConditionCheck(
        "P < 1", p.p_bias < 1.0, 1.0 - p.p_bias, f"P={p.p_bias:.4g}", hard=True))
    eta0 = p.b / p.a
    checks.append(ConditionCheck(
        "eta_0 in (0,1)", 0.0 < eta0 < 1.0, min(eta0, 1.0 - eta0),
        f"eta_0={eta0:.4g}", hard=True))
    if p.lipschitz < 1.0:
        b_min = 4.0 / ((1.0 - p.lipschitz) * (1.0 - p.p_bias))
        checks.append(ConditionCheck(
            "b > 4/((1-L)(1-P))", p.b > b_min, p.b - b_min,
            f"b={p.b:.4g} vs > {b_min:.4g}"))
        if z1 is not None:
            a_min = max(8.0 * p.h_max / (3.0 * z1),
                        12.0 * (1.0 + p.lipschitz) * (1.0 + 4.0 * p.m_growth) * p.b / (1.0 - p.p_bias))
            checks.append(ConditionCheck(
                "a >= max{8H/(3 zeta_1), 12(1+L)(1+4M)b/(1-P)}", p.a >= a_min, p.a - a_min,
                f"a={p.a:.4g} vs >= {a_min:.4g}"))
        else:
            checks.append(ConditionCheck(
                "zeta_1 > 0", False, float("-inf"),
                "gamma/psi outside admissible region; a condition not evaluable"))
    return ValidationReport(theorem="theorem 2 (contractive regime)", checks=checks, zeta_1=z1)


# ---------------------------------------------------------------------------
# scalar recursion check (Lemma 6)
# ---------------------------------------------------------------------------

@dataclass
class RecursionCheckReport:
    passed: bool
    worst_margin: float
    first_violation_t: Optional[int]
    tail_value: float
    asymptote: float


def lemma6_recursion_check(r1, r2, r3, a, psi0, T) -> RecursionCheckReport:
    """Iterate the saturated recursion and test the closed-form envelope.

        Psi_{t+1} = (1 - r1/(t+a)) Psi_t + r2/(t+a)^2 + r3/(t+a)

    must satisfy Psi_t <= (D1 ln(t+a) + D2)/(t-1+a) + 2 r3 with D1 = 2 r2
    and D2 = a Psi_0 + r2 (1 + 2/a) + r3, whenever r1 >= 1 and a > r1.
    """
    if r1 < 1.0:
        raise InvalidParameterError(f"r1 must be >= 1, got {r1}")
    if a <= r1:
        raise InvalidParameterError(f"a must exceed r1={r1}, got a={a}")
    if min(r2, r3, psi0) < 0.0:
        raise InvalidParameterError("r2, r3 and Psi_0 must be nonnegative")
    d1 = 2.0 * r2
    d2 = a * psi0 + r2 * (1.0 + 2.0 / a) + r3
    psi = float(psi0)
    worst = float("inf")
    first_violation = None
    for t in range(T + 1):
        bound = (d1 * np.log(t + a) + d2) / (t - 1.0 + a) + 2.0 * r3
        margin = bound - psi
        if margin < worst:
            worst = margin
        if margin < 0.0 and first_violation is None:
            first_violation = t
        psi = (1.0 - r1 / (t + a)) * psi + r2 / (t + a) ** 2 + r3 / (t + a)
    return RecursionCheckReport(passed=first_violation is None,
                                worst_margin=float(worst),
                                first_violation_t=first_violation,
                                tail_value=float(psi),
                                asymptote=2.0 * r3)
