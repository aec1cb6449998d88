"""Open-ASEP rates <-> boundary parameters, phase diagram, admissible times."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import InvalidParameter, InversionFailure, SingularCase
from .qcore import check_q, inverse_qpower_index, qpower_lattice_index

TOL_GRID = 1e-9


@dataclass(frozen=True)
class ASEPRates:
    alpha: float
    beta: float
    gamma: float
    delta: float
    q: float

    def __post_init__(self):
        check_q(self.q)
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidParameter("alpha and beta must be positive")
        if self.gamma < 0 or self.delta < 0:
            raise InvalidParameter("gamma and delta must be non-negative")

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma,
                "delta": self.delta, "q": self.q}


@dataclass(frozen=True)
class BoundaryParams:
    A: float
    B: float
    C: float
    D: float
    q: float

    def __post_init__(self):
        check_q(self.q)
        if self.A < 0 or self.C < 0:
            raise InvalidParameter("A and C must be non-negative")
        if not (-1 < self.B <= 0 and -1 < self.D <= 0):
            raise InvalidParameter("B and D must lie in (-1, 0]")

    @property
    def abcd(self) -> float:
        return self.A * self.B * self.C * self.D

    def is_singular(self, tol: float = TOL_GRID) -> bool:
        return inverse_qpower_index(self.abcd, self.q, tol) is not None

    def as_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D, "q": self.q}


class Region(enum.Enum):
    FAN = "fan"
    SHOCK = "shock"
    BOUNDARY = "boundary(AC=1)"


class PhaseName(enum.Enum):
    MAX_CURRENT = "max-current"
    HIGH_DENSITY = "high-density"
    LOW_DENSITY = "low-density"
    COEXISTENCE = "coexistence-line"
    PHASE_BOUNDARY = "phase-boundary"


@dataclass(frozen=True)
class Phase:
    region: Region
    phase: PhaseName


def kappa(x: float, y: float, q: float, sign: int) -> float:
    """kappa_+ (sign=+1) or kappa_- (sign=-1) of the (x, y) rate pair.

    The root that would suffer cancellation is recovered from the product
    kappa_+ kappa_- = -y/x instead of the quadratic formula.
    """
    if not x > 0 or y < 0:
        raise InvalidParameter("kappa needs x > 0 and y >= 0")
    v = 1.0 - q - x + y
    r = math.hypot(v, 2.0 * math.sqrt(x * y))
    if v >= 0:
        kp = (v + r) / (2.0 * x)
        km = -2.0 * y / (v + r) if (v + r) > 0 else 0.0
    else:
        km = (v - r) / (2.0 * x)
        kp = 2.0 * y / (r - v)
    return kp if sign > 0 else km


def rates_to_abcd(r: ASEPRates, tol: float = TOL_GRID, allow_singular: bool = False) -> BoundaryParams:
    q = r.q
    bp = BoundaryParams(
        A=kappa(r.beta, r.delta, q, +1),
        B=kappa(r.beta, r.delta, q, -1),
        C=kappa(r.alpha, r.gamma, q, +1),
        D=kappa(r.alpha, r.gamma, q, -1),
        q=q,
    )
    if not allow_singular and bp.is_singular(tol):
        raise SingularCase(f"ABCD={bp.abcd} lies on the q^-l grid")
    return bp


def _invert_pair(kp: float, km: float, q: float) -> tuple[float, float]:
    # kappa_+ + kappa_- = (1-q-x+y)/x and kappa_+ kappa_- = -y/x
    x = (1.0 - q) / ((1.0 + kp) * (1.0 + km))
    y = -kp * km * x
    return x, max(y, 0.0)


def abcd_to_rates(bp: BoundaryParams, rtol: float = 1e-9) -> ASEPRates:
    beta, delta = _invert_pair(bp.A, bp.B, bp.q)
    alpha, gamma = _invert_pair(bp.C, bp.D, bp.q)
    rates = ASEPRates(alpha, beta, gamma, delta, bp.q)
    back = rates_to_abcd(rates, allow_singular=True)
    resid = max(abs(getattr(back, k) - getattr(bp, k)) / max(1.0, abs(getattr(bp, k)))
                for k in "ABCD")
    if resid > rtol:
        raise InversionFailure(f"roundtrip residual {resid:.3g} exceeds {rtol}")
    return rates


def _close(x: float, y: float, tol: float) -> bool:
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def classify_phase(bp: BoundaryParams, tol: float = TOL_GRID) -> Phase:
    A, C = bp.A, bp.C
    ac = A * C
    if _close(ac, 1.0, tol):
        region = Region.BOUNDARY
    elif ac < 1.0:
        region = Region.FAN
    else:
        region = Region.SHOCK

    if A > 1 and C > 1 and _close(A, C, tol):
        phase = PhaseName.COEXISTENCE
    elif _close(A, 1.0, tol) and C <= 1 + tol or _close(C, 1.0, tol) and A <= 1 + tol:
        phase = PhaseName.PHASE_BOUNDARY
    elif A < 1 and C < 1:
        phase = PhaseName.MAX_CURRENT
    elif A > 1 and A > C:
        phase = PhaseName.HIGH_DENSITY
    elif C > 1 and C > A:
        phase = PhaseName.LOW_DENSITY
    else:
        phase = PhaseName.PHASE_BOUNDARY
    return Phase(region, phase)


@dataclass
class Admissibility:
    ok: bool
    conditions: dict = field(default_factory=dict)
    one_sided: bool = False


def admissible_time(bp: BoundaryParams, t: float, s_opt: float | None = None,
                    tol: float = TOL_GRID) -> Admissibility:
    """Check the four interval conditions at a single time ``t``.

    ``s_opt`` is an earlier (or later) time paired with ``t``; when given,
    ``s/t`` must avoid the lattice q^Z.
    """
    q = bp.q
    rt = math.sqrt(t)
    diag = {}
    ok_i = ok_ii = True
    for name, val in zip("ABCD", (bp.A, bp.B, bp.C, bp.D)):
        lo, hi = abs(val) * rt, abs(val) / rt
        if abs(val) < 1:
            ok_i &= lo < 1 and hi < 1
        elif abs(val) > 1:
            ok_ii &= lo > 1 and hi > 1
    diag["(i) small stay small"] = ok_i
    diag["(ii) large stay large"] = ok_ii
    ok_iii = t > math.sqrt(q) and (q == 0 or t < 1.0 / math.sqrt(q))
    if s_opt is not None:
        if s_opt == t or qpower_lattice_index(s_opt / t, q, tol) is not None:
            ok_iii = False if s_opt != t else ok_iii
    diag["(iii) t in (sqrt q, 1/sqrt q), s/t not in q^Z"] = ok_iii
    ok_iv = True
    if bp.A >= 1 and bp.C >= 1:
        ok_iv = qpower_lattice_index(bp.A * t / bp.C, q, tol) is None
    diag["(iv) At/C not in q^Z"] = ok_iv
    ph = classify_phase(bp, tol)
    return Admissibility(
        ok=ok_i and ok_ii and ok_iii and ok_iv,
        conditions=diag,
        one_sided=ph.phase is PhaseName.COEXISTENCE,
    )


def admissible_times(bp: BoundaryParams, ts, tol: float = TOL_GRID) -> bool:
    """All times individually admissible and every ordered pair compatible."""
    ts = list(ts)
    if any(b < a for a, b in zip(ts, ts[1:])):
        return False
    for i, t in enumerate(ts):
        if not admissible_time(bp, t, tol=tol).ok:
            return False
        for s in ts[:i]:
            if s != t and not admissible_time(bp, t, s_opt=s, tol=tol).ok:
                return False
    return True


def choose_epsilon(bp: BoundaryParams, fractions, eps_max: float = 0.2,
                   tol: float = TOL_GRID) -> float:
    """Largest eps <= eps_max such that the times 1 - eps * f (f in ``fractions``)
    are pairwise admissible.  ``fractions`` should lie in (0, 1]."""
    eps = eps_max
    for _ in range(60):
        ts = sorted(1.0 - eps * f for f in fractions)
        if admissible_times(bp, ts, tol):
            return eps
        eps *= 0.9
    raise InvalidParameter("no admissible epsilon found for the requested time grid")


def particle_hole(bp: BoundaryParams) -> BoundaryParams:
    """Swap (A, B) with (C, D).  Observables must also be site-reversed and
    complemented by the caller."""
    return BoundaryParams(bp.C, bp.D, bp.A, bp.B, bp.q)


def particle_hole_rates(r: ASEPRates) -> ASEPRates:
    return ASEPRates(r.beta, r.alpha, r.delta, r.gamma, r.q)
