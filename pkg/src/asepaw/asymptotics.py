"""Large-n predictions (partition function, density profiles, Laplace
transforms of the height function) and their finite-n counterparts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import usw
from .asepmap import BoundaryParams, PhaseName, classify_phase, particle_hole
from .errors import GridHit, InvalidGrid, WrongPhase
from .qcore import DEFAULT_TRUNC, TruncationSpec, inverse_qpower_index, qpoch_multi, realize
from .usw import LogScaled

TOL_GRID = 1e-9


def _phase(bp: BoundaryParams) -> PhaseName:
    return classify_phase(bp, TOL_GRID).phase


def frak_p0(bp: BoundaryParams, trunc: TruncationSpec = DEFAULT_TRUNC) -> float:
    """(A^-2, BC, BD, CD)_inf / (B/A, C/A, D/A, ABCD)_inf in the high density phase."""
    if _phase(bp) is not PhaseName.HIGH_DENSITY:
        raise WrongPhase("frak_p0 is defined in the high density phase")
    A, B, C, D, q = bp.A, bp.B, bp.C, bp.D, bp.q
    for z, what in ((A / C if C else 0.0, "A/C"), (bp.abcd, "ABCD")):
        if inverse_qpower_index(z, q, TOL_GRID) is not None:
            raise GridHit(f"{what} lies on the q^-l grid")
    num = qpoch_multi((A**-2, B * C, B * D, C * D), q, trunc=trunc)
    den = qpoch_multi((B / A, C / A, D / A, A * B * C * D), q, trunc=trunc)
    return realize(num / den, "p0")


def frak_c0(bp: BoundaryParams, trunc: TruncationSpec = DEFAULT_TRUNC) -> float:
    """(A^-2, AB, BD, AD)_inf / (B/A, q, D/A, A^2 BD)_inf on the coexistence line."""
    if _phase(bp) is not PhaseName.COEXISTENCE:
        raise WrongPhase("frak_c0 is defined on the coexistence line")
    A, B, D, q = bp.A, bp.B, bp.D, bp.q
    if bp.is_singular(TOL_GRID):
        raise GridHit("ABCD lies on the q^-l grid")
    num = qpoch_multi((A**-2, A * B, B * D, A * D), q, trunc=trunc)
    den = qpoch_multi((B / A, q, D / A, A * A * B * D), q, trunc=trunc)
    return realize(num / den, "c0")


def zn_prediction(n: int, bp: BoundaryParams) -> LogScaled:
    """Leading-order Z_n in the high/low density phases and on the coexistence line."""
    ph = _phase(bp)
    if ph is PhaseName.LOW_DENSITY:
        return zn_prediction(n, particle_hole(bp))
    A = bp.A
    growth = 2 * n * math.log1p(A) - n * math.log(A)
    if ph is PhaseName.HIGH_DENSITY:
        return LogScaled(1, growth) * LogScaled.from_float(frak_p0(bp))
    if ph is PhaseName.COEXISTENCE:
        const = frak_c0(bp) * (A - 1) / (A + 1) * n
        return LogScaled(1, growth) * LogScaled.from_float(const)
    raise WrongPhase(f"no Z_n prediction implemented for phase {ph.value}")


def zn_ratio(n: int, bp: BoundaryParams) -> float:
    """Z_n / prediction."""
    return float(usw.partition(n, bp) / zn_prediction(n, bp))


def density_profile_prediction(x: float, bp: BoundaryParams) -> float:
    ph = _phase(bp)
    A, C = bp.A, bp.C
    if ph is PhaseName.HIGH_DENSITY:
        return A / (1 + A)
    if ph is PhaseName.LOW_DENSITY:
        return 1 / (1 + C)
    if ph is PhaseName.COEXISTENCE:
        return (1 + (A - 1) * x) / (1 + A)
    if ph is PhaseName.MAX_CURRENT:
        return 0.5
    raise WrongPhase(f"no density prediction on the {ph.value}")


def fluctuation_variance(x: float, bp: BoundaryParams) -> float:
    """Limit of Var(h_n(x)) / n in the high/low density phases."""
    ph = _phase(bp)
    if ph is PhaseName.HIGH_DENSITY:
        return x * bp.A / (1 + bp.A) ** 2
    if ph is PhaseName.LOW_DENSITY:
        return x * bp.C / (1 + bp.C) ** 2
    raise WrongPhase("Brownian fluctuations are predicted in the high/low density phases only")


# --------------------------------------------------------------- Laplace grids


@dataclass(frozen=True)
class LaplaceGrid:
    xs: tuple
    cs: tuple

    def __post_init__(self):
        xs = tuple(float(x) for x in self.xs)
        cs = tuple(float(c) for c in self.cs)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "cs", cs)
        if len(xs) != len(cs) or not xs:
            raise InvalidGrid("xs and cs must be non-empty and of equal length")
        if xs[0] <= 0 or any(b <= a for a, b in zip(xs, xs[1:])) or abs(xs[-1] - 1.0) > 1e-12:
            raise InvalidGrid("need 0 < x_1 < ... < x_d = 1")
        if any(c < 0 for c in cs):
            raise InvalidGrid("cs must be non-negative")

    @property
    def ss(self) -> np.ndarray:
        """s_k = c_k + ... + c_d."""
        return np.cumsum(np.asarray(self.cs)[::-1])[::-1]

    @property
    def valid(self) -> bool:
        s = self.ss
        # s_k = 0 forces a zero tail, where every t equals 1 and nothing is scaled
        return all(s[k] == 0 or abs(s[k] - 2 * s[k + 1]) > 1e-12 for k in range(len(s) - 1))

    def block_sizes(self, n: int) -> list:
        nk = [0] + [int(math.floor(n * x + 1e-12)) for x in self.xs]
        return [b - a for a, b in zip(nk, nk[1:])]


def _require_valid(g: LaplaceGrid):
    if not g.valid:
        raise InvalidGrid("grid violates s_k != 2 s_{k+1}")


def hd_laplace_limit(g: LaplaceGrid, A: float) -> float:
    _require_valid(g)
    xs = np.concatenate([[0.0], g.xs])
    return math.exp(A / (2 * (1 + A) ** 2) * float(np.sum(g.ss**2 * np.diff(xs))))


def hd_laplace_gaussian(g: LaplaceGrid, A: float) -> float:
    """E exp(sum c_k sigma W(x_k)) for Brownian motion W, sigma^2 = A / (1+A)^2."""
    x = np.asarray(g.xs)
    c = np.asarray(g.cs)
    cov = A / (1 + A) ** 2 * np.minimum.outer(x, x)
    return math.exp(0.5 * float(c @ cov @ c))


def cl_laplace_limit(g: LaplaceGrid, A: float) -> float:
    _require_valid(g)
    if not A > 1:
        raise WrongPhase("the coexistence limit needs A > 1")
    xs = np.concatenate([[0.0], g.xs])
    c = np.asarray(g.cs)
    s = g.ss
    k = 1.0 / (A + 1)
    total = 0.0
    for l in range(1, len(c) + 1):
        expo = -(np.dot(c[: l - 1], xs[1:l]) + A * np.dot(c[l - 1:], xs[l:])) * k
        if s[l - 1] == 0:
            # limit of (e^{u x_l} - e^{u x_{l-1}}) / s as s -> 0
            term = (A - 1) * k * (xs[l] - xs[l - 1])
        else:
            u = (A - 1) * s[l - 1] * k
            term = (math.exp(u * xs[l]) - math.exp(u * xs[l - 1])) / s[l - 1]
        total += math.exp(expo) * term
    return (A + 1) / (A - 1) * total


def eta(x, u, A: float):
    """Shock profile (A x + (1 - A) min(x, U)) / (1 + A)."""
    return (A * np.asarray(x) + (1 - A) * np.minimum(x, u)) / (1 + A)


def cl_laplace_quadrature(g: LaplaceGrid, A: float) -> float:
    """E exp(-sum c_k eta^A(x_k)) by adaptive quadrature over U, split at the x_k."""
    x = np.asarray(g.xs)
    c = np.asarray(g.cs)

    def f(u):
        return math.exp(-float(np.dot(c, eta(x, u, A))))

    pts = [0.0] + list(g.xs)
    return math.fsum(integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13)[0]
                     for a, b in zip(pts, pts[1:]))


def cl_laplace_monte_carlo(g: LaplaceGrid, A: float, samples: int = 10_000_000,
                           seed: int = 12345, chunk: int = 1_000_000) -> tuple[float, float]:
    """Monte Carlo mean and standard error of exp(-sum c_k eta^A(x_k)), U ~ Uniform(0,1)."""
    rng = np.random.default_rng(seed)
    x = np.asarray(g.xs)
    c = np.asarray(g.cs)
    s1 = s2 = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        u = rng.random(m)
        vals = np.exp(-(eta(x[None, :], u[:, None], A) @ c))
        s1 += float(vals.sum())
        s2 += float((vals**2).sum())
        done += m
    mean = s1 / samples
    var = max(s2 / samples - mean**2, 0.0)
    return mean, math.sqrt(var / samples)


def _block_ts(n: int, g: LaplaceGrid, scale: float) -> tuple[list, list]:
    sizes = g.block_sizes(n)
    ts = []
    for s_k, m in zip(g.ss, sizes):
        ts.extend([math.exp(-s_k / scale)] * m)
    return ts, sizes


def hd_laplace_empirical(n: int, g: LaplaceGrid, bp: BoundaryParams) -> float:
    """Phi_{x,n}(c / sqrt n) from the matrix product ansatz."""
    _require_valid(g)
    if _phase(bp) is not PhaseName.HIGH_DENSITY:
        raise WrongPhase("hd_laplace_empirical needs the high density phase")
    A = bp.A
    ts, sizes = _block_ts(n, g, math.sqrt(n))
    shift = A / (1 + A) * float(np.dot(g.ss, sizes)) / math.sqrt(n)
    ratio = usw.pi_n(ts, bp) / usw.partition(n, bp)
    return float(ratio * LogScaled(1, shift))


def cl_laplace_empirical(n: int, g: LaplaceGrid, bp: BoundaryParams) -> float:
    """Psi_{x,n}(c / n) from the matrix product ansatz."""
    _require_valid(g)
    if _phase(bp) is not PhaseName.COEXISTENCE:
        raise WrongPhase("cl_laplace_empirical needs the coexistence line")
    ts, _ = _block_ts(n, g, float(n))
    return float(usw.pi_n(ts, bp) / usw.partition(n, bp))


def phi_psi(s: float, y: float, A: float) -> tuple[float, float]:
    base = (1 + math.exp(-s) + 2 * math.exp(-s / 2) * y) * A / (1 + A) ** 2
    return base * math.exp(s * A / (1 + A)), base


def zn_scan(ns, bp: BoundaryParams) -> list:
    """Rows (n, log Z_n, log prediction, ratio, trend_ok) where trend_ok compares
    the relative error with the previous row (meaningful when n doubles)."""
    rows = []
    prev = None
    for n in ns:
        z = usw.partition(n, bp)
        pred = zn_prediction(n, bp)
        ratio = float(z / pred)
        err = abs(ratio - 1)
        ok = True if prev is None else err < 0.7 * prev or err < 1e-12
        rows.append((n, z.log_abs, pred.log_abs, ratio, ok))
        prev = err
    return rows
