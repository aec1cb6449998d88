"""Matrix product ansatz in the USW tridiagonal representation.

All products are row-vector sweeps starting from <W| = e_0 with the vector
renormalized after every factor; the scale is carried in :class:`LogScaled`.
Internally we work with the (1-q)-scaled operators

    G_t = (1-q)(E + t D) = (1+t) I + sqrt(1-q) (t x + y),
    Dh  = (1-q) D        = I + sqrt(1-q) x,

so that Pi_n(t_1..t_n) = <W| G_{t_1} ... G_{t_n} |V>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .asepmap import BoundaryParams, particle_hole
from .errors import InvalidParameter, SingularCase

# ---------------------------------------------------------------- LogScaled


@dataclass(frozen=True)
class LogScaled:
    """sign * exp(log_abs); sign == 0 encodes zero."""

    sign: int
    log_abs: float

    @classmethod
    def from_float(cls, x: float) -> "LogScaled":
        if x == 0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def __float__(self) -> float:
        return 0.0 if self.sign == 0 else self.sign * math.exp(self.log_abs)

    value = property(__float__)

    def __mul__(self, other: "LogScaled") -> "LogScaled":
        if not isinstance(other, LogScaled):
            other = LogScaled.from_float(float(other))
        if self.sign == 0 or other.sign == 0:
            return LogScaled(0, -math.inf)
        return LogScaled(self.sign * other.sign, self.log_abs + other.log_abs)

    def __truediv__(self, other: "LogScaled") -> "LogScaled":
        if not isinstance(other, LogScaled):
            other = LogScaled.from_float(float(other))
        if other.sign == 0:
            raise ZeroDivisionError("division by a LogScaled zero")
        if self.sign == 0:
            return self
        return LogScaled(self.sign * other.sign, self.log_abs - other.log_abs)

    def __add__(self, other: "LogScaled") -> "LogScaled":
        if not isinstance(other, LogScaled):
            other = LogScaled.from_float(float(other))
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = (self, other) if self.log_abs >= other.log_abs else (other, self)
        s = hi.sign + lo.sign * math.exp(lo.log_abs - hi.log_abs)
        if s == 0:
            return LogScaled(0, -math.inf)
        return LogScaled(1 if s > 0 else -1, hi.log_abs + math.log(abs(s)))

    def __neg__(self) -> "LogScaled":
        return LogScaled(-self.sign, self.log_abs)

    def __sub__(self, other: "LogScaled") -> "LogScaled":
        return self + (-other)


# ------------------------------------------------------------- coefficients


@dataclass(frozen=True)
class USWCoeffs:
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    eps: np.ndarray
    phi: np.ndarray


def _check(bp: BoundaryParams):
    if bp.is_singular():
        raise SingularCase(f"ABCD={bp.abcd} lies on the q^-l grid")


def usw_coeffs(mmax: int, bp: BoundaryParams) -> USWCoeffs:
    """alpha_m .. phi_m for m = 0..mmax.

    gamma_m and delta_m are written without any division by A (the 1/A
    terms cancel algebraically), so A = 0 and q = 0 need no special path.
    """
    _check(bp)
    A, B, C, D, q = bp.A, bp.B, bp.C, bp.D, bp.q
    e4 = A * B * C * D
    sq = math.sqrt(1.0 - q)
    n = mmax + 1
    al, be, ga, de, ep, ph = (np.zeros(n) for _ in range(6))
    for m in range(n):
        qm = q**m
        if m == 0:
            b = 1.0 / (sq * (1.0 - e4))
            e = 0.0
            tail = 0.0
            dfirst = -B * C * D / (sq * (1.0 - e4))
        else:
            qm1 = q ** (m - 1)
            d2m, d2m1, d2m2 = 1 - e4 * q ** (2 * m), 1 - e4 * q ** (2 * m - 1), 1 - e4 * q ** (2 * m - 2)
            b = (1.0 - e4 * qm1) / (sq * d2m * d2m1)
            common = (1 - qm) * (1 - B * C * qm1) * (1 - B * D * qm1) / (sq * d2m2 * d2m1)
            e = common * (1 - A * C * qm1) * (1 - A * D * qm1)
            tail = common  # A * tail is the epsilon-term of gamma_m
            dfirst = B * C * D * (qm1 - q ** (2 * m) - q ** (2 * m - 1) + e4 * q ** (4 * m - 1)) / (sq * d2m * d2m1)
        be[m] = b
        al[m] = -A * B * qm * b
        ep[m] = e
        ph[m] = -C * D * q ** (m - 1) * e if m > 0 else 0.0
        ga[m] = A / sq + B * qm * b * (1 - A * C * qm) * (1 - A * D * qm) - A * tail
        de[m] = (dfirst + b * (C + D) * qm - b * A * C * D * q ** (2 * m)
                 + (C * D * q ** (m - 1) * A * tail if m > 0 else 0.0))
    return USWCoeffs(al, be, ga, de, ep, ph)


@dataclass(frozen=True)
class TridiagOperator:
    """Truncated x and y of dimension ``dim``: diagonal, sub- and super-diagonal."""

    dim: int
    q: float
    x_diag: np.ndarray
    x_sub: np.ndarray
    x_sup: np.ndarray
    y_diag: np.ndarray
    y_sub: np.ndarray
    y_sup: np.ndarray

    @classmethod
    def build(cls, dim: int, bp: BoundaryParams) -> "TridiagOperator":
        c = usw_coeffs(dim, bp)
        return cls(
            dim, bp.q,
            c.gamma[:dim].copy(), c.alpha[:dim - 1].copy(), c.eps[1:dim].copy(),
            c.delta[:dim].copy(), c.beta[:dim - 1].copy(), c.phi[1:dim].copy(),
        )

    def dense_xy(self) -> tuple[np.ndarray, np.ndarray]:
        X = np.diag(self.x_diag) + np.diag(self.x_sub, -1) + np.diag(self.x_sup, 1)
        Y = np.diag(self.y_diag) + np.diag(self.y_sub, -1) + np.diag(self.y_sup, 1)
        return X, Y

    def dense_ED(self) -> tuple[np.ndarray, np.ndarray]:
        """Truncated E and D."""
        X, Y = self.dense_xy()
        q = self.q
        I = np.eye(self.dim)
        return I / (1 - q) + Y / math.sqrt(1 - q), I / (1 - q) + X / math.sqrt(1 - q)

    def factor(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(diag, sub, sup) of G_t = (1+t) I + sqrt(1-q)(t x + y)."""
        s = math.sqrt(1 - self.q)
        return (
            (1 + t) + s * (t * self.x_diag + self.y_diag),
            s * (t * self.x_sub + self.y_sub),
            s * (t * self.x_sup + self.y_sup),
        )

    def d_factor(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(diag, sub, sup) of Dh = I + sqrt(1-q) x."""
        s = math.sqrt(1 - self.q)
        return 1 + s * self.x_diag, s * self.x_sub, s * self.x_sup


def _row_apply(v: np.ndarray, diag, sub, sup) -> np.ndarray:
    # (v M)_k = v_{k-1} M_{k-1,k} + v_k M_{kk} + v_{k+1} M_{k+1,k}
    out = v * diag
    out[1:] += v[:-1] * sup
    out[:-1] += v[1:] * sub
    return out


def _col_apply(w: np.ndarray, diag, sub, sup) -> np.ndarray:
    # (M w)_j = M_{j,j-1} w_{j-1} + M_{jj} w_j + M_{j,j+1} w_{j+1}
    out = w * diag
    out[1:] += sub * w[:-1]
    out[:-1] += sup * w[1:]
    return out


def _normalize(v: np.ndarray) -> tuple[np.ndarray, float]:
    m = float(np.max(np.abs(v)))
    if m == 0.0:
        return v, -math.inf
    return v / m, math.log(m)


@lru_cache(maxsize=64)
def _operator(dim: int, bp: BoundaryParams) -> TridiagOperator:
    return TridiagOperator.build(dim, bp)


def _finish(v0: float, logscale: float) -> LogScaled:
    if v0 == 0.0 or logscale == -math.inf:
        return LogScaled(0, -math.inf)
    return LogScaled(1 if v0 > 0 else -1, logscale + math.log(abs(v0)))


def pi_n(ts, bp: BoundaryParams, dim: int | None = None) -> LogScaled:
    """Pi_n(t_1, ..., t_n) = (1-q)^n <W|(E + t_1 D) ... (E + t_n D)|V>."""
    ts = [float(t) for t in ts]
    n = len(ts)
    if n < 1:
        raise InvalidParameter("need at least one t")
    dim = n + 2 if dim is None else int(dim)
    op = _operator(dim, bp)
    v = np.zeros(dim)
    v[0] = 1.0
    logscale = 0.0
    for t in ts:
        v = _row_apply(v, *op.factor(t))
        v, ls = _normalize(v)
        logscale += ls
    return _finish(v[0], logscale)


def partition(n: int, bp: BoundaryParams) -> LogScaled:
    return pi_n([1.0] * int(n), bp)


def gen_fn(n: int, ts, bp: BoundaryParams) -> float:
    """E[prod t_i^{tau_i}] = Pi_n(ts) / Z_n."""
    ts = list(ts)
    if len(ts) != n:
        raise InvalidParameter(f"expected {n} values of t, got {len(ts)}")
    return float(pi_n(ts, bp) / partition(n, bp))


def pi_n_dual(ts, bp: BoundaryParams) -> LogScaled:
    """Pi_n through particle-hole duality: prod(t) * Pi'_n(1/t_n, ..., 1/t_1)
    with (A, B) and (C, D) exchanged.  Used as an independent cross-check."""
    ts = [float(t) for t in ts]
    if any(t <= 0 for t in ts):
        raise InvalidParameter("duality route needs positive t")
    dual = pi_n([1.0 / t for t in reversed(ts)], particle_hole(bp))
    return dual * LogScaled(1, sum(math.log(t) for t in ts))


# ------------------------------------------------------------- correlations


class _Sweeps:
    """Normalized prefix rows f_k = <W|G^k and suffix columns g_k = G^k|V>
    for k = 0..n, together with their log scales."""

    def __init__(self, n: int, bp: BoundaryParams):
        self.n = n
        dim = n + 2
        self.op = _operator(dim, bp)
        G = self.op.factor(1.0)
        self.G = G
        self.Dh = self.op.d_factor()
        self.f = np.zeros((n + 1, dim))
        self.g = np.zeros((n + 1, dim))
        self.lf = np.zeros(n + 1)
        self.lg = np.zeros(n + 1)
        v = np.zeros(dim)
        v[0] = 1.0
        w = v.copy()
        self.f[0], self.g[0] = v, w
        for k in range(1, n + 1):
            v, ls = _normalize(_row_apply(v, *G))
            self.f[k], self.lf[k] = v, self.lf[k - 1] + ls
            w, lw = _normalize(_col_apply(w, *G))
            self.g[k], self.lg[k] = w, self.lg[k - 1] + lw
        self.logZ = self.lf[n] + math.log(self.f[n][0])

    def one_point(self, i: int) -> float:
        n = self.n
        u = _row_apply(self.f[i - 1], *self.Dh)
        val = float(u @ self.g[n - i])
        return val * math.exp(self.lf[i - 1] + self.lg[n - i] - self.logZ)

    def two_point_row(self, i: int) -> np.ndarray:
        """E[tau_i tau_j] for j = i+1..n."""
        n = self.n
        out = np.empty(n - i)
        u = _row_apply(self.f[i - 1], *self.Dh)
        lu = self.lf[i - 1]
        for j in range(i + 1, n + 1):
            val = float(_row_apply(u, *self.Dh) @ self.g[n - j])
            out[j - i - 1] = val * math.exp(lu + self.lg[n - j] - self.logZ)
            u, ls = _normalize(_row_apply(u, *self.G))
            lu += ls
        return out


def _check_site(n: int, i: int):
    if not 1 <= i <= n:
        raise InvalidParameter(f"site {i} outside 1..{n}")


def one_point(n: int, i: int, bp: BoundaryParams) -> float:
    """E[tau_i] under the stationary measure on n sites."""
    _check_site(n, i)
    return _Sweeps(n, bp).one_point(i)


def one_point_all(n: int, bp: BoundaryParams) -> np.ndarray:
    sw = _Sweeps(n, bp)
    return np.array([sw.one_point(i) for i in range(1, n + 1)])


def two_point(n: int, i: int, j: int, bp: BoundaryParams) -> float:
    """E[tau_i tau_j] for 1 <= i < j <= n."""
    _check_site(n, i)
    _check_site(n, j)
    if not i < j:
        raise InvalidParameter("two_point needs i < j")
    return float(_Sweeps(n, bp).two_point_row(i)[j - i - 1])


def two_point_all(n: int, bp: BoundaryParams) -> np.ndarray:
    """Full matrix M[i-1, j-1] = E[tau_i tau_j] (diagonal = E[tau_i])."""
    sw = _Sweeps(n, bp)
    M = np.zeros((n, n))
    for i in range(1, n + 1):
        M[i - 1, i - 1] = sw.one_point(i)
        if i < n:
            row = sw.two_point_row(i)
            M[i - 1, i:] = row
            M[i:, i - 1] = row
    return M


def height_variance(n: int, bp: BoundaryParams, upto: int | None = None) -> float:
    """Var(h_n) with h = tau_1 + ... + tau_upto (default all n sites)."""
    k = n if upto is None else int(upto)
    M = two_point_all(n, bp)[:k, :k]
    mu = np.diag(M).copy()
    return float(M.sum() - mu.sum() ** 2)


# --------------------------------------------------------------- DEHP checks


def dehp_residuals(dim: int, bp: BoundaryParams) -> dict:
    """Residuals of the DEHP relations on the block where truncation is exact."""
    from .asepmap import abcd_to_rates

    r = abcd_to_rates(bp)
    op = TridiagOperator.build(dim, bp)
    E, D = op.dense_ED()
    W = np.zeros(dim)
    W[0] = 1.0
    k = dim - 1  # last row/column sees the truncation
    bulk = (D @ E - bp.q * E @ D - (D + E))[:k - 1, :k - 1]
    left = W @ (r.alpha * E - r.gamma * D) - W
    right = (r.beta * D - r.delta * E) @ W - W
    return {
        "bulk": float(np.max(np.abs(bulk))) if bulk.size else 0.0,
        "left": float(np.max(np.abs(left[:k]))),
        "right": float(np.max(np.abs(right[:k]))),
    }
