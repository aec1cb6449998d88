"""Askey-Wilson polynomials by three-term recurrence.

Provides the recurrence coefficients, the monic-type family ``w_m``, the
normalized family ``wbar_m = w_m / (ab; q)_m``, the time-scaled projection
polynomials ``p_m(x; t)`` and connection coefficients between two families
that share ``a, b``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidParameter,
    NormalizerZero,
    RecurrenceDenominatorZero,
    RequiresNonzeroA,
)
from .qcore import (
    DEFAULT_TRUNC,
    TruncationSpec,
    check_q,
    inverse_qpower_index,
    phi43,
    qpoch_finite,
    realize,
)

_ZERO_TOL = 1e-13


@dataclass(frozen=True)
class AWParams:
    """Arguments (a, b, c, d; q) of an Askey-Wilson family.

    ``c`` and ``d`` may be a complex-conjugate pair; ``a`` and ``b`` may be
    complex in intermediate algebra but are real for every measure we build.
    """

    a: complex
    b: complex
    c: complex
    d: complex
    q: float

    def __post_init__(self):
        object.__setattr__(self, "q", check_q(self.q))
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def params(self) -> tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    @property
    def conjugate_pair(self) -> bool:
        return abs(self.c.imag) > 0 or abs(self.d.imag) > 0

    @property
    def abcd(self) -> complex:
        return self.a * self.b * self.c * self.d

    def elementary(self) -> tuple[complex, complex, complex]:
        """(e1, e3, e4): sum, sum of triple products, full product."""
        a, b, c, d = self.params
        e1 = a + b + c + d
        e3 = a * b * c + a * b * d + a * c * d + b * c * d
        return e1, e3, a * b * c * d

    def swapped(self, label: str) -> "AWParams":
        """Parameters with ``a`` exchanged against the one named ``label``."""
        a, b, c, d = self.params
        if label == "a":
            return self
        if label == "b":
            return AWParams(b, a, c, d, self.q)
        if label == "c":
            return AWParams(c, b, a, d, self.q)
        if label == "d":
            return AWParams(d, b, c, a, self.q)
        raise InvalidParameter(f"unknown parameter label {label!r}")


@dataclass(frozen=True)
class RecurrenceCoeffs:
    A: float
    B: float
    C: float


def _check_den(value: complex, what: str):
    if abs(value) < _ZERO_TOL:
        raise RecurrenceDenominatorZero(f"{what} vanishes: abcd is on the q^-l grid")
    return value


def recurrence_coeffs_complex(m: int, p: AWParams) -> tuple[complex, complex, complex]:
    """(A_m, B_m, C_m) in complex arithmetic.

    B_m uses the elementary symmetric rewrite ``q s + abcd s' = q e1 + e3`` and
    ``abcd (s + q s') = e4 e1 + q e3`` so zero parameters need no division.
    At m = 0 the q^-1 factors cancel analytically and are removed.
    """
    if m < 0:
        raise InvalidParameter("m must be non-negative")
    q = p.q
    e1, e3, e4 = p.elementary()
    if m == 0:
        den = _check_den(1.0 - e4, "1 - abcd")
        return 1.0 / den, (e1 - e3) / den, 0.0j
    qm1 = q ** (m - 1)
    d2m2 = _check_den(1.0 - q ** (2 * m - 2) * e4, "1 - q^(2m-2) abcd")
    d2m1 = _check_den(1.0 - q ** (2 * m - 1) * e4, "1 - q^(2m-1) abcd")
    d2m = _check_den(1.0 - q ** (2 * m) * e4, "1 - q^(2m) abcd")
    A = (1.0 - qm1 * e4) / (d2m1 * d2m)
    bracket = (1.0 + q ** (2 * m - 1) * e4) * (q * e1 + e3) - qm1 * (1.0 + q) * (e4 * e1 + q * e3)
    B = qm1 * bracket / (d2m2 * d2m)
    a, b, c, d = p.params
    C = (1.0 - q**m)
    for pair in (a * b, a * c, a * d, b * c, b * d, c * d):
        C *= 1.0 - qm1 * pair
    C /= d2m2 * d2m1
    return A, B, C


def recurrence_coeffs(m: int, p: AWParams) -> RecurrenceCoeffs:
    A, B, C = recurrence_coeffs_complex(m, p)
    return RecurrenceCoeffs(
        realize(A, "A_m"), realize(B, "B_m"), realize(C, "C_m")
    )


def aw_eval_all(mmax: int, x, p: AWParams) -> np.ndarray:
    """w_0(x), ..., w_mmax(x) by forward recurrence; ``x`` may be an array.

    Returns a complex array of shape ``(mmax + 1,) + shape(x)``.
    """
    x = np.asarray(x, dtype=complex)
    out = np.empty((mmax + 1,) + x.shape, dtype=complex)
    out[0] = 1.0
    prev = np.zeros_like(x)
    for m in range(mmax):
        A, B, C = recurrence_coeffs_complex(m, p)
        out[m + 1] = ((2.0 * x - B) * out[m] - C * prev) / A
        prev = out[m]
    return out


def aw_eval(m: int, x: float, p: AWParams) -> float:
    return realize(aw_eval_all(int(m), x, p)[m], "w_m(x)")


def aw_norm_factors(mmax: int, p: AWParams) -> np.ndarray:
    """(ab; q)_m for m = 0..mmax."""
    ab = p.a * p.b
    out = np.empty(mmax + 1, dtype=complex)
    out[0] = 1.0
    for m in range(mmax):
        out[m + 1] = out[m] * (1.0 - ab * p.q**m)
    return out


def aw_norm_eval_all(mmax: int, x, p: AWParams) -> np.ndarray:
    w = aw_eval_all(mmax, x, p)
    norms = aw_norm_factors(mmax, p)
    if np.any(np.abs(norms) < _ZERO_TOL):
        raise NormalizerZero("(ab; q)_m vanishes")
    return w / norms.reshape((-1,) + (1,) * (w.ndim - 1))


def aw_norm_eval(m: int, x: float, p: AWParams) -> float:
    return realize(aw_norm_eval_all(int(m), x, p)[m], "wbar_m(x)")


def scaled_params(bp, t: float) -> AWParams:
    """(A sqrt t, B sqrt t, C / sqrt t, D / sqrt t; q)."""
    r = math.sqrt(t)
    return AWParams(bp.A * r, bp.B * r, bp.C / r, bp.D / r, bp.q)


def proj_poly_eval_all(mmax: int, x, t: float, bp) -> np.ndarray:
    """p_m(x; t) = t^{m/2} wbar_m(x; A sqrt t, B sqrt t, C/sqrt t, D/sqrt t)."""
    if not t > 0:
        raise InvalidParameter("t must be positive")
    wb = aw_norm_eval_all(mmax, x, scaled_params(bp, t))
    powers = np.sqrt(t) ** np.arange(mmax + 1)
    return wb * powers.reshape((-1,) + (1,) * (wb.ndim - 1))


def proj_poly_eval(m: int, x: float, t: float, bp) -> float:
    return realize(proj_poly_eval_all(int(m), x, t, bp)[m], "p_m(x;t)")


def transition_partner(x, s: float, t: float) -> tuple[complex, complex]:
    """The pair sqrt(s/t) (x +- sqrt(x^2 - 1)) used by the transition kernel."""
    x = complex(x)
    root = cmath.sqrt(x * x - 1.0)
    r = math.sqrt(s / t)
    up, down = x + root, x - root
    if abs(up) < abs(down):
        up, down = down, up
    return r * up, r * down


def q_poly_eval_all(mmax: int, y, x: float, t: float, s: float, bp) -> np.ndarray:
    """Q_m(y; x, t, s) = t^{m/2} wbar_m(y; A sqrt t, B sqrt t, c~, d~)."""
    ct, dt = transition_partner(x, s, t)
    r = math.sqrt(t)
    p = AWParams(bp.A * r, bp.B * r, ct, dt, bp.q)
    wb = aw_norm_eval_all(mmax, y, p)
    powers = r ** np.arange(mmax + 1)
    return wb * powers.reshape((-1,) + (1,) * (wb.ndim - 1))


def connection_coeffs(
    m: int,
    p: AWParams,
    c_new,
    d_new,
    trunc: TruncationSpec = DEFAULT_TRUNC,
    mode: str = "phi43",
) -> np.ndarray:
    """Coefficients cbar_{r,m}, r = 0..m, with
    wbar_m(.; a, b, c_new, d_new) = sum_r cbar_{r,m} wbar_r(.; a, b, c, d).

    ``mode="phi43"`` uses the closed 4phi3 expression (needs ``a != 0`` and
    ``q > 0``); ``mode="solve"`` recovers the same numbers from a linear solve
    on point evaluations and serves as an independent check.
    """
    m = int(m)
    q = p.q
    a, b, c, d = p.params
    c_new, d_new = complex(c_new), complex(d_new)
    for z, what in ((a * b, "ab"), (p.abcd, "abcd")):
        if inverse_qpower_index(z, q, tol=1e-12) is not None:
            raise NormalizerZero(f"{what} lies on the q^-l grid")
    if mode == "solve":
        return _connection_solve(m, p, c_new, d_new)
    if mode != "phi43":
        raise InvalidParameter(f"unknown mode {mode!r}")
    if a == 0:
        raise RequiresNonzeroA("the 4phi3 connection formula needs a != 0")
    if q == 0.0:
        raise InvalidParameter("the 4phi3 connection formula needs q > 0; use mode='solve'")
    abcd = p.abcd
    abcd_new = a * b * c_new * d_new
    out = np.empty(m + 1, dtype=complex)
    for r in range(m + 1):
        num = qpoch_finite(q**-m, q, r) * qpoch_finite(q ** (m - 1) * abcd_new, q, r)
        # (a c~, a d~)_m / (a c~, a d~)_r without forming either side
        tail = qpoch_finite(a * c_new * q**r, q, m - r) * qpoch_finite(a * d_new * q**r, q, m - r)
        den = a ** (m - r) * qpoch_finite(q, q, r) * qpoch_finite(q ** (r - 1) * abcd, q, r)
        series = phi43(
            (q ** (r - m), abcd_new * q ** (m + r - 1), a * c * q**r, a * d * q**r),
            (abcd * q ** (2 * r), a * c_new * q**r, a * d_new * q**r),
            q,
            q,
            trunc,
        )
        out[r] = (-1) ** r * q ** (r * (r + 1) / 2) * num * tail / den * series
    return out


def _connection_solve(m: int, p: AWParams, c_new, d_new) -> np.ndarray:
    # Chebyshev-like sample points keep the collocation system well conditioned
    xs = np.cos(np.pi * (np.arange(m + 1) + 0.5) / (m + 1))
    basis = aw_norm_eval_all(m, xs, p)  # (m+1, npts)
    target = aw_norm_eval_all(m, xs, AWParams(p.a, p.b, c_new, d_new, p.q))[m]
    return np.linalg.solve(basis.T, target)
