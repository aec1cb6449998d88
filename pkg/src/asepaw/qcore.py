"""q-series primitives: q-Pochhammer symbols and the terminating 4phi3.

All routines work in complex arithmetic so that complex-conjugate parameter
pairs share the code path with real ones; use :func:`realize` to get a float
back once a quantity is known to be real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DenominatorPole,
    InvalidParameter,
    NonTerminatingDivergent,
    TruncationBudgetExceeded,
)

__all__ = [
    "TruncationSpec",
    "DEFAULT_TRUNC",
    "check_q",
    "realize",
    "qpoch_finite",
    "qpoch_inf",
    "qpoch_inf_array",
    "qpoch_multi",
    "phi43",
    "inverse_qpower_index",
    "qpower_lattice_index",
]


@dataclass(frozen=True)
class TruncationSpec:
    """Tail tolerance and hard cap for infinite products and series."""

    eps: float = 1e-15
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidParameter(f"eps must be positive, got {self.eps}")
        if int(self.max_terms) < 1:
            raise InvalidParameter(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_TRUNC = TruncationSpec()


def check_q(q) -> float:
    q = float(q)
    if not 0.0 <= q < 1.0:
        raise InvalidParameter(f"q must lie in [0, 1), got {q}")
    return q


def realize(z, what: str = "value", rtol: float = 1e-10) -> float:
    """Return the real part of ``z`` after checking the imaginary part is noise."""
    z = complex(z)
    if abs(z.imag) > rtol * (1.0 + abs(z)):
        raise InvalidParameter(f"{what} should be real, got {z!r}")
    return z.real


def _n_terms(absz: float, q: float, trunc: TruncationSpec) -> int:
    # smallest N with |z| q^N < eps
    if absz < trunc.eps:
        return 0
    if q == 0.0:
        return 1
    n = int(math.ceil(math.log(trunc.eps / absz) / math.log(q)))
    n = max(n, 0)
    # guard against rounding in the logarithms
    while absz * q**n >= trunc.eps:
        n += 1
    if n > trunc.max_terms:
        raise TruncationBudgetExceeded(
            f"(z;q)_inf with |z|={absz:.3g}, q={q} needs {n} terms > {trunc.max_terms}"
        )
    return n


def qpoch_finite(z, q, n: int) -> complex:
    """(z; q)_n = prod_{j<n} (1 - z q^j)."""
    q = check_q(q)
    n = int(n)
    if n < 0:
        raise InvalidParameter("n must be non-negative")
    z = complex(z)
    out = 1.0 + 0.0j
    zq = z
    for _ in range(n):
        out *= 1.0 - zq
        zq *= q
    return out


def qpoch_inf(z, q, trunc: TruncationSpec = DEFAULT_TRUNC) -> complex:
    """(z; q)_inf, truncated once |z| q^N drops below ``trunc.eps``."""
    q = check_q(q)
    z = complex(z)
    n = _n_terms(abs(z), q, trunc)
    out = 1.0 + 0.0j
    zq = z
    for _ in range(n):
        out *= 1.0 - zq
        zq *= q
    return out


def qpoch_inf_array(z, q, trunc: TruncationSpec = DEFAULT_TRUNC) -> np.ndarray:
    """Elementwise (z; q)_inf for an array of complex arguments."""
    q = check_q(q)
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    if z.size == 0:
        return out
    n = _n_terms(float(np.max(np.abs(z))), q, trunc)
    zq = z.copy()
    for _ in range(n):
        out *= 1.0 - zq
        zq *= q
    return out


def qpoch_multi(zs: Iterable, q, n=math.inf, trunc: TruncationSpec = DEFAULT_TRUNC) -> complex:
    """(z_1, ..., z_k; q)_n as a product of single symbols; ``n`` may be ``inf``."""
    out = 1.0 + 0.0j
    for z in zs:
        if n == math.inf:
            out *= qpoch_inf(z, q, trunc)
        else:
            out *= qpoch_finite(z, q, int(n))
    return out


def inverse_qpower_index(z, q, tol: float = 1e-9, lmax: int | None = None) -> int | None:
    """Return ``l >= 0`` with ``z == q**-l`` (relative tolerance), else None."""
    z = complex(z)
    if abs(z.imag) > tol * abs(z) or z.real <= 0:
        return None
    x = z.real
    if q == 0.0:
        return 0 if abs(x - 1.0) <= tol else None
    if x < 1.0 - tol:
        return None
    l = int(round(math.log(x) / -math.log(q)))
    if lmax is not None and l > lmax:
        return None
    for cand in (l - 1, l, l + 1):
        # x q^cand against 1 avoids overflow of q^-cand for tiny q
        if cand >= 0 and abs(x * q**cand - 1.0) <= tol:
            return cand
    return None


def qpower_lattice_index(z, q, tol: float = 1e-9) -> int | None:
    """Return ``l`` in Z with ``z == q**l`` (relative tolerance), else None."""
    z = complex(z)
    if abs(z.imag) > tol * abs(z) or z.real <= 0:
        return None
    x = z.real
    if q == 0.0:
        return 0 if abs(x - 1.0) <= tol else None
    l = int(round(math.log(x) / math.log(q)))
    lq = math.log(q)
    for cand in (l - 1, l, l + 1):
        if abs(math.expm1(cand * lq - math.log(x))) <= tol:
            return cand
    return None


def phi43(
    num: Sequence,
    den: Sequence,
    q,
    z,
    trunc: TruncationSpec = DEFAULT_TRUNC,
) -> complex:
    """Basic hypergeometric 4phi3(num; den; q, z).

    The series is summed by forward term recursion. If a numerator entry is
    ``q**-m`` the sum stops at ``k = m``; otherwise it runs until the terms
    fall below ``trunc.eps`` relative to the partial sum.
    """
    q = check_q(q)
    num = [complex(a) for a in num]
    den = [complex(b) for b in den]
    if len(num) != 4 or len(den) != 3:
        raise InvalidParameter("phi43 needs 4 numerator and 3 denominator entries")
    z = complex(z)

    stop = None
    for a in num:
        m = inverse_qpower_index(a, q, tol=1e-12)
        if m is not None and (stop is None or m < stop):
            stop = m
    if z == 0 or stop == 0:
        return 1.0 + 0.0j

    limit = stop if stop is not None else trunc.max_terms
    total = 1.0 + 0.0j
    term = 1.0 + 0.0j
    qk = 1.0
    growth = 0
    prev = 1.0
    for k in range(limit):
        numf = 1.0 + 0.0j
        for a in num:
            numf *= 1.0 - a * qk
        denf = 1.0 - q * qk
        for b in den:
            f = 1.0 - b * qk
            if abs(f) < 1e-14:
                raise DenominatorPole(f"(b;q)_{k + 1} vanishes for b={b!r}")
            denf *= f
        term = term * numf / denf * z
        total += term
        qk *= q
        if stop is None:
            mag = abs(term)
            if mag <= trunc.eps * max(abs(total), 1e-300):
                return total
            growth = growth + 1 if mag > prev else 0
            if growth > 50:
                raise NonTerminatingDivergent("4phi3 terms keep growing")
            prev = mag
    if stop is None:
        raise TruncationBudgetExceeded("4phi3 did not converge within max_terms")
    return total
