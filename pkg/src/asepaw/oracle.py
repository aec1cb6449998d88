"""Exact stationary distribution of open ASEP on {0,1}^n by a generator solve.

States are integers with bit ``i`` holding the occupation of site ``i + 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .asepmap import ASEPRates
from .errors import InvalidParameter, SizeCap, SolveFailure

MAX_SITES = 14
DENSE_MAX_STATES = 1 << 10
ENCODING = "bit i = site i+1"


@dataclass(frozen=True)
class Generator:
    n: int
    Q: sp.csr_matrix  # row = from-state


@dataclass(frozen=True)
class StationaryDistribution:
    n: int
    probs: np.ndarray
    residual: float

    def occupations(self) -> np.ndarray:
        """(2^n, n) 0/1 matrix; column i is tau_{i+1}."""
        return occupation_table(self.n)


def occupation_table(n: int) -> np.ndarray:
    states = np.arange(1 << n)
    return ((states[:, None] >> np.arange(n)[None, :]) & 1).astype(float)


def build_generator(n: int, r: ASEPRates, max_sites: int = MAX_SITES) -> Generator:
    n = int(n)
    if n < 1:
        raise InvalidParameter("need at least one site")
    if n > max_sites:
        raise SizeCap(f"n={n} exceeds the oracle cap of {max_sites} sites")
    N = 1 << n
    states = np.arange(N)
    rows, cols, vals = [], [], []

    def add(mask, target, rate):
        if rate == 0:
            return
        src = states[mask]
        rows.append(src)
        cols.append(target[mask] if isinstance(target, np.ndarray) else target(src))
        vals.append(np.full(src.size, float(rate)))

    bit = lambda s, i: (s >> i) & 1  # noqa: E731
    for i in range(n - 1):
        a, b = bit(states, i), bit(states, i + 1)
        flip = states ^ ((1 << i) | (1 << (i + 1)))
        add((a == 1) & (b == 0), flip, 1.0)
        add((a == 0) & (b == 1), flip, r.q)
    first = bit(states, 0)
    add(first == 0, states | 1, r.alpha)
    add(first == 1, states & ~1, r.gamma)
    last = bit(states, n - 1)
    hi = 1 << (n - 1)
    add(last == 0, states | hi, r.delta)
    add(last == 1, states & ~hi, r.beta)

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    Q = sp.coo_matrix((vals, (rows, cols)), shape=(N, N)).tocsr()
    Q = Q - sp.diags(np.asarray(Q.sum(axis=1)).ravel())
    return Generator(n, Q.tocsr())


def stationary(n: int, r: ASEPRates, tol: float = 1e-10) -> StationaryDistribution:
    """Solve mu Q = 0 with sum(mu) = 1 (last balance row replaced by normalization)."""
    gen = build_generator(n, r)
    N = 1 << gen.n
    QT = gen.Q.T.tolil()
    QT[N - 1, :] = np.ones(N)
    rhs = np.zeros(N)
    rhs[-1] = 1.0
    try:
        if N <= DENSE_MAX_STATES:
            mu = np.linalg.solve(QT.toarray(), rhs)
        else:
            mu = spla.spsolve(QT.tocsc(), rhs)
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        raise SolveFailure(str(exc)) from exc
    resid = float(np.max(np.abs(gen.Q.T @ mu)))
    if not np.all(np.isfinite(mu)) or resid > tol:
        raise SolveFailure(f"stationarity residual {resid:.3g} exceeds {tol}")
    mu = np.where(np.abs(mu) < 1e-300, 0.0, mu)
    return StationaryDistribution(gen.n, mu, resid)


def oracle_gen_fn(n: int, r: ASEPRates, ts, dist: StationaryDistribution | None = None) -> float:
    """sum over states of mu(state) * prod t_i^{tau_i}."""
    ts = np.asarray(list(ts), dtype=float)
    if ts.size != n:
        raise InvalidParameter(f"expected {n} values of t, got {ts.size}")
    dist = dist or stationary(n, r)
    occ = occupation_table(n)
    weights = np.prod(np.where(occ == 1, ts[None, :], 1.0), axis=1)
    return float(dist.probs @ weights)


def occupation_moments(n: int, r: ASEPRates, dist: StationaryDistribution | None = None):
    """E[tau_i] (length n) and E[tau_i tau_j] (n x n)."""
    dist = dist or stationary(n, r)
    occ = occupation_table(n)
    mean = dist.probs @ occ
    second = occ.T @ (dist.probs[:, None] * occ)
    return mean, second


def height_moments(n: int, r: ASEPRates, xs, dist: StationaryDistribution | None = None):
    """Means and covariance of h_n(x_k) = sum_{i <= floor(n x_k)} tau_i."""
    xs = list(xs)
    if any(not 0 < x <= 1 for x in xs):
        raise InvalidParameter("xs must lie in (0, 1]")
    dist = dist or stationary(n, r)
    occ = occupation_table(n)
    H = np.stack([occ[:, : int(np.floor(n * x + 1e-12))].sum(axis=1) for x in xs], axis=1)
    mean = dist.probs @ H
    centered = H - mean
    cov = centered.T @ (dist.probs[:, None] * centered)
    return mean, cov


def reverse_complement(states: np.ndarray, n: int) -> np.ndarray:
    """Map each state to the one with sites reversed and occupations complemented."""
    occ = occupation_table(n)[states]
    rc = 1 - occ[:, ::-1]
    return (rc.astype(np.int64) << np.arange(n)).sum(axis=1)


def dist_to_dict(dist: StationaryDistribution, r: ASEPRates) -> dict:
    return {"n": dist.n, "rates": r.as_dict(), "probs": dist.probs.tolist(),
            "encoding": ENCODING, "residual": dist.residual}


def dist_dump(dist: StationaryDistribution, r: ASEPRates) -> str:
    return json.dumps(dist_to_dict(dist, r), indent=2)
