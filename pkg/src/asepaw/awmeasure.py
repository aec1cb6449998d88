"""Askey-Wilson signed measures: region tests, atoms, density and quadrature."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .awpoly import AWParams, aw_eval_all
from .errors import DenominatorPole, DomainError, InvalidParameter, OutsideOmega
from .qcore import (
    DEFAULT_TRUNC,
    TruncationSpec,
    inverse_qpower_index,
    qpoch_finite,
    qpoch_inf,
    qpoch_inf_array,
    qpoch_multi,
    qpower_lattice_index,
    realize,
)

LABELS = "abcd"
_REAL_TOL = 1e-12
_UNIT_TOL = 1e-12


@dataclass
class RegionReport:
    in_omega: bool
    in_omega_tilde: bool
    violations: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"in_omega": self.in_omega, "in_omega_tilde": self.in_omega_tilde,
                "violations": list(self.violations)}


@dataclass(frozen=True)
class Atom:
    position: float
    mass: float
    generator: str
    level: int

    def as_dict(self) -> dict:
        return {"position": self.position, "mass": self.mass,
                "generator": self.generator, "level": self.level}


@dataclass(frozen=True)
class SignedMeasure:
    """Atoms plus a continuous part discretized on fixed quadrature nodes.

    ``node_w`` are the positive geometric weights (quadrature weight in
    theta times sin theta); the signed contribution of node k is
    ``node_w[k] * node_f[k]``.
    """

    params: AWParams
    atoms: tuple
    node_x: np.ndarray
    node_w: np.ndarray
    node_f: np.ndarray
    trunc: TruncationSpec = DEFAULT_TRUNC
    total_mass: float = float("nan")

    def density(self, x):
        return density_at(x, self.params, self.trunc)

    @property
    def support_atoms(self) -> list:
        return [a.position for a in self.atoms]

    def points_and_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """All support points in the fixed summation order with signed weights."""
        xs = [a.position for a in self.atoms] + list(self.node_x)
        ws = [a.mass for a in self.atoms] + list(self.node_w * self.node_f)
        return np.asarray(xs, dtype=float), np.asarray(ws, dtype=float)


def _is_real(z: complex) -> bool:
    return abs(z.imag) <= _REAL_TOL * max(1.0, abs(z))


def region_check(p: AWParams, tol: float = 1e-9) -> RegionReport:
    q = p.q
    params = dict(zip(LABELS, p.params))
    viol = []

    # (1) squares and pairwise products avoid q^-l
    c1 = True
    for i, e in enumerate(LABELS):
        for f in LABELS[i:]:
            z = params[e] * params[f]
            l = inverse_qpower_index(z, q, tol)
            if l is not None:
                c1 = False
                viol.append(f"(1) {e}{f if f != e else '^2'} = q^-{l}")

    # (2)
    c2 = True
    l = inverse_qpower_index(p.abcd, q, tol)
    if l is not None:
        c2 = False
        viol.append(f"(2) abcd = q^-{l}")

    # (3) ratios of large parameters avoid q^Z
    c3 = True
    big = [e for e in LABELS if abs(params[e]) >= 1.0]
    for i, e in enumerate(big):
        for f in big[i + 1:]:
            l = qpower_lattice_index(params[e] / params[f], q, tol)
            if l is not None:
                c3 = False
                viol.append(f"(3) {e}/{f} = q^{l}")

    # (4) reality structure and ab < 1, cd < 1
    c4 = True
    a, b, c, d = p.params
    if not (_is_real(a) and _is_real(b)):
        c4 = False
        viol.append("(4) a, b must be real")
    cd_ok = (_is_real(c) and _is_real(d)) or abs(c - d.conjugate()) <= _REAL_TOL * max(1.0, abs(c))
    if not cd_ok:
        c4 = False
        viol.append("(4) c, d must be real or a conjugate pair")
    if not (a * b).real < 1.0:
        c4 = False
        viol.append("(4) ab < 1 fails")
    if not (c * d).real < 1.0:
        c4 = False
        viol.append("(4) cd < 1 fails")

    omega = c2 and c3 and c4
    return RegionReport(in_omega=omega, in_omega_tilde=omega and c1, violations=viol)


def _require_omega(p: AWParams, tol: float = 1e-9):
    rep = region_check(p, tol)
    if not rep.in_omega:
        raise OutsideOmega("parameters outside Omega: " + "; ".join(rep.violations), rep)
    return rep


def _atom_masses(e: complex, others, q: float, jmax: int, trunc: TruncationSpec) -> list:
    """Masses p_0..p_jmax of atoms generated by ``e`` (others = remaining three)."""
    b, c, d = others
    abcd = e * b * c * d
    num = qpoch_multi((e**-2, b * c, b * d, c * d), q, trunc=trunc)
    den = qpoch_multi((b / e, c / e, d / e, abcd), q, trunc=trunc)
    if abs(den) == 0.0:
        raise DenominatorPole("atom mass denominator vanishes")
    p0 = num / den
    out = [p0]
    if jmax == 0:
        return out
    # running pieces of the non-succinct formula
    poch = 1.0 + 0.0j  # (e^2, eb, ec, ed)_j
    qpoch = 1.0 + 0.0j  # (q)_j
    prod = 1.0 + 0.0j  # prod_{l<=j} (b - q^l e)(c - q^l e)(d - q^l e)
    for j in range(1, jmax + 1):
        qj1 = q ** (j - 1)
        poch *= (1 - e * e * qj1) * (1 - e * b * qj1) * (1 - e * c * qj1) * (1 - e * d * qj1)
        qpoch *= 1 - q**j
        ql = q**j
        prod *= (b - ql * e) * (c - ql * e) * (d - ql * e)
        den_j = qpoch * (1 - e * e) * e**j * prod
        if abs(den_j) == 0.0:
            raise DenominatorPole(f"atom mass denominator vanishes at level {j}")
        out.append(p0 * q**j * (1 - e * e * q ** (2 * j)) * poch / den_j)
    return out


def atoms(p: AWParams, trunc: TruncationSpec = DEFAULT_TRUNC, tol: float = 1e-9) -> list:
    """Atoms of nu(.; a, b, c, d), ordered by position descending."""
    _require_omega(p, tol)
    q = p.q
    params = p.params
    out = []
    for i, lab in enumerate(LABELS):
        e = params[i]
        if abs(e) < 1.0 or not _is_real(e):
            continue
        er = e.real
        levels = []
        j = 0
        while abs(er * q**j) >= 1.0 - _UNIT_TOL:
            levels.append(j)
            if q == 0.0:
                break
            j += 1
        others = tuple(params[k] for k in range(4) if k != i)
        at_unit = abs(abs(er * q ** levels[-1]) - 1.0) <= _UNIT_TOL
        # a level sitting at +-1 carries mass 0; skip it for the product formula
        jmax = levels[-1] - 1 if at_unit else levels[-1]
        masses = _atom_masses(e, others, q, jmax, trunc) if jmax >= 0 else []
        for j in levels:
            z = er * q**j
            pos = 0.5 * (z + 1.0 / z)
            if j > jmax:
                pos, m = math.copysign(1.0, z), 0.0
            else:
                m = realize(masses[j], "atom mass", rtol=1e-8)
            out.append(Atom(pos, m, lab, j))
    out.sort(key=lambda a: -a.position)
    return out


def _density_prefactor(p: AWParams, trunc: TruncationSpec) -> complex:
    a, b, c, d = p.params
    q = p.q
    num = qpoch_multi((q, a * b, a * c, a * d, b * c, b * d, c * d), q, trunc=trunc)
    return num / qpoch_inf(p.abcd, q, trunc)


def _density_theta(theta: np.ndarray, p: AWParams, trunc: TruncationSpec, pref=None) -> np.ndarray:
    """f(cos theta) * sin(theta), which is smooth on [0, pi]."""
    q = p.q
    if pref is None:
        pref = _density_prefactor(p, trunc)
    eit = np.exp(1j * theta)
    # |(e^{2i theta})_inf|^2 = 4 sin^2 theta |(q e^{2i theta})_inf|^2
    top = np.abs(qpoch_inf_array(q * eit**2, q, trunc)) ** 2
    bot = np.ones_like(eit)
    for z in p.params:
        if z != 0:
            bot = bot * qpoch_inf_array(z * eit, q, trunc) * qpoch_inf_array(z / eit, q, trunc)
    vals = pref * 4.0 * np.sin(theta) ** 2 * top / bot / (2.0 * np.pi)
    return vals.real


def density_at(x, p: AWParams, trunc: TruncationSpec = DEFAULT_TRUNC):
    """Continuous part f(x; a, b, c, d) for |x| < 1 (scalar or array)."""
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) >= 1.0):
        raise DomainError("density is defined on (-1, 1) only")
    theta = np.arccos(xa)
    vals = _density_theta(np.atleast_1d(theta), p, trunc) / np.sqrt(1.0 - np.atleast_1d(xa) ** 2)
    return float(vals[0]) if xa.ndim == 0 else vals.reshape(xa.shape)


QUAD_RULES = ("gauss-legendre", "midpoint")
DEFAULT_RULE = "gauss-legendre"


def theta_nodes(n_nodes: int, rule: str = DEFAULT_RULE) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on (0, pi) for integrands of the form f(cos theta) sin theta.

    Gauss-Legendre clusters nodes at theta = 0, pi, which resolves the
    near-edge peaks caused by parameters with |e q^j| close to 1.  The
    midpoint rule (Gauss-Chebyshev in x) is uniform in theta and does better
    on peaks in the interior, e.g. kernels P_{s,t}(x, .) with s/t close to 1.
    """
    n = int(n_nodes)
    if n < 1:
        raise InvalidParameter("need at least one quadrature node")
    if rule == "midpoint":
        return np.pi * (np.arange(n) + 0.5) / n, np.full(n, np.pi / n)
    if rule == "gauss-legendre":
        u, w = np.polynomial.legendre.leggauss(n)
        return 0.5 * np.pi * (u + 1.0), 0.5 * np.pi * w
    raise InvalidParameter(f"unknown quadrature rule {rule!r}")


def measure_build(p: AWParams, n_nodes: int = 200, trunc: TruncationSpec = DEFAULT_TRUNC,
                  tol: float = 1e-9, rule: str = DEFAULT_RULE) -> SignedMeasure:
    _require_omega(p, tol)
    ats = tuple(atoms(p, trunc, tol))
    theta, w = theta_nodes(n_nodes, rule)
    fs = _density_theta(theta, p, trunc)  # f(x) sin(theta)
    x = np.cos(theta)
    s = np.sin(theta)
    # store nodes ascending in x
    order = np.argsort(x)
    x, w, fs, s = x[order], w[order], fs[order], s[order]
    node_w = w * s
    node_f = fs / s
    total = math.fsum([a.mass for a in ats] + list(node_w * node_f))
    return SignedMeasure(p, ats, x, node_w, node_f, trunc, total)


def _apply(f: Callable, xs: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(xs), dtype=float)
        if out.shape == xs.shape:
            return out
    except Exception:
        pass
    return np.array([float(f(v)) for v in xs])


def integrate(m: SignedMeasure, f: Callable) -> float:
    """Integral of ``f`` against ``m``: atoms (descending), then nodes (ascending),
    accumulated with exactly rounded summation."""
    xa = np.array([a.position for a in m.atoms])
    terms = []
    if xa.size:
        fa = _apply(f, xa)
        terms.extend(np.array([a.mass for a in m.atoms]) * fa)
    terms.extend(m.node_w * m.node_f * _apply(f, m.node_x))
    return math.fsum(terms)


def orth_norm(mm: int, p: AWParams) -> float:
    """Closed-form squared norm of w_m under nu."""
    if mm == 0:
        return 1.0
    a, b, c, d = p.params
    q = p.q
    abcd = p.abcd
    num = (1 - q ** (mm - 1) * abcd) * qpoch_multi(
        (q, a * b, a * c, a * d, b * c, b * d, c * d), q, n=mm)
    den = (1 - q ** (2 * mm - 1) * abcd) * qpoch_finite(abcd, q, mm)
    return realize(num / den, "norm")


def orthogonality_matrix(p: AWParams, M: int, n_nodes: int = 200,
                         trunc: TruncationSpec = DEFAULT_TRUNC,
                         measure: SignedMeasure | None = None,
                         rule: str = DEFAULT_RULE) -> np.ndarray:
    """G[m, k] = int w_m w_k d nu for m, k < M."""
    meas = measure if measure is not None else measure_build(p, n_nodes, trunc, rule=rule)
    xs, ws = meas.points_and_weights()
    W = aw_eval_all(M - 1, xs, p).real
    G = np.empty((M, M))
    for i in range(M):
        for k in range(i, M):
            G[i, k] = G[k, i] = math.fsum(ws * W[i] * W[k])
    return G


def total_variation(m: SignedMeasure) -> float:
    return math.fsum([abs(a.mass) for a in m.atoms] + list(m.node_w * np.abs(m.node_f)))


def _cplx(z: complex):
    return z.real if _is_real(z) else [z.real, z.imag]


def measure_to_dict(m: SignedMeasure) -> dict:
    return {
        "params": {k: _cplx(v) for k, v in zip(LABELS, m.params.params)} | {"q": m.params.q},
        "atoms": [a.as_dict() for a in m.atoms],
        "nodes": [{"x": float(x), "w": float(w), "f": float(f)}
                  for x, w, f in zip(m.node_x, m.node_w, m.node_f)],
        "total_mass": m.total_mass,
        "total_variation": total_variation(m),
    }


def measure_dump(m: SignedMeasure) -> str:
    return json.dumps(measure_to_dict(m), indent=2)
