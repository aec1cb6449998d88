"""Time-indexed measures pi_t, kernels P_{s,t}(x, .) and the integral form of Pi_n."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .asepmap import BoundaryParams, PhaseName, admissible_time, classify_phase
from .awmeasure import (
    DEFAULT_RULE,
    Atom,
    SignedMeasure,
    _atom_masses,
    atoms as measure_atoms,
    measure_build,
    theta_nodes,
)
from .awpoly import AWParams, proj_poly_eval_all, scaled_params, transition_partner
from .errors import InadmissiblePair, InadmissibleTime, XOutsideSupport
from .qcore import DEFAULT_TRUNC, TruncationSpec, qpoch_inf_array

SNAP_TOL = 1e-10


@dataclass
class SupportSet:
    t: float
    atoms: list
    has_continuum: bool = True
    y0_a: float | None = None
    y0_c: float | None = None
    y1_star: float = 1.0
    # (generator, level) of every atom, aligned with ``atoms``
    labels: list = field(default_factory=list)


def _check_time(t: float, bp: BoundaryParams, tol: float):
    adm = admissible_time(bp, t, tol=tol)
    if not adm.ok:
        bad = [k for k, v in adm.conditions.items() if not v]
        raise InadmissibleTime(f"t={t} is not admissible: {', '.join(bad)}")


def marginal_measure(t: float, bp: BoundaryParams, n_nodes: int = 200,
                     trunc: TruncationSpec = DEFAULT_TRUNC, tol: float = 1e-9,
                     rule: str = DEFAULT_RULE) -> SignedMeasure:
    """pi_t = nu(A sqrt t, B sqrt t, C / sqrt t, D / sqrt t)."""
    _check_time(t, bp, tol)
    return measure_build(scaled_params(bp, t), n_nodes, trunc, tol, rule)


def support_points(t: float, bp: BoundaryParams, tol: float = 1e-9,
                   trunc: TruncationSpec = DEFAULT_TRUNC) -> SupportSet:
    _check_time(t, bp, tol)
    ats = measure_atoms(scaled_params(bp, t), trunc, tol)
    y0a = next((a.position for a in ats if a.generator == "a" and a.level == 0), None)
    y0c = next((a.position for a in ats if a.generator == "c" and a.level == 0), None)
    coex = classify_phase(bp, tol).phase is PhaseName.COEXISTENCE
    excluded = {y0a} | ({y0c} if coex else set())
    rest = [a.position for a in ats if a.position not in excluded]
    return SupportSet(
        t=t,
        atoms=[a.position for a in ats],
        y0_a=y0a,
        y0_c=y0c,
        y1_star=max([1.0] + rest),
        labels=[(a.generator, a.level) for a in ats],
    )


def _locate(x: float, supp: SupportSet, tol: float = SNAP_TOL):
    """(generator, level) if x is an atom of U_s, 'interior' if |x| <= 1, else None."""
    for pos, lab in zip(supp.atoms, supp.labels):
        if abs(x - pos) <= tol * max(1.0, abs(pos)):
            return lab
    if abs(x) <= 1.0 + tol:
        return "interior"
    return None


def _delta(x: float, p: AWParams) -> SignedMeasure:
    return SignedMeasure(p, (Atom(float(x), 1.0, "x", 0),), np.empty(0), np.empty(0),
                         np.empty(0), DEFAULT_TRUNC, 1.0)


def transition_measure(s: float, t: float, x: float, bp: BoundaryParams, n_nodes: int = 200,
                       trunc: TruncationSpec = DEFAULT_TRUNC, tol: float = 1e-9,
                       _cache: dict | None = None, rule: str = DEFAULT_RULE) -> SignedMeasure:
    """P_{s,t}(x, dy) = nu(dy; A sqrt t, B sqrt t, c~, d~) with
    c~, d~ = sqrt(s/t) (x +- sqrt(x^2 - 1))."""
    if s == t:
        return _delta(x, scaled_params(bp, t))
    if not s < t:
        raise InadmissiblePair("transition kernels need s < t")
    for u in (s, t):
        if not admissible_time(bp, u, tol=tol).ok:
            raise InadmissiblePair(f"time {u} is not admissible")
    if not admissible_time(bp, t, s_opt=s, tol=tol).ok:
        raise InadmissiblePair(f"s/t = {s / t} lies on q^Z")

    cache = _cache if _cache is not None else {}
    key = ("supp", s)
    if key not in cache:
        cache[key] = support_points(s, bp, tol, trunc)
    where = _locate(x, cache[key])
    if where is None:
        raise XOutsideSupport(f"x={x} is not in U_s")
    key = ("supp", t)
    if key not in cache:
        cache[key] = support_points(t, bp, tol, trunc)
    supp_t = cache[key]

    rt = math.sqrt(t)
    a, b = bp.A * rt, bp.B * rt
    q = bp.q
    if where != "interior" and where[0] == "a":
        # x = y_j^a(s): a d~ = q^-j, so only the a-atoms of level <= j survive
        j = where[1]
        E = bp.A * math.sqrt(s) * q**j
        ct, dt = math.sqrt(s / t) * E, math.sqrt(s / t) / E
        p = AWParams(a, b, ct, dt, q)
        masses = _atom_masses(complex(a), (complex(b), complex(ct), complex(dt)), q, j, trunc)
        ats = []
        for k in range(j + 1):
            z = a * q**k
            pos = 0.5 * (z + 1.0 / z) if abs(abs(z) - 1.0) > 1e-12 else math.copysign(1.0, z)
            ats.append(Atom(_snap(pos, supp_t), float(masses[k].real), "a", k))
        ats.sort(key=lambda at: -at.position)
        theta, w = theta_nodes(n_nodes, rule)
        x_nodes = np.cos(theta)
        order = np.argsort(x_nodes)
        node_w = (w * np.sin(theta))[order]
        total = math.fsum(at.mass for at in ats)
        return SignedMeasure(p, tuple(ats), x_nodes[order], node_w, np.zeros(n_nodes), trunc, total)

    ct, dt = transition_partner(x, s, t)
    if where == "interior" and abs(x) < 1.0:
        dt = ct.conjugate()
    else:
        ct, dt = complex(ct.real), complex(dt.real)
    p = AWParams(a, b, ct, dt, q)
    m = measure_build(p, n_nodes, trunc, tol, rule)
    ats = tuple(Atom(_snap(at.position, supp_t), at.mass, at.generator, at.level)
                for at in m.atoms)
    return SignedMeasure(p, ats, m.node_x, m.node_w, m.node_f, trunc, m.total_mass)


def _snap(pos: float, supp: SupportSet) -> float:
    for y in supp.atoms:
        if abs(pos - y) <= SNAP_TOL * max(1.0, abs(y)):
            return y
    return pos


def _integrate_table(m: SignedMeasure, atom_vals: dict, node_vals: np.ndarray) -> float:
    terms = [at.mass * atom_vals[at.position] for at in m.atoms if at.mass != 0.0]
    terms.extend(m.node_w * m.node_f * node_vals)
    return math.fsum(terms)


def interior_kernels(s: float, t: float, xs: np.ndarray, bp: BoundaryParams, n_nodes: int,
                     trunc: TruncationSpec = DEFAULT_TRUNC, tol: float = 1e-9,
                     rule: str = DEFAULT_RULE, supp_t: SupportSet | None = None):
    """Kernels P_{s,t}(x, .) for many interior x in (-1, 1) at once.

    Returns ``(atom_pos, atom_mass, node_x, node_sw)``: positions of the
    atoms of U_t generated by A sqrt t, a ``(len(xs), n_atoms)`` mass
    table, the ascending node abscissae and a ``(len(xs), n_nodes)`` table
    of signed node weights.  Agrees with :func:`transition_measure` pointwise.
    """
    xs = np.asarray(xs, dtype=float)
    if np.any(np.abs(xs) >= 1.0):
        raise XOutsideSupport("interior_kernels needs |x| < 1")
    if supp_t is None:
        supp_t = support_points(t, bp, tol, trunc)
    q = bp.q
    rt = math.sqrt(t)
    a, b = bp.A * rt, bp.B * rt
    r = math.sqrt(s / t)
    ct = r * np.exp(1j * np.arccos(xs))  # d~ = conj(c~)

    theta, w = theta_nodes(n_nodes, rule)
    order = np.argsort(np.cos(theta))
    theta, w = theta[order], w[order]
    eit = np.exp(1j * theta)

    # x-dependent constant (q, ab, ac~, ad~, bc~, bd~, c~d~)_inf / (ab c~ d~)_inf
    K = np.full(xs.shape, complex(1.0))
    for z in (q, a * b, r * r):
        K = K * qpoch_inf_array(np.array([z]), q, trunc)[0]
    for z in (a * ct, a * ct.conj(), b * ct, b * ct.conj()):
        K = K * qpoch_inf_array(z, q, trunc)
    K = K / qpoch_inf_array(np.array([a * b * r * r]), q, trunc)[0]

    top = np.abs(qpoch_inf_array(q * eit**2, q, trunc)) ** 2 * 4.0 * np.sin(theta) ** 2
    bot_y = np.ones_like(eit)
    for z in (a, b):
        if z != 0:
            bot_y = bot_y * qpoch_inf_array(z * eit, q, trunc) * qpoch_inf_array(z / eit, q, trunc)
    c_plus = np.abs(qpoch_inf_array(ct[:, None] * eit[None, :], q, trunc)) ** 2
    c_minus = np.abs(qpoch_inf_array(ct[:, None] / eit[None, :], q, trunc)) ** 2
    dens = (K[:, None] * top[None, :] / (bot_y[None, :] * c_plus * c_minus)).real / (2 * np.pi)
    node_sw = dens * w[None, :]

    a_atoms = [(pos, lab[1]) for pos, lab in zip(supp_t.atoms, supp_t.labels) if lab[0] == "a"]
    pos = np.array([p_ for p_, _ in a_atoms])
    mass = np.zeros((xs.size, len(a_atoms)))
    if a_atoms:
        jmax = max(j for _, j in a_atoms)
        for i, c in enumerate(ct):
            ms = _atom_masses(complex(a), (complex(b), c, c.conjugate()), q, jmax, trunc)
            for k, (y, j) in enumerate(a_atoms):
                mass[i, k] = 0.0 if abs(y) == 1.0 else ms[j].real
    return pos, mass, np.cos(theta), node_sw


def pin_integral(ts, bp: BoundaryParams, n_nodes: int = 400,
                 trunc: TruncationSpec = DEFAULT_TRUNC, tol: float = 1e-9,
                 rule: str = DEFAULT_RULE) -> float:
    """int prod (1 + t_i + 2 sqrt(t_i) x_i) pi_{t_1..t_n}(dx) by backward induction."""
    ts = [float(t) for t in ts]
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise InadmissiblePair("times must be non-decreasing")
    for i, t in enumerate(ts):
        _check_time(t, bp, tol)
        for s in ts[:i]:
            if s != t and not admissible_time(bp, t, s_opt=s, tol=tol).ok:
                raise InadmissiblePair(f"pair ({s}, {t}) is not admissible")
    cache: dict = {}
    theta, _ = theta_nodes(n_nodes, rule)
    x_nodes = np.sort(np.cos(theta))

    def lin(t, x):
        return 1.0 + t + 2.0 * math.sqrt(t) * x

    n = len(ts)
    supp = support_points(ts[-1], bp, tol, trunc)
    cache[("supp", ts[-1])] = supp
    atom_vals = {y: lin(ts[-1], y) for y in supp.atoms}
    node_vals = lin(ts[-1], x_nodes)
    for k in range(n - 2, -1, -1):
        s, t = ts[k], ts[k + 1]
        supp = support_points(s, bp, tol, trunc)
        cache[("supp", s)] = supp
        if s == t:
            atom_vals = {y: lin(s, y) * atom_vals[y] for y in supp.atoms}
            node_vals = lin(s, x_nodes) * node_vals
            continue
        new_atoms = {}
        for y in supp.atoms:
            P = transition_measure(s, t, y, bp, n_nodes, trunc, tol, cache, rule)
            new_atoms[y] = lin(s, y) * _integrate_table(P, atom_vals, node_vals)
        pos, mass, _, node_sw = interior_kernels(s, t, x_nodes, bp, n_nodes, trunc, tol, rule,
                                                 cache[("supp", t)])
        av = np.array([atom_vals[y] for y in pos])
        inner = np.array([
            math.fsum(np.concatenate([mass[i] * av, node_sw[i] * node_vals]))
            for i in range(n_nodes)
        ])
        atom_vals, node_vals = new_atoms, lin(s, x_nodes) * inner
    pi1 = marginal_measure(ts[0], bp, n_nodes, trunc, tol, rule)
    return _integrate_table(pi1, atom_vals, node_vals)


def kernel_integrate(m: SignedMeasure, f: Callable) -> float:
    xs, ws = m.points_and_weights()
    return math.fsum(ws * np.asarray(f(xs), dtype=float))


def projection_check(mm: int, s: float, t: float, x: float, bp: BoundaryParams,
                     n_nodes: int = 200, trunc: TruncationSpec = DEFAULT_TRUNC,
                     tol: float = 1e-9, rule: str = DEFAULT_RULE) -> float:
    """|int p_m(y; t) P_{s,t}(x, dy) - p_m(x; s)|."""
    P = transition_measure(s, t, x, bp, n_nodes, trunc, tol, rule=rule)
    lhs = kernel_integrate(P, lambda y: proj_poly_eval_all(mm, y, t, bp)[mm].real)
    rhs = proj_poly_eval_all(mm, np.array([x]), s, bp)[mm, 0].real
    return abs(lhs - rhs)


def chapman_kolmogorov_residual(s: float, u: float, t: float, x: float, bp: BoundaryParams,
                                f: Callable, n_nodes: int = 400,
                                trunc: TruncationSpec = DEFAULT_TRUNC, tol: float = 1e-9,
                                rule: str = DEFAULT_RULE) -> float:
    """|int P_{s,u}(x,dy) int P_{u,t}(y,dz) f(z) - int P_{s,t}(x,dz) f(z)|.

    Inner kernels at the interior nodes of P_{s,u}(x, .) are built in one batch.
    """
    cache: dict = {}
    Psu = transition_measure(s, u, x, bp, n_nodes, trunc, tol, cache, rule)
    atom_inner = [
        kernel_integrate(transition_measure(u, t, a.position, bp, n_nodes, trunc, tol, cache, rule), f)
        if a.mass != 0.0 else 0.0
        for a in Psu.atoms
    ]
    terms = [a.mass * g for a, g in zip(Psu.atoms, atom_inner)]
    if Psu.node_x.size:
        pos, mass, node_x, node_sw = interior_kernels(u, t, Psu.node_x, bp, n_nodes, trunc, tol, rule)
        fa = np.asarray(f(pos), dtype=float) if pos.size else np.zeros(0)
        fn = np.asarray(f(node_x), dtype=float)
        inner = np.array([math.fsum(np.concatenate([mass[i] * fa, node_sw[i] * fn]))
                          for i in range(Psu.node_x.size)])
        terms.extend(Psu.node_w * Psu.node_f * inner)
    lhs = math.fsum(terms)
    rhs = kernel_integrate(transition_measure(s, t, x, bp, n_nodes, trunc, tol, cache, rule), f)
    return abs(lhs - rhs)
