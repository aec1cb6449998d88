"""Verification runner: numerical checks of every identity and limit the
package implements, grouped into suites.

Each check returns a :class:`Check` holding the worst residual it saw and the
threshold it was held to.  ``run`` executes suites and returns a JSON-ready
report; ``format_table`` renders it for humans.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import asymptotics as asy
from . import oracle, usw
from .asepmap import (ASEPRates, BoundaryParams, abcd_to_rates, admissible_time, choose_epsilon,
                      particle_hole_rates, rates_to_abcd)
from .awmeasure import measure_build, orth_norm, orthogonality_matrix, total_variation
from .awpoly import AWParams, aw_norm_eval_all, connection_coeffs, scaled_params
from .corpus import aw_corpus, boundary_corpus, kernel_points, named_points, time_pair
from .errors import SingularCase
from .multitime import (chapman_kolmogorov_residual, marginal_measure, pin_integral,
                        projection_check, support_points, transition_measure)
from .qcore import inverse_qpower_index, phi43, qpoch_finite, qpoch_inf


@dataclass
class Check:
    name: str
    value: float
    limit: float
    passed: bool
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)


def _check(name: str, value: float, limit: float, **detail) -> Check:
    ok = bool(np.isfinite(value) and value <= limit)
    return Check(name, float(value), float(limit), ok, detail=_plain(detail))


def _plain(obj):
    """Turn numpy scalars and arrays into JSON-friendly Python values."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _timed(fn: Callable[[], Check]) -> Check:
    t0 = time.perf_counter()
    c = fn()
    c.seconds = round(time.perf_counter() - t0, 3)
    return c


# ------------------------------------------------------------------ q-series


def check_qseries() -> Check:
    """Euler's identity, the product shift rule and a terminating q-Pfaff–Saalschütz sum."""
    worst = 0.0
    for q in (0.1, 0.35, 0.6, 0.85):
        for z in (-0.7, 0.3, 0.5 + 0.4j):
            # sum z^k / (q)_k = 1 / (z)_inf
            k = np.arange(400)
            terms = [z**j / qpoch_finite(q, q, j) for j in k]
            lhs = sum(terms)
            worst = max(worst, abs(lhs * qpoch_inf(z, q) - 1))
            # (z)_inf = (z)_n (z q^n)_inf
            for n in (1, 5, 17):
                worst = max(worst, abs(qpoch_inf(z, q) - qpoch_finite(z, q, n) * qpoch_inf(z * q**n, q)))
        # q-Pfaff–Saalschütz: 3phi2(q^-n, a, b; c, q^{1-n} ab/c) = (c/a, c/b)_n / (c, c/(ab))_n
        a, b, c = 0.3, -0.45, 0.2
        for n in (1, 3, 6):
            tot = 0
            for j in range(n + 1):
                num = qpoch_finite(q**-n, q, j) * qpoch_finite(a, q, j) * qpoch_finite(b, q, j)
                den = (qpoch_finite(q, q, j) * qpoch_finite(c, q, j)
                       * qpoch_finite(q ** (1 - n) * a * b / c, q, j))
                tot += num / den * q**j
            rhs = (qpoch_finite(c / a, q, n) * qpoch_finite(c / b, q, n)
                   / (qpoch_finite(c, q, n) * qpoch_finite(c / (a * b), q, n)))
            worst = max(worst, abs(tot - rhs) / max(1.0, abs(rhs)))
            # same sum through the 4phi3 routine with a cancelling pair
            via = phi43((q**-n, a, b, 0.77), (c, q ** (1 - n) * a * b / c, 0.77), q, q)
            worst = max(worst, abs(via - rhs) / max(1.0, abs(rhs)))
    return _check("q-series identities", worst, 1e-12)


def check_connection() -> Check:
    """Expanding wbar_m(x; a,b,c',d') in the basis wbar_r(x; a,b,c,d) reproduces it pointwise."""
    worst = 0.0
    p = AWParams(0.5, -0.3, 0.4, -0.2, 0.45)
    c2, d2 = 0.7 + 0.2j, 0.7 - 0.2j
    pp = AWParams(0.5, -0.3, c2, d2, 0.45)
    xs = np.linspace(-0.95, 0.95, 11)
    M = 6
    W = aw_norm_eval_all(M, xs, p)
    Wp = aw_norm_eval_all(M, xs, pp)
    # the terminating 4phi3 sum cancels like q^-m, so it is held to m <= 4
    for mode, mmax in (("phi43", 4), ("solve", M)):
        for m in range(mmax + 1):
            cf = connection_coeffs(m, p, c2, d2, mode=mode)
            rec = sum(cf[r] * W[r] for r in range(m + 1))
            scale = float(np.max(np.abs(Wp[m])))
            worst = max(worst, float(np.max(np.abs(rec - Wp[m]))) / max(scale, 1.0))
    return _check("connection coefficients", worst, 1e-8)


# ------------------------------------------------------------------ measures


def check_mass_one(kernel_nodes: int = 400) -> Check:
    """Total mass 1 for pi_t and for P_{s,t}(x, .) across the 60-tuple corpus."""
    worst_m = worst_k = 0.0
    count = 0
    for _, bp in boundary_corpus():
        s, t = time_pair(bp)
        times = [s, t] + ([1.0] if admissible_time(bp, 1.0).ok else [])
        for u in times:
            worst_m = max(worst_m, abs(marginal_measure(u, bp).total_mass - 1))
            count += 1
        cache: dict = {}
        for x in kernel_points(bp, s):
            P = transition_measure(s, t, x, bp, n_nodes=kernel_nodes, _cache=cache)
            worst_k = max(worst_k, abs(P.total_mass - 1))
            count += 1
    for _, p in aw_corpus():
        worst_m = max(worst_m, abs(measure_build(p).total_mass - 1))
        count += 1
    return _check("mass one (60-tuple corpus)", max(worst_m, worst_k), 1e-8,
                  marginal=worst_m, kernel=worst_k, measures=count)


def gram_residuals(p: AWParams, M: int = 7, n_nodes: int = 200) -> tuple[float, float]:
    """(off-diagonal / diagonal scale, worst relative diagonal error)."""
    G = orthogonality_matrix(p, M, n_nodes)
    d = np.array([orth_norm(i, p) for i in range(M)])
    scale = float(np.max(np.abs(d)))
    off = float(np.max(np.abs(G - np.diag(np.diag(G))))) / scale
    rel = 0.0
    for i in range(M):
        if abs(d[i]) > 1e-12 * scale:
            rel = max(rel, abs(G[i, i] / d[i] - 1))
        else:
            # vanishing closed-form norm: compare on the absolute scale
            rel = max(rel, abs(G[i, i]) / scale)
    return off, rel


def check_orthogonality() -> Check:
    worst_off = worst_rel = 0.0
    pts = boundary_corpus()[::2]
    for _, bp in pts:
        t = 1.0 if admissible_time(bp, 1.0).ok else time_pair(bp)[1]
        off, rel = gram_residuals(scaled_params(bp, t))
        worst_off, worst_rel = max(worst_off, off), max(worst_rel, rel)
    return _check("orthogonality (Gram m,k <= 6, 20 points)", max(worst_off, worst_rel), 1e-7,
                  off_diagonal=worst_off, diagonal=worst_rel, points=len(pts))


# ------------------------------------------------------------------ projection


def projection_points() -> list:
    corpus = boundary_corpus()
    fan = [bp for k, bp in corpus if k == "fan"][:2]
    shock = [bp for k, bp in corpus if k in ("hd-shock", "ld-shock")][::10]
    return fan + shock + [named_points()["hd-shock"]]


def check_projection(mmax: int = 5, n_nodes: int = 400) -> Check:
    """int p_m(y; t) P_{s,t}(x, dy) = p_m(x; s) at atoms and 5 interior points."""
    worst = 0.0
    n = 0
    for bp in projection_points():
        s, t = time_pair(bp)
        supp = support_points(s, bp)
        xs = [y for y in supp.atoms if abs(y) != 1.0] + [0.62, -0.41, 0.13, -0.87, 0.95]
        for x in xs:
            for m in range(mmax + 1):
                r = projection_check(m, s, t, x, bp, n_nodes=n_nodes)
                worst = max(worst, r)
                n += 1
    return _check("projection formula (m <= 5)", worst, 1e-7, evaluations=n)


# ------------------------------------------------------------------ MPA vs oracle


def random_rates(count: int = 20, seed: int = 99) -> list:
    """Random rate tuples; the first two have gamma = delta = 0 and q = 0."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        k = len(out)
        alpha, beta = rng.uniform(0.2, 2.5, size=2)
        gamma, delta = (0.0, 0.0) if k in (0, 2) else rng.uniform(0.0, 1.2, size=2)
        q = 0.0 if k in (1, 2) else rng.uniform(0.0, 0.8)
        r = ASEPRates(float(alpha), float(beta), float(gamma), float(delta), float(q))
        try:
            bp = rates_to_abcd(r)
        except SingularCase:
            continue
        # keep away from the singular grid so that the ansatz is well conditioned
        if inverse_qpower_index(bp.abcd, bp.q, 1e-3) is not None:
            continue
        out.append(r)
    return out


def check_mpa_oracle(ns=range(1, 9), vectors: int = 5, seed: int = 5) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for r in random_rates():
        bp = rates_to_abcd(r)
        for n in ns:
            dist = oracle.stationary(n, r)
            for _ in range(vectors):
                ts = rng.uniform(0.1, 2.0, size=n)
                a = usw.gen_fn(n, ts, bp)
                b = oracle.oracle_gen_fn(n, r, ts, dist)
                worst = max(worst, abs(a - b) / abs(b))
    return _check("matrix ansatz vs generator solve", worst, 1e-9)


def check_golden() -> Check:
    tasep = ASEPRates(1, 1, 0, 0, 0)
    probs = oracle.stationary(2, tasep).probs
    # site strings 00, 01, 10, 11 carry 1/5, 1/5, 2/5, 1/5; index = sum tau_i 2^(i-1)
    err = float(np.max(np.abs(probs - np.array([0.2, 0.4, 0.2, 0.2]))))
    # AC = 1: product Bernoulli(A / (1 + A))
    bp = named_points()["bernoulli"]
    r = abcd_to_rates(bp)
    rho = bp.A / (1 + bp.A)
    for n in (1, 3, 6):
        dist = oracle.stationary(n, r)
        occ = oracle.occupation_table(n)
        k = occ.sum(axis=1)
        expect = rho**k * (1 - rho) ** (n - k)
        err = max(err, float(np.max(np.abs(dist.probs - expect))))
        ts = np.linspace(0.3, 1.7, n)
        err = max(err, abs(usw.gen_fn(n, ts, bp) - float(np.prod(1 - rho + rho * ts))))
    return _check("golden values (TASEP n=2, Bernoulli product)", err, 1e-12)


def check_particle_hole(n: int = 4) -> Check:
    worst = 0.0
    for r in random_rates(6, seed=3):
        mu = oracle.stationary(n, r).probs
        nu = oracle.stationary(n, particle_hole_rates(r)).probs
        rc = oracle.reverse_complement(np.arange(1 << n), n)
        worst = max(worst, float(np.max(np.abs(mu - nu[rc]))))
    return _check(f"particle-hole duality (oracle, n={n})", worst, 1e-12)


# ------------------------------------------------------------------ signed-measure integral


def pin_points() -> list:
    corpus = boundary_corpus()
    shocks = [bp for k, bp in corpus if k in ("hd-shock", "ld-shock")][::5]
    return [named_points()["hd-shock"]] + shocks


FRACTIONS = {1: (0.5,), 2: (1.0, 0.5), 3: (1.0, 0.6, 0.3), 4: (1.0, 0.75, 0.5, 0.25)}


def check_pin(nmax: int = 4, n_nodes: int = 400, points=None) -> Check:
    """Iterated signed-measure integral of prod(1 + t_i + 2 sqrt(t_i) x_i) vs the ansatz."""
    worst = 0.0
    runs = 0
    for bp in points if points is not None else pin_points():
        for n in range(1, nmax + 1):
            eps = choose_epsilon(bp, FRACTIONS[n], eps_max=0.3)
            ts = sorted(1.0 - eps * f for f in FRACTIONS[n])
            lhs = pin_integral(ts, bp, n_nodes=n_nodes)
            rhs = float(usw.pi_n(ts, bp))
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
            runs += 1
    return _check("signed-measure integral vs ansatz (n <= 4)", worst, 1e-5, runs=runs)


# ------------------------------------------------------------------ structural


def check_delta(n_nodes: int = 200) -> Check:
    """P_{s,t}(y0^a(s), .) is the unit point mass at y0^a(t)."""
    worst = 0.0
    pts = [named_points()["hd-shock"]] + [bp for k, bp in boundary_corpus() if k == "hd-shock"][:4]
    for bp in pts:
        s, t = time_pair(bp)
        ya_s = support_points(s, bp).y0_a
        ya_t = support_points(t, bp).y0_a
        if ya_s is None:
            continue
        P = transition_measure(s, t, ya_s, bp, n_nodes=n_nodes)
        at = [a for a in P.atoms if a.mass != 0]
        res = abs(P.total_mass - 1)
        res = max(res, float(np.max(np.abs(P.node_f))) if P.node_f.size else 0.0)
        res = max(res, sum(abs(a.mass) for a in at if abs(a.position - ya_t) > 1e-12))
        res = max(res, abs(sum(a.mass for a in at if abs(a.position - ya_t) <= 1e-12) - 1))
        worst = max(worst, res)
    return _check("delta property at y0^a", worst, 1e-9)


def check_chapman_kolmogorov(n_nodes: int = 400) -> Check:
    worst = 0.0
    fs = (lambda z: np.ones_like(z), lambda z: z, lambda z: z * z)
    for bp in (named_points()["hd-shock"], [bp for k, bp in boundary_corpus() if k == "fan"][0]):
        eps = choose_epsilon(bp, (1.0, 0.6, 0.3), eps_max=0.3)
        s, u, t = sorted(1.0 - eps * f for f in (1.0, 0.6, 0.3))
        supp = support_points(s, bp)
        for x in [y for y in supp.atoms if abs(y) != 1.0] + [0.3, -0.5]:
            for f in fs:
                worst = max(worst, chapman_kolmogorov_residual(s, u, t, x, bp, f, n_nodes=n_nodes))
    return _check("Chapman-Kolmogorov on 1, x, x^2", worst, 1e-6)


# ------------------------------------------------------------------ asymptotics


HD_GRID = asy.LaplaceGrid((0.3, 0.6, 1.0), (1.0, 0.5, 0.8))
CL_GRID = asy.LaplaceGrid((0.25, 0.5, 1.0), (1.0, 0.5, 0.8))


def check_zn_hd(n: int = 200) -> Check:
    bp = named_points()["hd"]
    return _check(f"Z_n high density ratio (n={n})", abs(asy.zn_ratio(n, bp) - 1), 0.005)


def check_zn_coexistence(n: int = 1000) -> Check:
    bp = named_points()["coexistence"]
    e1 = abs(asy.zn_ratio(n, bp) - 1)
    e2 = abs(asy.zn_ratio(2 * n, bp) - 1)
    trend = e2 < 0.7 * e1
    c = _check(f"Z_n coexistence ratio (n={n})", e1, 0.02, error_2n=e2, trend=trend)
    c.passed = c.passed and trend
    return c


def check_profile_hd(n: int = 500) -> Check:
    bp = named_points()["hd"]
    rho = usw.one_point(n, n // 2, bp)
    return _check(f"high density bulk density (n={n})",
                  abs(rho - asy.density_profile_prediction(0.5, bp)), 1e-3)


def coexistence_profile_error(n: int) -> float:
    bp = named_points()["coexistence"]
    rho = usw.one_point_all(n, bp)
    x = np.arange(1, n + 1) / n
    pred = np.array([asy.density_profile_prediction(xi, bp) for xi in x])
    return float(np.max(np.abs(rho - pred)))


def check_profile_coexistence(n: int = 400) -> Check:
    e1 = coexistence_profile_error(n // 2)
    e2 = coexistence_profile_error(n)
    c = _check(f"coexistence linear profile (n={n})", e2, 5e-2, error_half_n=e1, decreasing=e2 < e1)
    c.passed = c.passed and e2 < e1
    return c


def check_variance(n: int = 200) -> Check:
    bp = named_points()["hd"]
    v = usw.height_variance(n, bp) / n
    pred = asy.fluctuation_variance(1.0, bp)
    return _check(f"Var(h_n(1))/n relative error (n={n})", abs(v / pred - 1), 0.05)


def check_hd_laplace(n: int = 400) -> Check:
    bp = named_points()["hd"]
    val = asy.hd_laplace_empirical(n, HD_GRID, bp)
    lim = asy.hd_laplace_limit(HD_GRID, bp.A)
    gauss = asy.hd_laplace_gaussian(HD_GRID, bp.A)
    c = _check(f"high density Laplace transform (n={n})", abs(val / lim - 1), 0.02,
               gaussian_vs_closed_form=abs(gauss / lim - 1))
    c.passed = c.passed and abs(gauss / lim - 1) < 1e-12
    return c


def check_cl_laplace(n: int = 400, samples: int = 10_000_000) -> Check:
    bp = named_points()["coexistence"]
    lim = asy.cl_laplace_limit(CL_GRID, bp.A)
    e1 = abs(asy.cl_laplace_empirical(n, CL_GRID, bp) / lim - 1)
    e2 = abs(asy.cl_laplace_empirical(2 * n, CL_GRID, bp) / lim - 1)
    mc, se = asy.cl_laplace_monte_carlo(CL_GRID, bp.A, samples=samples)
    quad = asy.cl_laplace_quadrature(CL_GRID, bp.A)
    z = abs(mc - lim) / se
    c = _check(f"coexistence Laplace transform (n={n})", e1, 0.05, error_2n=e2,
               monte_carlo_z=z, quadrature_error=abs(quad - lim))
    c.passed = c.passed and e2 < e1 and z <= 3 and abs(quad - lim) < 1e-10
    return c


def tv_slope(ns=(10, 20, 40, 80, 160, 320), s: float = 1.0, n_nodes: int = 400) -> tuple[float, list]:
    bp = named_points()["coexistence"]
    tvs = [total_variation(marginal_measure(math.exp(-s / n), bp, n_nodes)) for n in ns]
    slope = float(np.polyfit(np.log(ns), np.log(tvs), 1)[0])
    return slope, tvs


def check_tv() -> Check:
    slope, tvs = tv_slope()
    return _check("total variation log-log slope", slope, 2.2, tv=tvs)


# ------------------------------------------------------------------ suites

SUITES: dict[str, list[Callable[[], Check]]] = {
    "qseries": [check_qseries, check_connection],
    "measure": [check_mass_one, check_orthogonality, check_tv],
    "projection": [check_projection, check_delta, check_chapman_kolmogorov],
    "mpa-oracle": [check_mpa_oracle, check_golden, check_particle_hole],
    "theorem1": [check_pin],
    "asymptote": [check_zn_hd, check_zn_coexistence, check_profile_hd, check_profile_coexistence,
                  check_variance, check_hd_laplace, check_cl_laplace],
}
SUITE_NAMES = tuple(SUITES) + ("all",)


def run(suite: str = "all") -> dict:
    if suite not in SUITE_NAMES:
        raise ValueError(f"unknown suite {suite!r}")
    names = list(SUITES) if suite == "all" else [suite]
    rows = []
    for nm in names:
        for fn in SUITES[nm]:
            c = _timed(fn)
            rows.append({"suite": nm, **asdict(c)})
    return {"suite": suite, "passed": all(r["passed"] for r in rows), "checks": rows}


def format_table(report: dict) -> str:
    lines = [f"{'suite':<11} {'check':<48} {'value':>11} {'limit':>9}  {'status':<6} {'sec':>7}"]
    for r in report["checks"]:
        lines.append(f"{r['suite']:<11} {r['name'][:48]:<48} {r['value']:>11.3e} {r['limit']:>9.1e}  "
                     f"{'PASS' if r['passed'] else 'FAIL':<6} {r['seconds']:>7.2f}")
    lines.append("overall: " + ("PASS" if report["passed"] else "FAIL"))
    return "\n".join(lines)
