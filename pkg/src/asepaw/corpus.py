"""Deterministic parameter sets covering the phase diagram, used by the
verification runner and the test suite."""

from __future__ import annotations

import math

import numpy as np

from .asepmap import BoundaryParams, admissible_times, classify_phase, PhaseName
from .awpoly import AWParams
from .qcore import qpower_lattice_index

CLASSES = ("fan", "hd-shock", "ld-shock", "near-coexistence", "conjugate-pair", "zero")


def _ok(bp: BoundaryParams) -> bool:
    if bp.is_singular():
        return False
    if bp.A >= 1 and bp.C >= 1 and qpower_lattice_index(bp.A / bp.C, bp.q, 1e-6) is not None:
        return False
    # keep A q^j, C q^j away from 1: this leaves a usable admissible interval
    # around t = 1 and keeps atoms off +-1
    for z in (bp.A, bp.C):
        for j in range(8):
            if abs(z * bp.q**j - 1) < 0.12:
                return False
    return True


def _draw(rng, kind: str) -> BoundaryParams:
    while True:
        q = float(rng.uniform(0.05, 0.7))
        B = -float(rng.uniform(0, 0.6))
        D = -float(rng.uniform(0, 0.6))
        if kind == "fan":
            A = float(rng.uniform(0.0, 2.5))
            C = float(rng.uniform(0.0, min(0.95 / max(A, 1e-9), 2.5)))
        elif kind == "hd-shock":
            A = float(rng.uniform(1.3, 2.6))
            C = float(rng.uniform(1.05 / A, 0.9 * A))
        elif kind == "ld-shock":
            C = float(rng.uniform(1.3, 2.6))
            A = float(rng.uniform(1.05 / C, 0.9 * C))
        elif kind == "near-coexistence":
            A = float(rng.uniform(1.4, 2.4))
            C = A * float(rng.choice([0.93, 0.95, 1.05, 1.08]))
        else:
            raise ValueError(kind)
        bp = BoundaryParams(A, B, C, D, q)
        if _ok(bp):
            return bp


def boundary_corpus(per_class: int = 10, seed: int = 2024) -> list:
    """[(class, BoundaryParams)] for the four boundary-parameter classes."""
    rng = np.random.default_rng(seed)
    out = []
    for kind in ("fan", "hd-shock", "ld-shock", "near-coexistence"):
        out.extend((kind, _draw(rng, kind)) for _ in range(per_class))
    return out


def aw_corpus(per_class: int = 10, seed: int = 7) -> list:
    """[(class, AWParams)] with complex-conjugate (c, d) pairs and all-zero parameters."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(per_class):
        q = float(rng.uniform(0.0, 0.7))
        a = float(rng.uniform(-0.9, 2.2))
        b = float(rng.uniform(-0.8, 0.4))
        r, ph = float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.2, 2.9))
        c = r * complex(math.cos(ph), math.sin(ph))
        out.append(("conjugate-pair", AWParams(a, b, c, c.conjugate(), q)))
    for k in range(per_class):
        out.append(("zero", AWParams(0, 0, 0, 0, 0.07 * k)))
    return out


def time_pair(bp: BoundaryParams, eps_max: float = 0.2) -> tuple[float, float]:
    """An admissible pair s < t close to 1 with s/t well away from 1."""
    for eps in np.linspace(eps_max, 0.02, 40):
        s, t = 1.0 - eps, 1.0 - eps / 2
        if admissible_times(bp, [s, t]):
            return float(s), float(t)
    raise ValueError("no admissible time pair found")


def kernel_points(bp: BoundaryParams, s: float, count: int = 5) -> list:
    """Up to ``count`` points of U_s: its atoms first, then interior points."""
    from .multitime import support_points

    supp = support_points(s, bp)
    pts = [y for y, lab in zip(supp.atoms, supp.labels) if abs(y) != 1.0][:count]
    interior = [0.62, -0.41, 0.13, -0.87, 0.95]
    pts.extend(interior[: count - len(pts)])
    return pts


def is_shock(bp: BoundaryParams) -> bool:
    return bp.A * bp.C > 1


def named_points() -> dict:
    """Reference parameter points used throughout the documentation."""
    return {
        "tasep": BoundaryParams(0, 0, 0, 0, 0),
        "hd": BoundaryParams(2, 0, 0.4, 0, 0.5),
        "hd-shock": BoundaryParams(2, 0, 1.5, 0, 0.5),
        "coexistence": BoundaryParams(2, 0, 2, 0, 0.5),
        "bernoulli": BoundaryParams(2, 0, 0.5, 0, 0.5),
    }


__all__ = ["CLASSES", "boundary_corpus", "aw_corpus", "time_pair", "kernel_points",
           "named_points", "is_shock", "classify_phase", "PhaseName"]
