import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asepaw.asepmap import (ASEPRates, BoundaryParams, PhaseName, Region, abcd_to_rates,
                            admissible_time, admissible_times, choose_epsilon, classify_phase, kappa,
                            particle_hole, particle_hole_rates, rates_to_abcd)
from asepaw.errors import InvalidParameter, SingularCase


def test_rates_examples():
    bp = rates_to_abcd(ASEPRates(1, 1, 0, 0, 0))
    assert (bp.A, bp.B, bp.C, bp.D) == pytest.approx((0, 0, 0, 0), abs=1e-15)
    bp = rates_to_abcd(ASEPRates(1 / 3, 1 / 6, 0, 0, 0.5))
    assert (bp.A, bp.B, bp.C, bp.D) == pytest.approx((2, 0, 0.5, 0), abs=1e-14)


def test_inverse_examples():
    r = abcd_to_rates(BoundaryParams(0, 0, 0, 0, 0))
    assert (r.alpha, r.beta, r.gamma, r.delta) == pytest.approx((1, 1, 0, 0))
    r = abcd_to_rates(BoundaryParams(2, 0, 0.5, 0, 0.5))
    assert (r.alpha, r.beta, r.gamma, r.delta) == pytest.approx((1 / 3, 1 / 6, 0, 0))


def test_phase_examples():
    assert classify_phase(BoundaryParams(0, 0, 0, 0, 0)).phase is PhaseName.MAX_CURRENT
    ph = classify_phase(BoundaryParams(2, 0, 0.4, 0, 0.5))
    assert (ph.phase, ph.region) == (PhaseName.HIGH_DENSITY, Region.FAN)
    ph = classify_phase(BoundaryParams(2, 0, 1.5, 0, 0.5))
    assert (ph.phase, ph.region) == (PhaseName.HIGH_DENSITY, Region.SHOCK)
    ph = classify_phase(BoundaryParams(2, 0, 2, 0, 0.5))
    assert (ph.phase, ph.region) == (PhaseName.COEXISTENCE, Region.SHOCK)
    assert classify_phase(BoundaryParams(2, 0, 0.5, 0, 0.5)).region is Region.BOUNDARY
    assert classify_phase(BoundaryParams(1, 0, 0.3, 0, 0.5)).phase is PhaseName.PHASE_BOUNDARY


def test_admissibility_examples():
    assert admissible_time(BoundaryParams(2, 0, 0.4, 0, 0.5), 1.0).ok
    coex = BoundaryParams(2, 0, 2, 0, 0.5)
    assert not admissible_time(coex, 1.0).ok
    adm = admissible_time(coex, 0.9)
    assert adm.ok and adm.one_sided
    assert not admissible_time(coex, 0.9, s_opt=0.45).ok  # s/t = 1/2 = q
    assert admissible_times(coex, [0.8, 0.9])
    assert not admissible_times(coex, [0.9, 0.8])


def test_choose_epsilon():
    bp = BoundaryParams(2, 0, 1.5, 0, 0.5)
    eps = choose_epsilon(bp, (1.0, 0.5))
    assert 0 < eps <= 0.2
    assert admissible_times(bp, sorted(1 - eps * f for f in (1.0, 0.5)))


def test_particle_hole():
    bp = BoundaryParams(2, -0.1, 0.4, -0.3, 0.5)
    assert particle_hole(particle_hole(bp)) == bp
    assert particle_hole(bp) == BoundaryParams(0.4, -0.3, 2, -0.1, 0.5)
    assert classify_phase(particle_hole(bp)).phase is PhaseName.LOW_DENSITY
    r = ASEPRates(0.3, 0.7, 0.1, 0.2, 0.4)
    assert particle_hole_rates(r) == ASEPRates(0.7, 0.3, 0.2, 0.1, 0.4)


def test_validation():
    with pytest.raises(InvalidParameter):
        ASEPRates(0, 1, 0, 0, 0.5)
    with pytest.raises(InvalidParameter):
        BoundaryParams(1, 0.1, 1, 0, 0.5)
    with pytest.raises(InvalidParameter):
        kappa(0, 1, 0.5, 1)


def test_singular_detection():
    # A B C D = q^-1 for q = 0.5: A = C = 4, B = D = -1/sqrt(8)
    b = -1 / math.sqrt(8)
    r = abcd_to_rates(BoundaryParams(4, b, 4, b, 0.5))
    with pytest.raises(SingularCase):
        rates_to_abcd(r)
    assert rates_to_abcd(r, allow_singular=True).is_singular()


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 5), st.floats(0, 5), st.floats(0, 0.95))
def test_kappa_properties(x, y, q):
    kp, km = kappa(x, y, q, 1), kappa(x, y, q, -1)
    assert kp >= 0 and -1 < km <= 0
    assert kp * km == pytest.approx(-y / x, rel=1e-12, abs=1e-300)


def test_roundtrip_many():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        a, b = rng.uniform(0.05, 4, 2)
        g, d = rng.uniform(0, 3, 2)
        q = rng.uniform(0, 0.95)
        r = ASEPRates(a, b, g, d, q)
        bp = rates_to_abcd(r, allow_singular=True)
        back = rates_to_abcd(abcd_to_rates(bp), allow_singular=True)
        worst = max(worst, max(abs(getattr(back, k) - getattr(bp, k)) / max(1, abs(getattr(bp, k)))
                               for k in "ABCD"))
    assert worst < 1e-12
