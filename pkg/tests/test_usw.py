import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asepaw import oracle, usw
from asepaw.asepmap import ASEPRates, BoundaryParams, abcd_to_rates, particle_hole, rates_to_abcd
from asepaw.errors import SingularCase
from asepaw.qcore import inverse_qpower_index
from asepaw.usw import LogScaled

TASEP = BoundaryParams(0, 0, 0, 0, 0)
BERN = BoundaryParams(2, 0, 0.5, 0, 0.5)
GENERIC = BoundaryParams(1.7, -0.3, 0.6, -0.2, 0.35)


def test_tasep_small():
    assert float(usw.pi_n([0.3], TASEP)) == pytest.approx(1.3)
    assert float(usw.partition(2, TASEP)) == pytest.approx(5)
    assert float(usw.partition(3, TASEP)) == pytest.approx(14)
    assert usw.one_point(2, 1, TASEP) == pytest.approx(0.6)
    assert usw.one_point(2, 2, TASEP) == pytest.approx(0.4)
    assert usw.two_point(2, 1, 2, TASEP) == pytest.approx(0.2)


def test_tasep_closed_form(frozen):
    for case in frozen["tasep_partition"]:
        bp = rates_to_abcd(ASEPRates(case["alpha"], case["beta"], 0, 0, 0))
        z = usw.partition(case["n"], bp)
        assert z.log_abs == pytest.approx(case["log_z"], rel=1e-12, abs=1e-11)


def test_gen_fn_trivial_and_bernoulli():
    assert usw.gen_fn(6, [1.0] * 6, GENERIC) == pytest.approx(1, abs=1e-14)
    for n in (1, 4, 9):
        for t in (0.3, 1.7):
            assert usw.gen_fn(n, [t] * n, BERN) == pytest.approx(((1 + 2 * t) / 3) ** n, rel=1e-12)
    rho = usw.one_point_all(12, BERN)
    assert np.allclose(rho, 2 / 3, atol=1e-13)


def test_against_oracle():
    rng = np.random.default_rng(11)
    for rates in [(0.7, 1.3, 0.2, 0.4, 0.35), (1.5, 0.6, 0.0, 0.0, 0.0), (0.4, 0.9, 0.3, 0.25, 0.6)]:
        r = ASEPRates(*rates)
        bp = rates_to_abcd(r)
        for n in (1, 3, 6, 8):
            dist = oracle.stationary(n, r)
            for _ in range(3):
                ts = rng.uniform(0.1, 2, n)
                want = oracle.oracle_gen_fn(n, r, ts, dist)
                assert usw.gen_fn(n, ts, bp) == pytest.approx(want, rel=1e-9)
            mean, second = oracle.occupation_moments(n, r, dist)
            M = usw.two_point_all(n, bp)
            assert np.allclose(np.diag(M), mean, atol=1e-10)
            assert np.allclose(M, second, atol=1e-10)


def test_truncation_exact():
    for n in (1, 5, 20, 50):
        ts = np.linspace(0.4, 1.6, n)
        a = usw.pi_n(ts, GENERIC)
        b = usw.pi_n(ts, GENERIC, dim=n + 10)
        assert abs(float(a / b) - 1) <= 1e-13


def test_dehp_relations():
    for bp in (GENERIC, BoundaryParams(2, 0, 1.5, 0, 0.5), TASEP):
        res = usw.dehp_residuals(12, bp)
        assert res["left"] <= 1e-12 and res["right"] <= 1e-12 and res["bulk"] <= 1e-10


def test_duality_route():
    ts = [0.5, 1.2, 0.8, 1.9, 0.3]
    for bp in (GENERIC, BoundaryParams(0.0, -0.2, 1.4, -0.1, 0.3)):
        assert float(usw.pi_n(ts, bp) / usw.pi_n_dual(ts, bp)) == pytest.approx(1, rel=1e-12)


def test_particle_hole_profile():
    n = 15
    a = usw.one_point_all(n, GENERIC)
    b = usw.one_point_all(n, particle_hole(GENERIC))
    assert np.allclose(a, 1 - b[::-1], atol=1e-12)


def test_singular_rejected():
    b = -1 / math.sqrt(8)
    with pytest.raises(SingularCase):
        usw.partition(3, BoundaryParams(4, b, 4, b, 0.5))


def test_large_n_log_scaling():
    z = usw.partition(2000, BoundaryParams(2, 0, 0.4, 0, 0.5))
    assert math.isfinite(z.log_abs) and z.log_abs > 700


def test_logscaled_arithmetic():
    a, b = LogScaled.from_float(3.0), LogScaled.from_float(-2.0)
    assert float(a * b) == pytest.approx(-6)
    assert float(a / b) == pytest.approx(-1.5)
    assert float(a + b) == pytest.approx(1)
    assert float(a - b) == pytest.approx(5)
    assert float(-a) == pytest.approx(-3)


def test_variance_nonnegative():
    for bp in (GENERIC, TASEP, BoundaryParams(2, 0, 2, 0, 0.5)):
        assert usw.height_variance(40, bp) >= 0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0, 1.5), st.floats(0, 1.5), st.floats(0, 0.9),
       st.integers(1, 6))
def test_gen_fn_matches_oracle_random(al, be, ga, de, q, n):
    r = ASEPRates(al, be, ga, de, q)
    try:
        bp = rates_to_abcd(r)
    except SingularCase:
        return
    if inverse_qpower_index(bp.abcd, bp.q, 1e-3) is not None:
        return
    ts = np.linspace(0.2, 1.8, n)
    assert usw.gen_fn(n, ts, bp) == pytest.approx(oracle.oracle_gen_fn(n, r, ts), rel=1e-9)


def test_sweep_against_mpmath():
    """Independent high-precision product of the same tridiagonal matrices."""
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    bp = GENERIC
    n = 25
    ts = np.linspace(0.3, 1.5, n)
    op = usw.TridiagOperator.build(n + 2, bp)
    x, y = op.dense_xy()
    sq = mp.sqrt(1 - mp.mpf(bp.q))
    X = mp.matrix(x.tolist())
    Y = mp.matrix(y.tolist())
    I = mp.eye(n + 2)
    v = mp.matrix(1, n + 2)
    v[0] = 1
    for t in ts:
        t = mp.mpf(t)
        v = v * ((1 + t) * I + sq * (t * X + Y))
    assert float(v[0]) == pytest.approx(float(usw.pi_n(ts, bp)), rel=1e-12)
