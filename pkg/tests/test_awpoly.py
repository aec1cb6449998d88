import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asepaw.asepmap import BoundaryParams
from asepaw.awpoly import (AWParams, aw_eval, aw_eval_all, aw_norm_eval, connection_coeffs,
                           proj_poly_eval, q_poly_eval_all, recurrence_coeffs, recurrence_coeffs_complex,
                           scaled_params)
from asepaw.errors import RequiresNonzeroA
from conftest import cplx


def test_recurrence_examples():
    for q in (0.0, 0.3, 0.8):
        rc = recurrence_coeffs(1, AWParams(0, 0, 0, 0, q))
        assert (rc.A, rc.B, rc.C) == pytest.approx((1, 0, 1 - q), abs=1e-15)
    assert recurrence_coeffs(0, AWParams(0.5, 0.2, -0.3, 0.1, 0.4)).C == 0


def test_recurrence_m2_single_parameter():
    # with b = c = d = 0 only the a-terms survive
    a, q = 0.5, 0.5
    rc = recurrence_coeffs(2, AWParams(a, 0, 0, 0, q))
    assert rc.A == pytest.approx(1.0)
    assert rc.C == pytest.approx(1 - q**2)
    assert rc.B == pytest.approx(a * q**2)


def test_low_degree_values():
    x = 0.37
    for q in (0.0, 0.45):
        p = AWParams(0, 0, 0, 0, q)
        assert aw_eval(0, x, p) == 1
        assert aw_eval(1, x, p) == pytest.approx(2 * x)
        assert aw_eval(2, x, p) == pytest.approx(4 * x * x - (1 - q))


def test_norm_eval():
    p = AWParams(0.5, 0.4, 0, 0, 0.3)
    assert aw_norm_eval(1, 0.2, p) == pytest.approx(aw_eval(1, 0.2, p) / (1 - 0.2))
    z = AWParams(0, 0.4, 0.3, 0.1, 0.3)
    assert aw_norm_eval(3, 0.1, z) == pytest.approx(aw_eval(3, 0.1, z))


def test_against_4phi3_oracle(frozen):
    for case in frozen["aw_poly"]:
        a, b, c, d = (cplx(v) for v in case["params"][:4])
        p = AWParams(a, b, c, d, case["params"][4])
        got = aw_eval_all(case["m"], case["x"], p)[case["m"]]
        want = cplx(case["value"])
        assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


def test_proj_poly_examples():
    bp = BoundaryParams(2, 0, 0.3, 0, 0.5)
    assert proj_poly_eval(0, 0.3, 0.9, bp) == 1
    for m in range(4):
        assert proj_poly_eval(m, 0.4, 1.0, bp) == pytest.approx(aw_norm_eval(m, 0.4, AWParams(2, 0, 0.3, 0, 0.5)))
    want = 0.9**0.5 * aw_norm_eval(1, 1.1, scaled_params(bp, 0.9))
    assert proj_poly_eval(1, 1.1, 0.9, bp) == pytest.approx(want)


def test_connection_examples():
    p = AWParams(0.5, -0.3, 0.4, -0.2, 0.45)
    assert np.allclose(connection_coeffs(0, p, 0.1, 0.2), [1])
    assert np.allclose(connection_coeffs(2, p, 0.4, -0.2), [0, 0, 1], atol=1e-13)
    a = connection_coeffs(1, p, 0.6, 0.1)
    b = connection_coeffs(1, p, 0.6, 0.1, mode="solve")
    assert np.allclose(a, b, atol=1e-13)


def test_connection_needs_nonzero_a():
    with pytest.raises(RequiresNonzeroA):
        connection_coeffs(2, AWParams(0, 0.3, 0.2, 0.1, 0.5), 0.4, 0.1)
    # the solve mode has no such restriction
    connection_coeffs(2, AWParams(0, 0.3, 0.2, 0.1, 0.5), 0.4, 0.1, mode="solve")


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.9, 1.8), st.floats(-0.8, 0.0), st.floats(-0.8, 0.8), st.floats(-0.8, 0.0),
       st.floats(0.0, 0.8), st.floats(-1.0, 1.0))
def test_recurrence_consistency(a, b, c, d, q, x):
    p = AWParams(a, b, c, d, q)
    w = aw_eval_all(9, x, p)
    scale = float(np.max(np.abs(w)))
    for m in range(1, 9):
        A, B, C = recurrence_coeffs_complex(m, p)
        r = A * w[m + 1] + B * w[m] + C * w[m - 1] - 2 * x * w[m]
        assert abs(r) <= 1e-10 * max(scale, 1.0) * max(1.0, abs(A), abs(B), abs(C))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.4, 1.5), st.floats(-0.6, 0.0), st.floats(-0.7, 0.7), st.floats(-0.6, 0.6),
       st.floats(0.15, 0.7))
def test_connection_identity(a, b, c2, d2, q):
    # the terminating 4phi3 sum cancels like (a q^m)^-1 as a, q -> 0; the
    # collocation mode covers that corner (next test)
    p = AWParams(a, b, 0.3, -0.2, q)
    pp = AWParams(a, b, c2, d2, q)
    xs = np.linspace(-0.9, 0.9, 10)
    from asepaw.awpoly import aw_norm_eval_all
    W, Wp = aw_norm_eval_all(4, xs, p), aw_norm_eval_all(4, xs, pp)
    for m in range(5):
        cf = connection_coeffs(m, p, c2, d2)
        rec = sum(cf[r] * W[r] for r in range(m + 1))
        assert np.max(np.abs(rec - Wp[m])) <= 1e-8 * max(1.0, float(np.max(np.abs(Wp[m]))))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 0.4), st.floats(-0.6, 0.0), st.floats(-0.7, 0.7), st.floats(0.0, 0.15))
def test_connection_solve_small_a(a, b, c2, q):
    p = AWParams(a, b, 0.3, -0.2, q)
    pp = AWParams(a, b, c2, -0.1, q)
    xs = np.linspace(-0.9, 0.9, 10)
    from asepaw.awpoly import aw_norm_eval_all
    W, Wp = aw_norm_eval_all(4, xs, p), aw_norm_eval_all(4, xs, pp)
    for m in range(5):
        cf = connection_coeffs(m, p, c2, -0.1, mode="solve")
        rec = sum(cf[r] * W[r] for r in range(m + 1))
        assert np.max(np.abs(rec - Wp[m])) <= 1e-10 * max(1.0, float(np.max(np.abs(Wp[m]))))


def test_q_vanishing():
    bp = BoundaryParams(1.6, -0.2, 0.5, -0.3, 0.4)
    for x in (0.3, -0.6, 1.4):
        s = 0.9
        vals = q_poly_eval_all(4, x, x, s, s, bp)
        for m in range(1, 5):
            assert abs(vals[m]) <= 1e-10 * max(1.0, float(np.max(np.abs(vals))))
