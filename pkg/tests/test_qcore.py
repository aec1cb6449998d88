import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asepaw.errors import InvalidParameter, TruncationBudgetExceeded
from asepaw.qcore import (TruncationSpec, inverse_qpower_index, phi43, qpoch_finite, qpoch_inf,
                          qpoch_inf_array, qpoch_multi, qpower_lattice_index, realize)
from conftest import cplx


def test_finite_examples():
    assert qpoch_finite(0.7, 0.3, 0) == 1
    assert qpoch_finite(0.5, 0.5, 2) == pytest.approx(0.375, abs=1e-15)
    assert qpoch_finite(0.9, 0.0, 3) == pytest.approx(0.1, abs=1e-15)


def test_inf_examples():
    assert qpoch_inf(0, 0.5) == 1
    assert qpoch_inf(0.5, 0) == pytest.approx(0.5)
    direct = math.prod(1 - 0.25 * 0.5**j for j in range(60))
    assert abs(qpoch_inf(0.25, 0.5) - direct) < 1e-15
    assert abs(qpoch_inf(0.25, 0.5) - 0.57758) < 1e-5


def test_multi_examples():
    assert qpoch_multi([], 0.5) == 1
    assert qpoch_multi([0.5, 0.5], 0.0) == pytest.approx(0.25)
    expect = qpoch_inf(0.25, 0.5) * qpoch_inf(-0.25, 0.5)
    assert abs(qpoch_multi([0.25, -0.25], 0.5) - expect) < 1e-15
    assert abs(qpoch_multi([0.3, 0.2], 0.4, n=3) - qpoch_finite(0.3, 0.4, 3) * qpoch_finite(0.2, 0.4, 3)) < 1e-15


def test_against_frozen(frozen):
    for case in frozen["qpoch"]:
        z, q = cplx(case["z"]), case["q"]
        assert abs(qpoch_inf(z, q) - cplx(case["value"])) < 1e-13


def test_array_matches_scalar():
    zs = np.array([0.3, -0.8, 0.5 + 0.5j, 2.0])
    vals = qpoch_inf_array(zs, 0.6)
    for z, v in zip(zs, vals):
        assert abs(v - qpoch_inf(z, 0.6)) < 1e-14


def test_phi43_examples():
    q = 0.4
    assert phi43((1.0, 0.3, 0.2, 0.1), (0.5, 0.6, 0.7), q, q) == 1
    assert phi43((0.3, 0.2, 0.1, 0.9), (0.5, 0.6, 0.7), q, 0) == 1
    a, b, c = 0.3, -0.2, 0.6
    b1, b2, b3 = 0.5, -0.4, 0.25
    expect = 1 + (1 - q**-1) * (1 - a) * (1 - b) * (1 - c) / ((1 - b1) * (1 - b2) * (1 - b3) * (1 - q)) * q
    assert abs(phi43((q**-1, a, b, c), (b1, b2, b3), q, q) - expect) < 1e-14


def test_phi43_rejects_bad_shape():
    with pytest.raises(InvalidParameter):
        phi43((1, 2, 3), (1, 2, 3), 0.5, 0.5)


def test_budget_exceeded():
    with pytest.raises(TruncationBudgetExceeded):
        qpoch_inf(0.5, 0.999, TruncationSpec(eps=1e-15, max_terms=100))


def test_invalid_q():
    for q in (-0.1, 1.0, 1.5):
        with pytest.raises(InvalidParameter):
            qpoch_inf(0.5, q)


def test_lattice_helpers():
    assert inverse_qpower_index(0.5**-3, 0.5) == 3
    assert inverse_qpower_index(1.0, 0.5) == 0
    assert inverse_qpower_index(3.0, 0.5) is None
    assert qpower_lattice_index(0.25, 0.5) == 2
    assert qpower_lattice_index(4.0, 0.5) == -2
    assert qpower_lattice_index(0.3, 0.5) is None


def test_realize():
    assert realize(1 + 1e-14j) == 1.0
    with pytest.raises(Exception):
        realize(1 + 1e-3j)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(0, 0.9), st.integers(0, 12))
def test_finite_step(z, q, n):
    lhs = qpoch_finite(z, q, n + 1)
    rhs = qpoch_finite(z, q, n) * (1 - z * q**n)
    assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(lhs))


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.95, 0.95), st.floats(0, 0.9), st.integers(0, 10))
def test_inf_shift(z, q, n):
    lhs = qpoch_inf(z, q) / qpoch_finite(z, q, n)
    assert abs(lhs - qpoch_inf(z * q**n, q)) <= 1e-13


def test_deterministic():
    a = qpoch_inf(0.37 + 0.2j, 0.61)
    b = qpoch_inf(0.37 + 0.2j, 0.61)
    assert a == b
