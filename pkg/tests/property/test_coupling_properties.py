from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from addercap.capacity import coupling_box, eval_m, joint, phi, phi_array, phi_prime_array, solve_c
from addercap.constants import COUPLING_RESIDUAL_TOLERANCE

pytestmark = pytest.mark.property

interior = st.floats(min_value=0.01, max_value=0.99, allow_nan=False)
unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(a=interior, b=interior, x=interior)
def test_closed_form_and_bisection_agree(a: float, b: float, x: float) -> None:
    box = coupling_box(a, b)
    closed = solve_c(a, b, x)
    bisected = solve_c(a, b, x, method="bisect")

    assert box.contains(closed)
    assert box.contains(bisected)
    assert abs(eval_m(a, b, closed, x)) <= COUPLING_RESIDUAL_TOLERANCE
    assert closed == pytest.approx(bisected, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(a=unit, b=unit, x=unit)
def test_solution_gives_a_valid_joint(a: float, b: float, x: float) -> None:
    cells = joint(a, b, solve_c(a, b, x)).cells()
    assert min(cells) >= 0.0
    assert sum(cells) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(a=interior, b=interior, x=interior)
def test_phi_symmetries(a: float, b: float, x: float) -> None:
    value = phi(a, b, x)
    assert phi(b, a, x) == pytest.approx(value, abs=1e-9)
    assert phi(1.0 - a, 1.0 - b, x) == pytest.approx(value, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(a=unit, b=unit)
def test_phi_endpoint_values(a: float, b: float) -> None:
    assert phi(a, b, 0.0) == pytest.approx(abs(a - b), abs=1e-9)
    assert phi(a, b, 1.0) == pytest.approx(-abs(a + b - 1.0), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(a=interior, b=interior)
def test_phi_minus_scaled_slope_keeps_one_sign(a: float, b: float) -> None:
    xs = np.linspace(1.0 / 300.0, 1.0, 300)
    values = phi_array(a, b, xs) - xs * phi_prime_array(a, b, xs)

    assert np.all(values > 0.0) or np.all(values < 0.0)


@pytest.mark.parametrize("a", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
def test_phi_second_order_coefficient_near_zero(a: float) -> None:
    x = 1e-3
    root = math.sqrt(a * (1.0 - a))
    coefficient = (phi(a, a, x) - (4.0 * root - 1.0) * x) / (x * x)

    assert coefficient == pytest.approx(4.0 * root - 4.0, abs=1e-2)
