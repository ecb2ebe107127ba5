from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from addercap.capacity import Mixture, grad_check, in_domain, is_near_boundary, rho, solve_x_star, theorem_bound
from addercap.constants import CAPACITY

pytestmark = pytest.mark.property

multipliers = st.floats(min_value=0.05, max_value=0.49, allow_nan=False)
ratios = st.floats(min_value=1.001, max_value=1e4, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(r=ratios, lam=multipliers)
def test_rho_stays_inside_its_range(r: float, lam: float) -> None:
    value = rho(r, lam)
    assert 0.0 < value < lam / (1.0 - lam)


@settings(max_examples=200, deadline=None)
@given(r=ratios, lam=multipliers)
def test_rho_is_symmetric_under_inversion(r: float, lam: float) -> None:
    assert rho(1.0 / r, lam) == pytest.approx(rho(r, lam), rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(r=ratios, factor=st.floats(min_value=1.01, max_value=10.0), lam=multipliers)
def test_rho_decreases_above_one(r: float, factor: float, lam: float) -> None:
    assert rho(r * factor, lam) < rho(r, lam)


@settings(max_examples=100, deadline=None)
@given(lam=multipliers)
def test_every_multiplier_gives_an_upper_bound(lam: float) -> None:
    assert theorem_bound(lam).overall >= CAPACITY - 1e-12


def test_gradient_check_on_interior_mixtures(rng: np.random.Generator) -> None:
    checked = 0
    while checked < 100:
        n = int(rng.integers(1, 4))
        weights = rng.uniform(0.2, 1.0, n)
        p = tuple(float(value) for value in weights / weights.sum())
        a = tuple(float(value) for value in rng.uniform(0.05, 0.95, n))
        b = tuple(float(value) for value in rng.uniform(0.05, 0.95, n))
        mix = Mixture(p=p, a=a, b=b)
        if not in_domain(mix) or is_near_boundary(mix) or solve_x_star(mix).x_star < 0.05:
            continue

        check = grad_check(mix, float(rng.uniform(0.05, 0.49)))
        assert check.max_abs_error < 1e-5
        checked += 1
