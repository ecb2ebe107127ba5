from __future__ import annotations

import numpy as np
import pytest

from addercap.capacity import Mixture, constraint_gap, coupling_box, gap_gradient, grid_minimizer, in_domain, solve_c

pytestmark = pytest.mark.property


def test_fixed_point_coupling_is_the_grid_minimum(rng: np.random.Generator) -> None:
    checked = 0
    for a, b in rng.uniform(0.05, 0.95, size=(25, 2)):
        mix = Mixture.single(float(a), float(b))
        if not in_domain(mix):
            continue
        report = constraint_gap(mix, grid_per_axis=200)
        assert report.brute_min_gap is not None
        assert report.brute_min_gap >= report.constraint_gap - 1e-9
        assert report.brute_min_gap == pytest.approx(report.constraint_gap, abs=1e-3)
        checked += 1
    assert checked >= 20


def test_two_component_minimum_is_stationary(rng: np.random.Generator) -> None:
    for _ in range(10):
        weight = float(rng.uniform(0.2, 0.8))
        a1, b1, a2, b2 = (float(value) for value in rng.uniform(0.1, 0.9, size=4))
        mix = Mixture(p=(weight, 1.0 - weight), a=(a1, a2), b=(b1, b2))
        if not in_domain(mix):
            continue
        report = constraint_gap(mix)
        for component in gap_gradient(mix, report.couplings):
            assert component == pytest.approx(0.0, abs=1e-6)


def test_grid_argmin_sits_next_to_the_stationary_coupling(rng: np.random.Generator) -> None:
    grid_per_axis = 200
    checked = 0
    while checked < 20:
        n = int(rng.integers(1, 3))
        weight = float(rng.uniform(0.2, 0.8))
        p = (1.0,) if n == 1 else (weight, 1.0 - weight)
        a = tuple(float(value) for value in rng.uniform(0.05, 0.95, n))
        b = tuple(float(value) for value in rng.uniform(0.05, 0.95, n))
        mix = Mixture(p=p, a=a, b=b)
        if not in_domain(mix):
            continue

        minimum = grid_minimizer(mix, grid_per_axis)
        middle = sum(
            pi * (ai * (1.0 - bi) + (1.0 - ai) * bi + 2.0 * ci) for (pi, ai, bi), ci in zip(mix.components(), minimum.c)
        )
        for (_, ai, bi), ci in zip(mix.components(), minimum.c):
            box = coupling_box(ai, bi)
            cell = (box.hi - box.lo) / (grid_per_axis - 1)
            assert abs(ci - solve_c(ai, bi, middle)) <= 2.0 * cell + 1e-12

        gap = constraint_gap(mix).constraint_gap
        assert minimum.value >= min(0.0, gap) - 1e-4
        checked += 1
