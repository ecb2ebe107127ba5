from __future__ import annotations

import numpy as np
import pytest

from addercap.capacity import (
    Mixture,
    belokopytov_gap,
    belokopytov_gap_derivative,
    brute_min_gap,
    constraint_gap,
    coupling_box,
    feasibility_map,
    gap_at,
    gap_gradient,
    grid_minimizer,
    solve_c,
)
from addercap.constants import BELOKOPYTOV_A, BELOKOPYTOV_C, X1_AT_LAMBDA_STAR
from addercap.errors import DomainError

pytestmark = pytest.mark.core_unit


def test_gap_vanishes_at_the_symmetric_optimum() -> None:
    assert belokopytov_gap(BELOKOPYTOV_C) == pytest.approx(0.0, abs=1e-9)
    assert belokopytov_gap_derivative(BELOKOPYTOV_C) == pytest.approx(0.0, abs=1e-9)
    assert solve_c(BELOKOPYTOV_A, BELOKOPYTOV_A, X1_AT_LAMBDA_STAR) == pytest.approx(BELOKOPYTOV_C, abs=1e-10)


def test_gap_derivative_matches_central_difference_across_the_box() -> None:
    box = coupling_box(BELOKOPYTOV_A, BELOKOPYTOV_A)
    margin = 0.02 * (box.hi - box.lo)
    h = 1e-6
    for c in np.linspace(box.lo + margin, box.hi - margin, 100):
        numeric = (belokopytov_gap(c + h) - belokopytov_gap(c - h)) / (2.0 * h)
        assert belokopytov_gap_derivative(float(c)) == pytest.approx(numeric, abs=1e-6)


def test_constraint_gap_at_the_symmetric_optimum() -> None:
    report = constraint_gap(Mixture.single(BELOKOPYTOV_A, BELOKOPYTOV_A))
    assert report.constraint_gap == pytest.approx(0.0, abs=1e-9)
    assert report.feasible
    assert report.couplings == pytest.approx((BELOKOPYTOV_C,), abs=1e-10)
    assert report.brute_min_gap is None


@pytest.mark.parametrize(
    ("a", "b", "expected_gap", "feasible"),
    [(0.2, 0.2, 0.13998118, True), (0.1, 0.3, 0.23446004, True), (0.2, 0.6, -0.46346635, False)],
)
def test_constraint_gap_reference_values(a: float, b: float, expected_gap: float, feasible: bool) -> None:
    report = constraint_gap(Mixture.single(a, b))
    assert report.constraint_gap == pytest.approx(expected_gap, abs=1e-7)
    assert report.feasible is feasible


def test_half_half_is_infeasible() -> None:
    report = constraint_gap(Mixture.single(0.5, 0.5))
    assert report.x_star == 1.0
    assert report.constraint_gap == pytest.approx(-1.0, abs=1e-12)
    assert not report.feasible


@pytest.mark.parametrize(("a", "b"), [(0.2, 0.6), (0.3, 0.3), (0.45, 0.45), (0.1, 0.8), (0.2, 0.2)])
def test_fixed_point_coupling_minimizes_the_gap(a: float, b: float) -> None:
    mix = Mixture.single(a, b)
    report = constraint_gap(mix, grid_per_axis=400, threads=1)
    assert report.brute_min_gap is not None
    assert report.brute_min_gap >= report.constraint_gap - 1e-9
    assert report.brute_min_gap == pytest.approx(report.constraint_gap, abs=1e-4)


def test_two_component_quantifier_agrees_in_sign() -> None:
    mix = Mixture(p=(0.4, 0.6), a=(0.15, 0.2), b=(0.2, 0.1))
    report = constraint_gap(mix)
    brute = brute_min_gap(mix, 120)
    assert (brute < 0.0) == (report.constraint_gap < 0.0)
    assert brute >= report.constraint_gap - 1e-9


def test_grid_minimizer_is_thread_count_independent() -> None:
    mix = Mixture(p=(0.5, 0.5), a=(0.2, 0.7), b=(0.6, 0.3))
    sequential = grid_minimizer(mix, 60, threads=1)
    parallel = grid_minimizer(mix, 60, threads=4)
    assert sequential == parallel
    assert len(sequential.c) == 2
    assert gap_at(mix, sequential.c) == pytest.approx(sequential.value, abs=1e-12)


@pytest.mark.parametrize(
    ("mix", "grid", "message"),
    [
        (Mixture.single(0.3, 0.3), 1, "grid_per_axis must be in"),
        (Mixture.single(0.3, 0.3), 401, "grid_per_axis must be in"),
        (Mixture(p=(0.25,) * 4, a=(0.1, 0.2, 0.3, 0.4), b=(0.1, 0.2, 0.3, 0.4)), 10, "at most 3 components"),
    ],
)
def test_grid_minimizer_validation(mix: Mixture, grid: int, message: str) -> None:
    with pytest.raises(DomainError, match=message):
        grid_minimizer(mix, grid)


def test_gap_at_rejects_wrong_coupling_count() -> None:
    with pytest.raises(DomainError, match="c must have 1 entries"):
        gap_at(Mixture.single(0.3, 0.3), (0.0, 0.0))


def test_gap_gradient_matches_central_difference() -> None:
    mix = Mixture(p=(0.3, 0.7), a=(0.3, 0.4), b=(0.6, 0.2))
    c = (0.0, -0.01)
    gradient = gap_gradient(mix, c)
    h = 1e-6
    for index in range(mix.n):
        upper = list(c)
        lower = list(c)
        upper[index] += h
        lower[index] -= h
        numeric = (gap_at(mix, upper) - gap_at(mix, lower)) / (2.0 * h)
        assert gradient[index] == pytest.approx(numeric, abs=1e-6)


def test_gap_gradient_vanishes_at_fixed_point_couplings() -> None:
    report = constraint_gap(Mixture.single(0.3, 0.6))
    assert gap_gradient(Mixture.single(0.3, 0.6), report.couplings)[0] == pytest.approx(0.0, abs=1e-8)


def test_feasibility_map_layout() -> None:
    axis = np.linspace(0.0, 1.0, 11)
    table = feasibility_map(axis, axis)

    assert table.gap.shape == (11, 11)
    assert len(table.rows()) == 121
    assert not table.in_domain[0, 0]
    assert table.in_domain[2, 2]
    assert table.objective[5, 5] == pytest.approx(1.0, abs=1e-15)
    assert table.gap[2, 2] == pytest.approx(0.13998118, abs=1e-7)
    assert table.gap[5, 5] == pytest.approx(-1.0, abs=1e-12)
    assert np.allclose(table.gap, table.gap.T, atol=1e-9)
