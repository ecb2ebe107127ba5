from __future__ import annotations

import logging

import numpy as np
import pytest

from addercap.capacity import (
    Mixture,
    count_sign_changes,
    in_domain,
    is_near_boundary,
    phi_mix,
    phi_mix_prime,
    solve_x_star,
    solve_x_star_grid,
)
from addercap.constants import BELOKOPYTOV_A, SIMPLEX_TOLERANCE, X1_AT_LAMBDA_STAR
from addercap.errors import DomainError

pytestmark = pytest.mark.core_unit


@pytest.mark.parametrize(
    ("kwargs", "message"),
    [
        ({"p": (), "a": (), "b": ()}, "at least one component"),
        ({"p": (1.0,), "a": (0.2, 0.3), "b": (0.4,)}, "equal lengths"),
        ({"p": (0.6, 0.6), "a": (0.2, 0.3), "b": (0.4, 0.5)}, "must sum to 1"),
        ({"p": (1.0,), "a": (1.5,), "b": (0.4,)}, r"a entries must be in \[0, 1\]"),
    ],
)
def test_mixture_validation(kwargs: dict[str, tuple[float, ...]], message: str) -> None:
    with pytest.raises(DomainError, match=message):
        Mixture(**kwargs)


def test_weight_sum_uses_the_simplex_tolerance() -> None:
    inside = 0.5 * SIMPLEX_TOLERANCE
    outside = 4.0 * SIMPLEX_TOLERANCE
    assert sum(Mixture(p=(0.5, 0.5 + inside), a=(0.2, 0.3), b=(0.4, 0.5)).p) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError, match="must sum to 1"):
        Mixture(p=(0.5, 0.5 + outside), a=(0.2, 0.3), b=(0.4, 0.5))


@pytest.mark.parametrize(
    ("a", "b", "expected"),
    [(0.5, 0.5, True), (0.1, 0.1, True), (0.05, 0.05, False), (0.0, 0.0, False), (0.05, 0.06, True)],
)
def test_domain_membership(a: float, b: float, expected: bool) -> None:
    assert in_domain(Mixture.single(a, b)) is expected


def test_solve_rejects_mixture_outside_domain() -> None:
    with pytest.raises(DomainError, match="fixed-point domain"):
        solve_x_star(Mixture.single(0.0, 0.0))


def test_half_half_fixed_point_is_one() -> None:
    result = solve_x_star(Mixture.single(0.5, 0.5))
    assert result.x_star == 1.0
    assert result.found
    assert result.phi_prime_at < 0.0


def test_symmetric_optimum_fixed_point() -> None:
    result = solve_x_star(Mixture.single(BELOKOPYTOV_A, BELOKOPYTOV_A), certify=True)
    assert result.x_star == pytest.approx(X1_AT_LAMBDA_STAR, abs=1e-11)
    assert result.residual <= 1e-11
    assert result.phi_prime_at < 0.0
    assert result.sign_changes == 1
    assert not result.near_boundary


def test_two_component_fixed_point_is_verified() -> None:
    mix = Mixture(p=(0.5, 0.5), a=(0.2, 0.7), b=(0.6, 0.3))
    result = solve_x_star(mix, certify=True)
    assert 0.0 < result.x_star <= 1.0
    assert phi_mix(mix, result.x_star) == pytest.approx(0.0, abs=1e-11)
    assert phi_mix_prime(mix, result.x_star) < 0.0
    assert result.sign_changes == 1


def test_fixed_point_is_invariant_under_relabeling() -> None:
    mix = Mixture(p=(0.3, 0.7), a=(0.15, 0.55), b=(0.4, 0.8))
    expected = solve_x_star(mix).x_star
    assert solve_x_star(mix.swapped()).x_star == pytest.approx(expected, abs=1e-11)
    assert solve_x_star(mix.complemented()).x_star == pytest.approx(expected, abs=1e-11)


def test_zero_weight_components_are_ignored() -> None:
    with_dead = Mixture(p=(1.0, 0.0), a=(0.3, 0.0), b=(0.6, 0.0))
    assert solve_x_star(with_dead).x_star == pytest.approx(solve_x_star(Mixture.single(0.3, 0.6)).x_star, abs=1e-13)


def test_near_boundary_detection(caplog: pytest.LogCaptureFixture) -> None:
    caplog.set_level(logging.INFO, logger="addercap.fixed_point")

    assert is_near_boundary(Mixture.single(0.066987586783, 0.066987586783))
    assert not is_near_boundary(Mixture.single(0.3, 0.3))

    solve_x_star(Mixture.single(0.3, 0.3))
    events = [record for record in caplog.records if getattr(record, "event_name", "") == "fixed_point.solve.near_boundary"]
    assert events == []


@pytest.mark.parametrize(
    ("values", "expected"),
    [([1.0, 0.5, -0.2, -1.0], 1), ([1.0, 0.0, -1.0, 2.0], 2), ([0.0, 0.0], 0), ([-1.0], 0)],
)
def test_count_sign_changes(values: list[float], expected: int) -> None:
    assert count_sign_changes(values) == expected


def test_grid_solver_matches_scalar_solver() -> None:
    a = np.array([[0.2, 0.5, 0.05], [0.7, BELOKOPYTOV_A, 0.9]])
    b = np.array([[0.6, 0.5, 0.05], [0.3, BELOKOPYTOV_A, 0.1]])
    grid = solve_x_star_grid(a, b)

    assert np.isnan(grid[0, 2])
    for index in [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2)]:
        expected = solve_x_star(Mixture.single(float(a[index]), float(b[index]))).x_star
        assert grid[index] == pytest.approx(expected, abs=1e-10)
