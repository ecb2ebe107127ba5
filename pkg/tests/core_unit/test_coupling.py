from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from addercap.capacity import (
    Mixture,
    branch,
    collapsed_residual,
    collapsed_residual_identity,
    coupling_box,
    eval_m,
    joint,
    phi,
    phi_array,
    phi_prime,
    phi_prime_array,
    solve_c,
    solve_c_array,
    solve_x_star,
)
from addercap.constants import DELTA
from addercap.errors import DomainError

pytestmark = pytest.mark.core_unit


def test_coupling_box_reference_values() -> None:
    box = coupling_box(0.5, 0.5)
    assert (box.lo, box.hi) == (-0.25, 0.25)
    assert not box.degenerate

    assert coupling_box(0.0, 1.0).degenerate

    a = 0.5 - DELTA
    tight = coupling_box(a, a)
    assert tight.lo == pytest.approx(-(0.25 - DELTA * DELTA), abs=1e-15)
    assert tight.hi == pytest.approx((0.5 - DELTA) ** 2, abs=1e-15)


def test_coupling_box_rejects_out_of_range_inputs() -> None:
    with pytest.raises(DomainError, match=r"a must be in \[0, 1\], got 1.2"):
        coupling_box(1.2, 0.5)


@pytest.mark.parametrize(("a", "b"), [(0.1, 0.9), (0.3, 0.3), (0.5, 0.5), (0.7, 0.2)])
def test_eval_m_vanishes_at_zero_coupling_and_one_third(a: float, b: float) -> None:
    assert eval_m(a, b, 0.0, 1.0 / 3.0) == pytest.approx(0.0, abs=1e-15)


def test_eval_m_sign_change_brackets_the_solution() -> None:
    box = coupling_box(0.3, 0.3)
    assert eval_m(0.3, 0.3, box.lo, 0.5) < 0.0 < eval_m(0.3, 0.3, box.hi, 0.5)
    c = solve_c(0.3, 0.3, 0.5)
    assert box.lo < c < box.hi
    assert eval_m(0.5, 0.5, 0.25, 0.5) > 0.0


def test_eval_m_rejects_coupling_outside_box() -> None:
    with pytest.raises(DomainError, match="c must be in"):
        eval_m(0.5, 0.5, 0.3, 0.5)


@pytest.mark.parametrize(("a", "b"), [(0.3, 0.6), (0.2, 0.2), (0.9, 0.4), (0.5, 0.5)])
def test_solve_c_endpoints_hit_the_box_edges(a: float, b: float) -> None:
    box = coupling_box(a, b)
    assert solve_c(a, b, 0.0) == pytest.approx(box.lo, abs=1e-12)
    assert solve_c(a, b, 1.0) == pytest.approx(box.hi, abs=1e-12)


def test_solve_c_closed_and_bisect_agree() -> None:
    closed = solve_c(0.3, 0.7, 0.5)
    bisected = solve_c(0.3, 0.7, 0.5, method="bisect")
    assert closed == pytest.approx(bisected, abs=1e-10)


def test_solve_c_degenerate_box_returns_zero() -> None:
    assert solve_c(0.0, 1.0, 0.7) == 0.0
    assert solve_c(1.0, 1.0, 0.2) == 0.0


def test_solve_c_rejects_unknown_method() -> None:
    with pytest.raises(DomainError, match="method must be one of"):
        solve_c(0.3, 0.3, 0.5, method="newton")  # type: ignore[arg-type]


def test_center_branch_falls_back_to_bisection(caplog: pytest.LogCaptureFixture) -> None:
    caplog.set_level(logging.DEBUG, logger="addercap.coupling")

    assert branch(0.3, 0.6, 1.0 / 3.0).sign == "center"
    assert solve_c(0.3, 0.6, 1.0 / 3.0) == pytest.approx(0.0, abs=1e-12)

    events = [record for record in caplog.records if getattr(record, "event_name", "") == "coupling.solve.bisect_fallback"]
    assert len(events) == 1


def test_branch_selects_sign_by_side_of_one_third() -> None:
    assert branch(0.3, 0.6, 0.2).sign == "plus"
    assert branch(0.3, 0.6, 0.5).sign == "minus"
    selected = branch(0.3, 0.6, 0.5)
    assert selected.v >= 0.0
    assert selected.t <= selected.s <= (1.0 + selected.t**2) / 2.0


@pytest.mark.parametrize(("a", "b"), [(0.2, 0.7), (0.4, 0.4), (0.9, 0.05), (0.5, 0.5)])
def test_phi_endpoint_identities(a: float, b: float) -> None:
    assert phi(a, b, 0.0) == pytest.approx(abs(a - b), abs=1e-12)
    assert phi(a, b, 1.0) == pytest.approx(-abs(a + b - 1.0), abs=1e-12)


def test_phi_half_half_closed_form() -> None:
    for x in np.linspace(0.0, 1.0, 101):
        assert phi(0.5, 0.5, float(x)) == pytest.approx(x * (1.0 - x) / (1.0 + x), abs=1e-10)


@pytest.mark.parametrize("a", [0.0, 1.0])
def test_phi_prime_is_minus_one_for_deterministic_inputs(a: float) -> None:
    for x in (0.0, 0.25, 0.5, 1.0):
        assert phi_prime(a, a, x) == -1.0


def test_phi_prime_initial_slope() -> None:
    a = 0.3
    assert phi_prime(a, a, 1e-6) == pytest.approx(4.0 * math.sqrt(a * (1.0 - a)) - 1.0, abs=1e-3)


def test_phi_prime_matches_central_difference(rng: np.random.Generator) -> None:
    h = 1e-6
    for a, b, x in rng.uniform(0.05, 0.95, size=(50, 3)):
        numeric = (phi(a, b, x + h) - phi(a, b, x - h)) / (2.0 * h)
        assert phi_prime(a, b, x) == pytest.approx(numeric, abs=1e-5)


def test_joint_reference_cells() -> None:
    assert joint(0.5, 0.5, 0.25).cells() == (0.0, 0.5, 0.5, 0.0)
    assert joint(0.5, 0.5, 0.0).cells() == (0.25, 0.25, 0.25, 0.25)


def test_joint_marginals_and_stationarity(rng: np.random.Generator) -> None:
    for a, b, x in rng.uniform(0.0, 1.0, size=(100, 3)):
        cells = joint(a, b, solve_c(a, b, x))
        assert sum(cells.cells()) == pytest.approx(1.0, abs=1e-12)
        assert cells.a == pytest.approx(a, abs=1e-12)
        assert cells.b == pytest.approx(b, abs=1e-12)
        assert cells.e1 * cells.e4 * (2.0 * x) ** 2 == pytest.approx(cells.e2 * cells.e3 * (1.0 - x) ** 2, abs=1e-10)


def test_joint_rejects_negative_cells() -> None:
    with pytest.raises(DomainError, match="joint cells must be nonnegative"):
        joint(0.5, 0.5, 0.3)


def test_coupling_symmetries(rng: np.random.Generator) -> None:
    for a, b, x in rng.uniform(0.0, 1.0, size=(100, 3)):
        assert solve_c(a, b, x) == pytest.approx(solve_c(b, a, x), abs=1e-10)
        assert phi(a, b, x) == pytest.approx(phi(b, a, x), abs=1e-10)
        assert phi(a, b, x) == pytest.approx(phi(1.0 - b, 1.0 - a, x), abs=1e-10)


def test_collapsed_residual_identity(rng: np.random.Generator) -> None:
    h = 1e-5
    for a, b, x in rng.uniform(0.05, 0.95, size=(50, 3)):
        derivative = (collapsed_residual(a, b, x + h) - collapsed_residual(a, b, x - h)) / (2.0 * h)
        lhs = 2.0 * collapsed_residual(a, b, x) - x * derivative
        assert lhs == pytest.approx(collapsed_residual_identity(a, b, x), abs=1e-8)


def test_collapsed_residual_vanishes_at_single_component_fixed_point() -> None:
    a = 0.5 - DELTA
    x_star = solve_x_star(Mixture.single(a, a)).x_star
    assert collapsed_residual(a, a, x_star) == pytest.approx(0.0, abs=1e-9)
    assert collapsed_residual(0.5, 0.5, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_vectorized_solvers_match_scalar_versions() -> None:
    a, b, x = np.meshgrid(
        np.array([0.0, 0.2, 0.5, 0.8]),
        np.array([0.1, 0.5, 1.0]),
        np.array([0.0, 0.1, 1.0 / 3.0, 0.3335, 0.6, 1.0]),
        indexing="ij",
    )
    c = solve_c_array(a, b, x)
    values = phi_array(a, b, x)
    slopes = phi_prime_array(a, b, x)
    for index in np.ndindex(a.shape):
        args = (float(a[index]), float(b[index]), float(x[index]))
        assert c[index] == pytest.approx(solve_c(*args), abs=1e-10)
        assert values[index] == pytest.approx(phi(*args), abs=1e-10)
        assert slopes[index] == pytest.approx(phi_prime(*args), abs=1e-6)


def test_vectorized_solver_rejects_out_of_range_entries() -> None:
    with pytest.raises(DomainError):
        solve_c_array([0.2, 1.3], 0.5, 0.5)
