from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from addercap.capacity.coupling import JointDistribution, joint
from addercap.capacity.entropy import entropy, h2
from addercap.capacity.feasibility import constraint_gap
from addercap.capacity.fixed_point import Mixture
from addercap.capacity.optimize import objective
from addercap.constants import (
    BELOKOPYTOV_A,
    CAPACITY,
    LAMBDA_STAR,
    R_CONST,
    RHO_SINGULARITY_TOLERANCE,
    STATIONARY_EQUATION_TOLERANCE,
    X1_AT_LAMBDA_STAR,
)
from addercap.errors import CertificationError, DomainError
from addercap.events import log_event

_LOGGER = logging.getLogger("addercap.lagrangian")

StationaryCase = Literal["case_a", "case_b", "case_c", "none"]

_GRADIENT_STEP = 1e-6
_INTERIOR_LOW = 0.02
_INTERIOR_HIGH = 0.98
_CELL_FLOOR = 1e-9
_UNIT_SUM_TOLERANCE = 1e-10
_SANDWICH_TOLERANCE = 1e-9
_X1_TOLERANCE = 1e-12


@dataclass(frozen=True)
class LagrangianParams:
    lam: float
    x1: float
    rho_r2: float


@dataclass(frozen=True)
class BoundReport:
    lam: float
    q_base: float
    q_case1: float
    q_case2: float
    bound: float
    overall: float


@dataclass(frozen=True)
class GradientCheck:
    max_abs_error: float
    analytic: tuple[float, ...]
    numeric: tuple[float, ...]


@dataclass(frozen=True)
class SandwichReport:
    params: LagrangianParams
    bound: BoundReport
    capacity: float
    lagrangian_at_optimum: float
    stationary_case: StationaryCase


def _check_lambda(lam: float) -> None:
    if not 0.0 < lam < 0.5:
        raise DomainError(f"lambda must be in (0, 1/2), got {lam!r}")


def rho(r: float, lam: float) -> float:
    _check_lambda(lam)
    if r <= 0.0:
        raise DomainError(f"r must be > 0, got {r!r}")
    if abs(r - 1.0) < RHO_SINGULARITY_TOLERANCE:
        return lam / (1.0 - lam)
    r_lam = r**lam
    return math.sqrt(r) * (r_lam - 1.0) / (r - r_lam)


def rho_prime(r: float, lam: float) -> float:
    _check_lambda(lam)
    if r <= 0.0:
        raise DomainError(f"r must be > 0, got {r!r}")
    if abs(r - 1.0) < RHO_SINGULARITY_TOLERANCE:
        return 0.0
    r_lam = r**lam
    numerator = r_lam * ((1.0 - 2.0 * lam) * (1.0 - r) - (r_lam - r ** (1.0 - lam)))
    return numerator / (2.0 * math.sqrt(r) * (r - r_lam) ** 2)


def x1_of(lam: float) -> LagrangianParams:
    _check_lambda(lam)
    rho_r2 = rho(R_CONST * R_CONST, lam)
    return LagrangianParams(lam=lam, x1=1.0 / (1.0 + 2.0 * rho_r2), rho_r2=rho_r2)


def theorem_bound(lam: float) -> BoundReport:
    params = x1_of(lam)
    x1 = params.x1
    root3 = math.sqrt(3.0)
    q_base = (1.0 + lam) / 2.0
    q_case1 = 1.0 - lam * math.log2(1.0 + x1)
    q_case2 = entropy((R_CONST / 4.0 - root3 / 4.0 * x1, 1.0 / (4.0 * R_CONST) + root3 / 4.0 * x1)) + lam * (
        -1.0 + root3 / 2.0 * math.log2(R_CONST) * (1.0 - x1)
    )
    bound = max(q_case1, q_case2)
    return BoundReport(
        lam=lam,
        q_base=q_base,
        q_case1=q_case1,
        q_case2=q_case2,
        bound=bound,
        overall=max(bound, q_base),
    )


def lagrangian_value(mix: Mixture, lam: float) -> float:
    if not 0.0 <= lam < 0.5:
        raise DomainError(f"lambda must be in [0, 1/2), got {lam!r}")
    return objective(mix) + lam * constraint_gap(mix).constraint_gap


def _stationary_term(u: float, v: float, lam: float) -> float:
    return math.log2((u * v) ** lam / (u + v))


def _analytic_gradient(mix: Mixture, lam: float) -> tuple[float, ...]:
    report = constraint_gap(mix)
    partial_a = []
    partial_b = []
    for (p, a, b), c in zip(mix.components(), report.couplings):
        cells = joint(a, b, c)
        if min(cells.cells()) < _CELL_FLOOR:
            log_event(_LOGGER, logging.WARNING, "lagrangian.grad_check.singular", cells=cells.cells())
            raise DomainError(f"joint cells must be >= {_CELL_FLOOR!r} for the gradient, got {cells.cells()}")
        e1, e2, e3, e4 = cells.cells()
        partial_a.append(p / 2.0 * (_stationary_term(e1, e2, lam) - _stationary_term(e3, e4, lam)))
        partial_b.append(p / 2.0 * (_stationary_term(e1, e3, lam) - _stationary_term(e2, e4, lam)))
    return (*partial_a, *partial_b)


def _numeric_gradient(mix: Mixture, lam: float) -> tuple[float, ...]:
    partials = []
    for field_name in ("a", "b"):
        for index in range(mix.n):
            values = list(getattr(mix, field_name))

            def shifted(step: float) -> Mixture:
                moved = list(values)
                moved[index] += step
                return Mixture(**{"p": mix.p, "a": mix.a, "b": mix.b, field_name: tuple(moved)})

            upper = lagrangian_value(shifted(_GRADIENT_STEP), lam)
            lower = lagrangian_value(shifted(-_GRADIENT_STEP), lam)
            partials.append((upper - lower) / (2.0 * _GRADIENT_STEP))
    return tuple(partials)


def partial_derivatives(mix: Mixture, lam: float) -> tuple[float, ...]:
    """Closed-form ``dL/da_i`` followed by ``dL/db_i`` at the fixed-point couplings."""
    _check_lambda(lam)
    return _analytic_gradient(mix, lam)


def grad_check(mix: Mixture, lam: float) -> GradientCheck:
    _check_lambda(lam)
    if any(p <= 0.0 for p in mix.p):
        raise DomainError("grad_check needs every weight > 0")
    for value in (*mix.a, *mix.b):
        if not _INTERIOR_LOW < value < _INTERIOR_HIGH:
            raise DomainError(f"grad_check needs a and b in ({_INTERIOR_LOW}, {_INTERIOR_HIGH}), got {value!r}")
    if all(abs(a + b - 1.0) <= _UNIT_SUM_TOLERANCE for a, b in zip(mix.a, mix.b)):
        raise DomainError("grad_check needs some component with a + b != 1")

    analytic = _analytic_gradient(mix, lam)
    numeric = _numeric_gradient(mix, lam)
    error = max(abs(left - right) for left, right in zip(analytic, numeric))
    return GradientCheck(max_abs_error=error, analytic=analytic, numeric=numeric)


def _equal(left: float, right: float, tolerance: float) -> bool:
    return abs(left - right) <= tolerance * max(1.0, abs(left), abs(right))


def classify_stationary(cells: JointDistribution, lam: float) -> StationaryCase:
    _check_lambda(lam)
    e1, e2, e3, e4 = cells.cells()
    if min(e1, e2, e3, e4) <= 0.0:
        raise DomainError(f"cells must be positive, got {cells.cells()}")

    tolerance = STATIONARY_EQUATION_TOLERANCE
    first = _equal((e1 * e2) ** lam / (e1 + e2), (e3 * e4) ** lam / (e3 + e4), tolerance)
    second = _equal((e1 * e3) ** lam / (e1 + e3), (e2 * e4) ** lam / (e2 + e4), tolerance)
    if not (first and second):
        return "none"

    y = math.sqrt(e1 * e4) / math.sqrt(e2 * e3)
    outer_equal = _equal(e1, e4, tolerance)
    inner_equal = _equal(e2, e3, tolerance)
    if outer_equal and inner_equal:
        return "case_a"
    if inner_equal and _equal(y, rho(e1 / e4, lam), tolerance):
        return "case_b"
    if outer_equal and _equal(y, 1.0 / rho(e2 / e3, lam), tolerance):
        return "case_c"

    log_event(_LOGGER, logging.WARNING, "lagrangian.classify.unmatched", cells=cells.cells(), lam=lam)
    return "none"


def solve_unit_ratio() -> tuple[float, float]:
    # r + 1 = 4 sqrt(r) is a quadratic in sqrt(r).
    roots = np.roots([1.0, -4.0, 1.0])
    ratios = sorted(float(root.real) ** 2 for root in roots)
    return ratios[0], ratios[1]


def x_star_one_value(mix: Mixture, lam: float) -> float:
    if any(abs(a + b - 1.0) > _UNIT_SUM_TOLERANCE for a, b in zip(mix.a, mix.b)):
        raise DomainError("every component must satisfy a + b = 1")
    return (1.0 - lam) * math.fsum(p * h2(a) for p, a, _ in mix.components())


def verify_sandwich() -> SandwichReport:
    params = x1_of(LAMBDA_STAR)
    bound = theorem_bound(LAMBDA_STAR)
    optimum = Mixture.single(BELOKOPYTOV_A, BELOKOPYTOV_A)
    report = constraint_gap(optimum)
    cells = joint(BELOKOPYTOV_A, BELOKOPYTOV_A, report.couplings[0])
    stationary_case = classify_stationary(cells, LAMBDA_STAR)

    if abs(params.x1 - X1_AT_LAMBDA_STAR) > _X1_TOLERANCE:
        raise CertificationError(f"x1 must equal 1 - 4 delta / sqrt(3), got {params.x1!r}")
    if not (bound.q_base < bound.q_case2 and bound.q_case1 < bound.q_case2):
        raise CertificationError(f"case 2 must dominate the bound, got {bound}")
    if abs(bound.overall - CAPACITY) > _SANDWICH_TOLERANCE:
        raise CertificationError(f"upper bound must meet the capacity, got {bound.overall!r}")

    lagrangian_at_optimum = objective(optimum) + LAMBDA_STAR * report.constraint_gap
    log_event(
        _LOGGER,
        logging.INFO,
        "lagrangian.verify.completed",
        q_base=bound.q_base,
        q_case1=bound.q_case1,
        q_case2=bound.q_case2,
        stationary_case=stationary_case,
    )
    return SandwichReport(
        params=params,
        bound=bound,
        capacity=CAPACITY,
        lagrangian_at_optimum=lagrangian_at_optimum,
        stationary_case=stationary_case,
    )
