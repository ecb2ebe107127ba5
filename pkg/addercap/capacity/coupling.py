from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import bisect
from scipy.optimize.elementwise import find_root

from addercap.capacity.entropy import s4_cells
from addercap.constants import (
    BISECTION_MAX_ITERATIONS,
    BISECTION_TOLERANCE,
    BRANCH_SWITCH_TOLERANCE,
    CELL_CLAMP_TOLERANCE,
    COUPLING_RESIDUAL_TOLERANCE,
    DERIVATIVE_FLOOR,
    FINITE_DIFFERENCE_STEP,
)
from addercap.errors import DomainError, SolverError
from addercap.events import log_event

_LOGGER = logging.getLogger("addercap.coupling")
_CENTER_X = 1.0 / 3.0

SolveMethod = Literal["closed", "bisect"]
BranchSign = Literal["plus", "minus", "center"]
_SOLVE_METHODS: tuple[SolveMethod, ...] = ("closed", "bisect")


@dataclass(frozen=True)
class CouplingBox:
    lo: float
    hi: float

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    def contains(self, c: float, tolerance: float = CELL_CLAMP_TOLERANCE) -> bool:
        return self.lo - tolerance <= c <= self.hi + tolerance

    def grid(self, points: int) -> NDArray[np.float64]:
        if self.degenerate:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, points)


@dataclass(frozen=True)
class JointDistribution:
    e1: float
    e2: float
    e3: float
    e4: float

    def cells(self) -> tuple[float, float, float, float]:
        return (self.e1, self.e2, self.e3, self.e4)

    @property
    def a(self) -> float:
        return self.e1 + self.e2

    @property
    def b(self) -> float:
        return self.e1 + self.e3


@dataclass(frozen=True)
class ClosedFormBranch:
    u: float
    v: float
    s: float
    t: float
    sign: BranchSign


def _unit(name: str, value: float) -> float:
    if math.isnan(value) or not -CELL_CLAMP_TOLERANCE <= value <= 1.0 + CELL_CLAMP_TOLERANCE:
        raise DomainError(f"{name} must be in [0, 1], got {value!r}")
    return min(max(float(value), 0.0), 1.0)


def coupling_box(a: float, b: float) -> CouplingBox:
    a = _unit("a", a)
    b = _unit("b", b)
    a_bar = 1.0 - a
    b_bar = 1.0 - b
    return CouplingBox(lo=-min(a * b_bar, a_bar * b), hi=min(a * b, a_bar * b_bar))


def _m(a: float, b: float, c: float, x: float) -> float:
    a_bar = 1.0 - a
    b_bar = 1.0 - b
    return (a * b_bar + c) * (a_bar * b + c) * (1.0 - x) ** 2 - (a * b - c) * (a_bar * b_bar - c) * (2.0 * x) ** 2


def eval_m(a: float, b: float, c: float, x: float) -> float:
    """Residual of the coupling equation; increasing in ``c`` across the box."""
    box = coupling_box(a, b)
    x = _unit("x", x)
    if not box.contains(c):
        raise DomainError(f"c must be in [{box.lo!r}, {box.hi!r}], got {c!r}")
    return _m(a, b, c, x)


def branch(a: float, b: float, x: float) -> ClosedFormBranch:
    a = _unit("a", a)
    b = _unit("b", b)
    x = _unit("x", x)
    s = a * (1.0 - b) + (1.0 - a) * b
    t = abs(a - b)

    sign: BranchSign
    if abs(x - _CENTER_X) <= BRANCH_SWITCH_TOLERANCE:
        sign = "center"
    elif x < _CENTER_X:
        sign = "plus"
    else:
        sign = "minus"

    denominator = (1.0 + x) * (1.0 - 3.0 * x)
    if denominator == 0.0:
        return ClosedFormBranch(u=math.inf, v=math.inf, s=s, t=t, sign=sign)

    u = -4.0 * x * x / denominator
    v = u * u - 2.0 * s * u + t * t
    if v < -CELL_CLAMP_TOLERANCE and sign != "center":
        raise SolverError(f"closed-form discriminant must be nonnegative, got {v!r} at a={a!r}, b={b!r}, x={x!r}")
    return ClosedFormBranch(u=u, v=max(v, 0.0), s=s, t=t, sign=sign)


def _bisect_c(a: float, b: float, x: float, box: CouplingBox) -> float:
    if _m(a, b, box.lo, x) >= 0.0:
        return box.lo
    if _m(a, b, box.hi, x) <= 0.0:
        return box.hi

    try:
        return float(
            bisect(
                lambda c: _m(a, b, c, x),
                box.lo,
                box.hi,
                xtol=BISECTION_TOLERANCE,
                maxiter=BISECTION_MAX_ITERATIONS,
            )
        )
    except RuntimeError as exc:
        raise SolverError(f"coupling bisection did not converge at a={a!r}, b={b!r}, x={x!r}") from exc


def solve_c(a: float, b: float, x: float, method: SolveMethod = "closed") -> float:
    if method not in _SOLVE_METHODS:
        raise DomainError(f"method must be one of {_SOLVE_METHODS}, got {method!r}")

    box = coupling_box(a, b)
    a = _unit("a", a)
    b = _unit("b", b)
    x = _unit("x", x)
    if box.degenerate:
        return 0.0

    if method == "bisect":
        c = _bisect_c(a, b, x, box)
    else:
        selected = branch(a, b, x)
        if selected.sign == "center":
            log_event(_LOGGER, logging.DEBUG, "coupling.solve.bisect_fallback", a=a, b=b, x=x)
            c = _bisect_c(a, b, x, box)
        else:
            root = math.sqrt(selected.v)
            if selected.sign == "plus":
                c = 0.5 * (-selected.s + selected.u + root)
            else:
                c = 0.5 * (-selected.s + selected.u - root)
            c = min(max(c, box.lo), box.hi)

    residual = abs(_m(a, b, c, x))
    if residual > COUPLING_RESIDUAL_TOLERANCE:
        raise SolverError(
            f"coupling residual must be <= {COUPLING_RESIDUAL_TOLERANCE!r}, got {residual!r} "
            f"at a={a!r}, b={b!r}, x={x!r}"
        )
    return c


def phi(a: float, b: float, x: float) -> float:
    c = solve_c(a, b, x)
    a = _unit("a", a)
    b = _unit("b", b)
    return a * (1.0 - b) + (1.0 - a) * b + 2.0 * c - _unit("x", x)


def _finite_difference_phi(a: float, b: float, x: float) -> float:
    step = FINITE_DIFFERENCE_STEP
    if x + step <= 1.0:
        return (phi(a, b, x + step) - phi(a, b, x)) / step
    return (phi(a, b, x) - phi(a, b, x - step)) / step


def phi_prime(a: float, b: float, x: float) -> float:
    box = coupling_box(a, b)
    a = _unit("a", a)
    b = _unit("b", b)
    x = _unit("x", x)
    if box.degenerate:
        return -1.0

    c = solve_c(a, b, x)
    a_bar = 1.0 - a
    b_bar = 1.0 - b
    s = a * b_bar + a_bar * b
    dm_dc = (s + 2.0 * c) * (1.0 - x) ** 2 + (a * b + a_bar * b_bar - 2.0 * c) * (2.0 * x) ** 2
    if dm_dc < DERIVATIVE_FLOOR:
        log_event(_LOGGER, logging.DEBUG, "coupling.phi_prime.finite_difference", a=a, b=b, x=x)
        return _finite_difference_phi(a, b, x)

    dm_dx = -2.0 * (1.0 - x) * (a * b_bar + c) * (a_bar * b + c) - 8.0 * x * (a * b - c) * (a_bar * b_bar - c)
    return 2.0 * (-dm_dx / dm_dc) - 1.0


def joint(a: float, b: float, c: float) -> JointDistribution:
    a = _unit("a", a)
    b = _unit("b", b)
    cells = s4_cells(a, b, c)
    worst = min(cells)
    if worst < -CELL_CLAMP_TOLERANCE:
        raise DomainError(f"joint cells must be nonnegative, got {worst!r} for a={a!r}, b={b!r}, c={c!r}")
    e1, e2, e3, e4 = (max(cell, 0.0) for cell in cells)
    return JointDistribution(e1=e1, e2=e2, e3=e3, e4=e4)


def collapsed_residual(a: float, b: float, x: float) -> float:
    """Coupling equation with ``c = (x - s) / 2`` substituted, scaled by ``-4``.

    Roots in ``(0, 1]`` are exactly the fixed points of a single component.
    """
    a = _unit("a", a)
    b = _unit("b", b)
    x = _unit("x", x)
    a_bar = 1.0 - a
    b_bar = 1.0 - b
    return (a + b - x) * (a_bar + b_bar - x) * (2.0 * x) ** 2 + (a - b + x) * (a - b - x) * (1.0 - x) ** 2


def collapsed_residual_identity(a: float, b: float, x: float) -> float:
    # Closed form of 2 m(x) - x m'(x) for the collapsed residual.
    a = _unit("a", a)
    b = _unit("b", b)
    x = _unit("x", x)
    return 2.0 * (1.0 - x) * ((a - b) ** 2 + 3.0 * x * x)


def _broadcast_unit(**arrays: ArrayLike) -> list[NDArray[np.float64]]:
    values = np.broadcast_arrays(*(np.asarray(array, dtype=np.float64) for array in arrays.values()))
    checked = []
    for name, value in zip(arrays, values):
        if np.any(np.isnan(value)) or np.any(value < -CELL_CLAMP_TOLERANCE) or np.any(value > 1.0 + CELL_CLAMP_TOLERANCE):
            raise DomainError(f"{name} must lie in [0, 1] for every entry")
        checked.append(np.clip(value, 0.0, 1.0))
    return checked


def _m_array(
    c: NDArray[np.float64],
    a: NDArray[np.float64],
    b: NDArray[np.float64],
    x: NDArray[np.float64],
) -> NDArray[np.float64]:
    return (a * (1.0 - b) + c) * ((1.0 - a) * b + c) * (1.0 - x) ** 2 - (a * b - c) * (
        (1.0 - a) * (1.0 - b) - c
    ) * (2.0 * x) ** 2


def solve_c_array(a: ArrayLike, b: ArrayLike, x: ArrayLike) -> NDArray[np.float64]:
    a_arr, b_arr, x_arr = _broadcast_unit(a=a, b=b, x=x)
    a_bar = 1.0 - a_arr
    b_bar = 1.0 - b_arr
    lo = -np.minimum(a_arr * b_bar, a_bar * b_arr)
    hi = np.minimum(a_arr * b_arr, a_bar * b_bar)
    s = a_arr * b_bar + a_bar * b_arr
    t = np.abs(a_arr - b_arr)

    degenerate = lo == hi
    center = (np.abs(x_arr - _CENTER_X) <= BRANCH_SWITCH_TOLERANCE) & ~degenerate
    closed = ~(center | degenerate)

    with np.errstate(divide="ignore", invalid="ignore"):
        u = -4.0 * x_arr**2 / ((1.0 + x_arr) * (1.0 - 3.0 * x_arr))
        v = u * u - 2.0 * s * u + t * t
    if np.any(v[closed] < -CELL_CLAMP_TOLERANCE):
        raise SolverError("closed-form discriminant must be nonnegative on every entry")

    root = np.sqrt(np.where(closed, np.maximum(v, 0.0), 0.0))
    signed_root = np.where(x_arr < _CENTER_X, root, -root)
    c = np.where(closed, 0.5 * (-s + np.where(closed, u, 0.0) + signed_root), 0.0)

    if np.any(center):
        c[center] = _find_root_array(a_arr[center], b_arr[center], x_arr[center], lo[center], hi[center])

    return np.clip(c, lo, hi)


def _find_root_array(
    a: NDArray[np.float64],
    b: NDArray[np.float64],
    x: NDArray[np.float64],
    lo: NDArray[np.float64],
    hi: NDArray[np.float64],
) -> NDArray[np.float64]:
    out = np.empty_like(a)
    at_lo = _m_array(lo, a, b, x) >= 0.0
    at_hi = ~at_lo & (_m_array(hi, a, b, x) <= 0.0)
    interior = ~(at_lo | at_hi)
    out[at_lo] = lo[at_lo]
    out[at_hi] = hi[at_hi]
    if np.any(interior):
        result = find_root(
            _m_array,
            (lo[interior], hi[interior]),
            args=(a[interior], b[interior], x[interior]),
            tolerances={"xatol": BISECTION_TOLERANCE},
            maxiter=BISECTION_MAX_ITERATIONS,
        )
        if not np.all(result.success):
            raise SolverError("vectorized coupling root search did not converge")
        out[interior] = result.x
    return out


def phi_array(a: ArrayLike, b: ArrayLike, x: ArrayLike) -> NDArray[np.float64]:
    a_arr, b_arr, x_arr = _broadcast_unit(a=a, b=b, x=x)
    c = solve_c_array(a_arr, b_arr, x_arr)
    return a_arr * (1.0 - b_arr) + (1.0 - a_arr) * b_arr + 2.0 * c - x_arr


def phi_prime_array(a: ArrayLike, b: ArrayLike, x: ArrayLike) -> NDArray[np.float64]:
    a_arr, b_arr, x_arr = _broadcast_unit(a=a, b=b, x=x)
    c = solve_c_array(a_arr, b_arr, x_arr)
    a_bar = 1.0 - a_arr
    b_bar = 1.0 - b_arr
    s = a_arr * b_bar + a_bar * b_arr
    dm_dc = (s + 2.0 * c) * (1.0 - x_arr) ** 2 + (a_arr * b_arr + a_bar * b_bar - 2.0 * c) * (2.0 * x_arr) ** 2
    dm_dx = -2.0 * (1.0 - x_arr) * (a_arr * b_bar + c) * (a_bar * b_arr + c) - 8.0 * x_arr * (a_arr * b_arr - c) * (
        a_bar * b_bar - c
    )

    flat = dm_dc < DERIVATIVE_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(flat, 0.0, 2.0 * (-dm_dx / np.where(flat, 1.0, dm_dc)) - 1.0)

    if np.any(flat):
        step = FINITE_DIFFERENCE_STEP
        forward = x_arr[flat] + step <= 1.0
        left = np.where(forward, x_arr[flat], x_arr[flat] - step)
        right = left + step
        slope[flat] = (phi_array(a_arr[flat], b_arr[flat], right) - phi_array(a_arr[flat], b_arr[flat], left)) / step

    degenerate = np.minimum(a_arr * b_bar, a_bar * b_arr) + np.minimum(a_arr * b_arr, a_bar * b_bar) == 0.0
    return np.where(degenerate, -1.0, slope)
