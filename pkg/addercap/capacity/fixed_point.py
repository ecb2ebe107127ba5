from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq
from scipy.optimize.elementwise import find_root

from addercap.capacity.coupling import phi, phi_array, phi_prime
from addercap.constants import (
    BISECTION_MAX_ITERATIONS,
    CERTIFY_SCAN_POINTS,
    DOMAIN_TOLERANCE,
    NEAR_BOUNDARY_MARGIN,
    SIMPLEX_TOLERANCE,
    X_STAR_RESIDUAL_TOLERANCE,
    X_STAR_SCAN_FLOOR,
    X_STAR_TOLERANCE,
)
from addercap.errors import DomainError, SolverError
from addercap.events import log_event

_LOGGER = logging.getLogger("addercap.fixed_point")


@dataclass(frozen=True)
class Mixture:
    p: tuple[float, ...]
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self) -> None:
        p = tuple(float(value) for value in self.p)
        a = tuple(float(value) for value in self.a)
        b = tuple(float(value) for value in self.b)
        if not p:
            raise DomainError("mixture must have at least one component")
        if not len(p) == len(a) == len(b):
            raise DomainError(f"p, a and b must have equal lengths, got {len(p)}, {len(a)} and {len(b)}")
        for name, values in (("p", p), ("a", a), ("b", b)):
            for value in values:
                if math.isnan(value) or not 0.0 <= value <= 1.0:
                    raise DomainError(f"{name} entries must be in [0, 1], got {value!r}")
        total = math.fsum(p)
        if abs(total - 1.0) > SIMPLEX_TOLERANCE:
            raise DomainError(f"p must sum to 1, got {total!r}")

        object.__setattr__(self, "p", p)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def single(cls, a: float, b: float) -> Mixture:
        return cls(p=(1.0,), a=(a,), b=(b,))

    @property
    def n(self) -> int:
        return len(self.p)

    def components(self) -> Iterator[tuple[float, float, float]]:
        return zip(self.p, self.a, self.b)

    def swapped(self) -> Mixture:
        return Mixture(p=self.p, a=self.b, b=self.a)

    def complemented(self) -> Mixture:
        return Mixture(p=self.p, a=tuple(1.0 - value for value in self.a), b=tuple(1.0 - value for value in self.b))

    def to_payload(self) -> dict[str, list[float]]:
        return {"p": list(self.p), "a": list(self.a), "b": list(self.b)}


@dataclass(frozen=True)
class FixedPointResult:
    x_star: float
    residual: float
    phi_prime_at: float
    found: bool
    near_boundary: bool = False
    sign_changes: int | None = field(default=None)


def _domain_margins(mix: Mixture) -> tuple[float, float]:
    asymmetry = math.fsum(p * abs(a - b) for p, a, b in mix.components())
    spread = math.fsum(p * math.sqrt(a * (1.0 - a)) for p, a, _ in mix.components())
    return asymmetry, spread - 0.25


def in_domain(mix: Mixture) -> bool:
    asymmetry, spread = _domain_margins(mix)
    return asymmetry > DOMAIN_TOLERANCE or spread > DOMAIN_TOLERANCE


def is_near_boundary(mix: Mixture) -> bool:
    asymmetry, spread = _domain_margins(mix)
    return max(asymmetry, spread) < NEAR_BOUNDARY_MARGIN


def phi_mix(mix: Mixture, x: float) -> float:
    return math.fsum(p * phi(a, b, x) for p, a, b in mix.components() if p > 0.0)


def phi_mix_prime(mix: Mixture, x: float) -> float:
    return math.fsum(p * phi_prime(a, b, x) for p, a, b in mix.components() if p > 0.0)


def phi_mix_array(mix: Mixture, x: ArrayLike) -> NDArray[np.float64]:
    grid = np.asarray(x, dtype=np.float64)
    total = np.zeros_like(grid)
    for p, a, b in mix.components():
        if p > 0.0:
            total += p * phi_array(a, b, grid)
    return total


def count_sign_changes(values: Sequence[float] | NDArray[np.float64]) -> int:
    signs = np.sign(np.asarray(values, dtype=np.float64))
    signs = signs[signs != 0.0]
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def _bracket_from_above(mix: Mixture) -> tuple[float, float]:
    right = 1.0
    left = 0.5
    while left >= X_STAR_SCAN_FLOOR:
        if phi_mix(mix, left) > 0.0:
            return left, right
        right = left
        left *= 0.5
    raise SolverError(f"no sign change of phi found down to x={X_STAR_SCAN_FLOOR!r} for mixture {mix.to_payload()}")


def solve_x_star(mix: Mixture, *, certify: bool = False) -> FixedPointResult:
    if not in_domain(mix):
        raise DomainError(f"mixture must lie in the fixed-point domain, got {mix.to_payload()}")

    near_boundary = is_near_boundary(mix)
    if near_boundary:
        log_event(_LOGGER, logging.INFO, "fixed_point.solve.near_boundary", mixture=mix.to_payload())

    if abs(phi_mix(mix, 1.0)) <= DOMAIN_TOLERANCE:
        x_star = 1.0
    else:
        left, right = _bracket_from_above(mix)
        try:
            x_star = float(
                brentq(
                    lambda x: phi_mix(mix, x),
                    left,
                    right,
                    xtol=X_STAR_TOLERANCE,
                    maxiter=BISECTION_MAX_ITERATIONS,
                )
            )
        except (RuntimeError, ValueError) as exc:
            raise SolverError(f"fixed-point root search failed on [{left!r}, {right!r}]") from exc

    residual = abs(phi_mix(mix, x_star))
    slope = phi_mix_prime(mix, x_star)
    found = residual <= X_STAR_RESIDUAL_TOLERANCE and slope < 0.0
    if not found:
        log_event(
            _LOGGER,
            logging.WARNING,
            "fixed_point.solve.unverified",
            x_star=x_star,
            residual=residual,
            phi_prime_at=slope,
        )

    sign_changes = None
    if certify:
        uniform = np.arange(1, CERTIFY_SCAN_POINTS + 1, dtype=np.float64) / CERTIFY_SCAN_POINTS
        # Log-spaced points below the first uniform point catch roots near zero.
        grid = np.union1d(np.geomspace(X_STAR_SCAN_FLOOR, uniform[0], 32, endpoint=False), uniform)
        values = phi_mix_array(mix, grid)
        values = np.where(np.abs(values) <= DOMAIN_TOLERANCE, 0.0, values)
        sign_changes = count_sign_changes(values)
        # A root exactly at x = 1 shows up as a zero, not a sign change.
        if values[-1] == 0.0:
            sign_changes += 1
        if sign_changes > 1:
            log_event(_LOGGER, logging.WARNING, "fixed_point.certify.multiple_sign_changes", sign_changes=sign_changes)

    return FixedPointResult(
        x_star=x_star,
        residual=residual,
        phi_prime_at=slope,
        found=found,
        near_boundary=near_boundary,
        sign_changes=sign_changes,
    )


def _phi_root_target(x: NDArray[np.float64], a: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    return phi_array(a, b, x)


def solve_x_star_grid(a: ArrayLike, b: ArrayLike) -> NDArray[np.float64]:
    """Single-component fixed points over broadcast ``(a, b)`` arrays.

    Entries outside the domain come back as NaN.
    """
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64))
    a_arr = np.array(a_arr)
    b_arr = np.array(b_arr)
    out = np.full(a_arr.shape, np.nan)

    inside = (np.abs(a_arr - b_arr) > DOMAIN_TOLERANCE) | (np.sqrt(a_arr * (1.0 - a_arr)) - 0.25 > DOMAIN_TOLERANCE)
    at_one = inside & (np.abs(phi_array(a_arr, b_arr, 1.0)) <= DOMAIN_TOLERANCE)
    out[at_one] = 1.0

    pending = inside & ~at_one
    left = np.full(a_arr.shape, 0.5)
    right = np.ones(a_arr.shape)
    bracketed = np.zeros(a_arr.shape, dtype=bool)
    while np.any(pending & ~bracketed) and np.min(left[pending & ~bracketed]) >= X_STAR_SCAN_FLOOR:
        open_entries = pending & ~bracketed
        positive = phi_array(a_arr[open_entries], b_arr[open_entries], left[open_entries]) > 0.0
        newly = np.zeros(a_arr.shape, dtype=bool)
        newly[open_entries] = positive
        bracketed |= newly
        still_open = open_entries & ~newly
        right[still_open] = left[still_open]
        left[still_open] *= 0.5

    if np.any(pending & ~bracketed):
        raise SolverError("no sign change of phi found for some grid entries")

    if np.any(pending):
        result = find_root(
            _phi_root_target,
            (left[pending], right[pending]),
            args=(a_arr[pending], b_arr[pending]),
            tolerances={"xatol": X_STAR_TOLERANCE},
            maxiter=BISECTION_MAX_ITERATIONS,
        )
        if not np.all(result.success):
            raise SolverError("vectorized fixed-point search did not converge")
        out[pending] = result.x
    return out
