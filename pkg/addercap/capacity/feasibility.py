from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from addercap.capacity.coupling import coupling_box, joint, solve_c
from addercap.capacity.entropy import h2_array, s3, s3_array, s4, s4_array
from addercap.capacity.fixed_point import FixedPointResult, Mixture, solve_x_star, solve_x_star_grid
from addercap.constants import (
    BELOKOPYTOV_A,
    CELL_CLAMP_TOLERANCE,
    DELTA,
    DOMAIN_TOLERANCE,
    FEASIBILITY_TOLERANCE,
    MAX_GRID_PER_AXIS,
    MAX_MIXTURE_COMPONENTS,
    resolve_thread_count,
)
from addercap.errors import DomainError
from addercap.events import log_event

_LOGGER = logging.getLogger("addercap.feasibility")


@dataclass(frozen=True)
class FeasibilityReport:
    x_star: float
    constraint_gap: float
    brute_min_gap: float | None
    feasible: bool
    couplings: tuple[float, ...] = ()
    fixed_point: FixedPointResult | None = None


@dataclass(frozen=True)
class GridMinimum:
    value: float
    c: tuple[float, ...]
    index: tuple[int, ...]


@dataclass(frozen=True)
class FeasibilityMap:
    a: NDArray[np.float64]
    b: NDArray[np.float64]
    x_star: NDArray[np.float64]
    gap: NDArray[np.float64]
    objective: NDArray[np.float64]
    in_domain: NDArray[np.bool_]

    def rows(self) -> list[tuple[float, float, float, float]]:
        return [
            (float(a), float(b), float(gap), float(objective))
            for a, b, gap, objective in zip(self.a.ravel(), self.b.ravel(), self.gap.ravel(), self.objective.ravel())
        ]


def _middle_mass(mix: Mixture, c: Sequence[float]) -> float:
    return math.fsum(p * (a * (1.0 - b) + (1.0 - a) * b + 2.0 * ci) for (p, a, b), ci in zip(mix.components(), c))


def _check_couplings(mix: Mixture, c: Sequence[float]) -> None:
    if len(c) != mix.n:
        raise DomainError(f"c must have {mix.n} entries, got {len(c)}")
    for (_, a, b), ci in zip(mix.components(), c):
        box = coupling_box(a, b)
        if not box.contains(ci):
            raise DomainError(f"c must be in [{box.lo!r}, {box.hi!r}], got {ci!r}")


def gap_at(mix: Mixture, c: Sequence[float]) -> float:
    _check_couplings(mix, c)
    x = _middle_mass(mix, c)
    return s3(x) - math.fsum(p * s4(a, b, ci) for (p, a, b), ci in zip(mix.components(), c))


def constraint_gap(mix: Mixture, *, grid_per_axis: int | None = None, threads: int | None = None) -> FeasibilityReport:
    fixed_point = solve_x_star(mix)
    couplings = tuple(solve_c(a, b, fixed_point.x_star) for _, a, b in mix.components())
    gap = gap_at(mix, couplings)
    brute = None if grid_per_axis is None else brute_min_gap(mix, grid_per_axis, threads=threads)
    return FeasibilityReport(
        x_star=fixed_point.x_star,
        constraint_gap=gap,
        brute_min_gap=brute,
        feasible=gap >= -FEASIBILITY_TOLERANCE,
        couplings=couplings,
        fixed_point=fixed_point,
    )


def _component_grids(mix: Mixture, grid_per_axis: int) -> list[NDArray[np.float64]]:
    return [coupling_box(a, b).grid(grid_per_axis) for _, a, b in mix.components()]


def grid_minimizer(mix: Mixture, grid_per_axis: int, *, threads: int | None = None) -> GridMinimum:
    if mix.n > MAX_MIXTURE_COMPONENTS:
        raise DomainError(f"grid minimization supports at most {MAX_MIXTURE_COMPONENTS} components, got {mix.n}")
    if not 2 <= grid_per_axis <= MAX_GRID_PER_AXIS:
        raise DomainError(f"grid_per_axis must be in [2, {MAX_GRID_PER_AXIS}], got {grid_per_axis}")

    grids = _component_grids(mix, grid_per_axis)
    middles = [p * (a * (1.0 - b) + (1.0 - a) * b + 2.0 * grid) for (p, a, b), grid in zip(mix.components(), grids)]
    weighted = [p * s4_array(a, b, grid) for (p, a, b), grid in zip(mix.components(), grids)]

    tail_middle = reduce(np.add.outer, middles[1:], np.zeros(()))
    tail_weighted = reduce(np.add.outer, weighted[1:], np.zeros(()))
    tail_shape = tail_middle.shape

    def slice_minimum(head: int) -> tuple[float, int]:
        values = s3_array(middles[0][head] + tail_middle) - (weighted[0][head] + tail_weighted)
        flat = int(np.argmin(values))
        return float(values.flat[flat]), flat

    worker_count = resolve_thread_count() if threads is None else max(1, threads)
    heads = range(len(grids[0]))
    if worker_count > 1 and len(grids[0]) > 1:
        with ThreadPoolExecutor(max_workers=worker_count) as executor:
            minima = list(executor.map(slice_minimum, heads))
    else:
        minima = [slice_minimum(head) for head in heads]

    best_head = 0
    for head, (value, _) in enumerate(minima):
        if value < minima[best_head][0]:
            best_head = head
    value, flat = minima[best_head]
    tail_index = tuple(int(i) for i in np.unravel_index(flat, tail_shape)) if tail_shape else ()
    index = (best_head, *tail_index)
    c = tuple(float(grid[k]) for grid, k in zip(grids, index))

    log_event(
        _LOGGER,
        logging.DEBUG,
        "feasibility.grid.completed",
        components=mix.n,
        grid_per_axis=grid_per_axis,
        threads=worker_count,
        value=value,
    )
    return GridMinimum(value=value, c=c, index=index)


def brute_min_gap(mix: Mixture, grid_per_axis: int, *, threads: int | None = None) -> float:
    return grid_minimizer(mix, grid_per_axis, threads=threads).value


def gap_gradient(mix: Mixture, c: Sequence[float]) -> tuple[float, ...]:
    _check_couplings(mix, c)
    x = _middle_mass(mix, c)
    if not CELL_CLAMP_TOLERANCE < x < 1.0 - CELL_CLAMP_TOLERANCE:
        raise DomainError(f"middle mass must be in (0, 1) for the gradient, got {x!r}")

    output_term = 2.0 * math.log2((1.0 - x) / (2.0 * x))
    gradient = []
    for (p, a, b), ci in zip(mix.components(), c):
        cells = joint(a, b, ci)
        if min(cells.cells()) <= 0.0:
            raise DomainError(f"joint cells must be positive for the gradient, got {cells.cells()}")
        gradient.append(p * (output_term - math.log2((cells.e1 * cells.e4) / (cells.e2 * cells.e3))))
    return tuple(gradient)


def belokopytov_gap(c: float) -> float:
    return gap_at(Mixture.single(BELOKOPYTOV_A, BELOKOPYTOV_A), (c,))


def belokopytov_gap_derivative(c: float) -> float:
    box = coupling_box(BELOKOPYTOV_A, BELOKOPYTOV_A)
    if not box.lo < c < box.hi:
        raise DomainError(f"c must be inside ({box.lo!r}, {box.hi!r}), got {c!r}")
    numerator = (0.25 + DELTA * DELTA - c) ** 2
    denominator = 4.0 * ((0.5 - DELTA) ** 2 - c) * ((0.5 + DELTA) ** 2 - c)
    return math.log2(numerator / denominator)


def feasibility_map(a_values: ArrayLike, b_values: ArrayLike) -> FeasibilityMap:
    """Single-component gap and objective over the ``a`` by ``b`` mesh.

    Outside the fixed-point domain the boundary limit ``x* -> 0`` is used.
    """
    a_mesh, b_mesh = np.meshgrid(
        np.asarray(a_values, dtype=np.float64),
        np.asarray(b_values, dtype=np.float64),
        indexing="ij",
    )
    x_star = solve_x_star_grid(a_mesh, b_mesh)
    inside = ~np.isnan(x_star)
    x_star = np.where(inside, x_star, 0.0)

    s = a_mesh * (1.0 - b_mesh) + (1.0 - a_mesh) * b_mesh
    lo = -np.minimum(a_mesh * (1.0 - b_mesh), (1.0 - a_mesh) * b_mesh)
    hi = np.minimum(a_mesh * b_mesh, (1.0 - a_mesh) * (1.0 - b_mesh))
    c = np.clip(np.where(inside, 0.5 * (x_star - s), lo), lo, hi)

    gap = s3_array(np.clip(x_star, 0.0, 1.0)) - s4_array(a_mesh, b_mesh, c)
    objective = 0.5 * (h2_array(a_mesh) + h2_array(b_mesh))
    outside = int(np.count_nonzero(~inside))
    if outside:
        log_event(_LOGGER, logging.DEBUG, "feasibility.map.boundary_limit", entries=outside, tolerance=DOMAIN_TOLERANCE)
    return FeasibilityMap(a=a_mesh, b=b_mesh, x_star=x_star, gap=gap, objective=objective, in_domain=inside)
