from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from addercap.capacity.coupling import coupling_box
from addercap.capacity.entropy import h2, h2_array, s3_array, s4_array
from addercap.capacity.feasibility import (
    FeasibilityReport,
    belokopytov_gap,
    brute_min_gap,
    constraint_gap,
    feasibility_map,
)
from addercap.capacity.fixed_point import Mixture
from addercap.constants import (
    BELOKOPYTOV_A,
    BELOKOPYTOV_C,
    CAPACITY,
    FEASIBILITY_TOLERANCE,
    MAX_GRID_PER_AXIS,
    MAX_MIXTURE_COMPONENTS,
    resolve_thread_count,
)
from addercap.errors import AdderCapError, CertificationError, DomainError, OptimizationError
from addercap.events import log_event

_LOGGER = logging.getLogger("addercap.capacity")

_N1_GRID_POINTS = 200
_N1_REFINE_STARTS = 4
_RESTART_SPAN = 0.25
_SPAN_SHRINK = 0.25
_LINE_SEARCH_XATOL = 1e-10
_LINE_SEARCH_MAXITER = 60
_IMPROVEMENT_FLOOR = 1e-15
_SAFE_COMPONENT_VALUE = 0.1
_CONTRACTION_STEPS = 12
_INFEASIBLE_SCORE = 1.0
_FAILED_SCORE = 2.0
_SYMMETRY_SOFT_LIMIT = 0.02
_CERTIFY_GRID = 100
_BELOKOPYTOV_SCAN_POINTS = 10_000
_BELOKOPYTOV_M_TOLERANCE = 1e-9
_BELOKOPYTOV_GRID_TOLERANCE = 1e-6
_BELOKOPYTOV_RATE_TOLERANCE = 1e-9
_WEIGHTED_GRID_POINTS = 101
_WEIGHT_TOLERANCE = 1e-12

Score = Callable[[NDArray[np.float64]], float]


@dataclass(frozen=True)
class RatePoint:
    r1: float
    r2: float

    def __post_init__(self) -> None:
        for name, value in (("r1", self.r1), ("r2", self.r2)):
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must be in [0, 1], got {value!r}")


@dataclass(frozen=True)
class OptimizationResult:
    best_mix: Mixture
    rate: float
    report: FeasibilityReport
    restarts_used: int
    certified_min_gap: float | None = None
    symmetric: bool | None = None

    @property
    def rate_point(self) -> RatePoint:
        return RatePoint(r1=self.rate, r2=self.rate)


@dataclass(frozen=True)
class BelokopytovCertificate:
    a_star: float
    c_star: float
    m_at_cstar: float
    grid_min: float
    rate: float


@dataclass(frozen=True)
class WeightedResult:
    a: float
    b: float
    value: float
    min_gap: float
    status: str = "conjectural"


def objective(mix: Mixture) -> float:
    return 0.5 * math.fsum(p * (h2(a) + h2(b)) for p, a, b in mix.components())


def belokopytov_certificate() -> BelokopytovCertificate:
    a_star = BELOKOPYTOV_A
    c_star = BELOKOPYTOV_C
    box = coupling_box(a_star, a_star)
    if not box.contains(c_star):
        raise CertificationError(f"c_star must lie in [{box.lo!r}, {box.hi!r}], got {c_star!r}")

    m_at_cstar = belokopytov_gap(c_star)
    grid = box.grid(_BELOKOPYTOV_SCAN_POINTS)
    s = 2.0 * a_star * (1.0 - a_star)
    grid_min = float(np.min(s3_array(s + 2.0 * grid) - s4_array(a_star, a_star, grid)))
    rate = objective(Mixture.single(a_star, a_star))

    if abs(m_at_cstar) > _BELOKOPYTOV_M_TOLERANCE:
        raise CertificationError(f"M(c_star) must vanish, got {m_at_cstar!r}")
    if grid_min < -_BELOKOPYTOV_GRID_TOLERANCE:
        raise CertificationError(f"grid minimum of M must be >= {-_BELOKOPYTOV_GRID_TOLERANCE!r}, got {grid_min!r}")
    if abs(rate - CAPACITY) > _BELOKOPYTOV_RATE_TOLERANCE:
        raise CertificationError(f"rate must equal the capacity constant, got {rate!r}")

    log_event(_LOGGER, logging.INFO, "capacity.belokopytov.certified", m_at_cstar=m_at_cstar, grid_min=grid_min)
    return BelokopytovCertificate(a_star=a_star, c_star=c_star, m_at_cstar=m_at_cstar, grid_min=grid_min, rate=rate)


def _project_simplex(weights: NDArray[np.float64]) -> NDArray[np.float64]:
    ordered = np.sort(weights)[::-1]
    cumulative = np.cumsum(ordered) - 1.0
    ranks = np.arange(1, weights.size + 1)
    last = int(np.nonzero(ordered * ranks > cumulative)[0][-1])
    projected = np.maximum(weights - cumulative[last] / (last + 1), 0.0)
    return projected / projected.sum()


def _to_mixture(z: NDArray[np.float64], n: int) -> Mixture:
    clipped = np.clip(z, 0.0, 1.0)
    p = _project_simplex(z[:n]) if n > 1 else np.ones(1)
    return Mixture(p=tuple(p), a=tuple(clipped[n : 2 * n]), b=tuple(clipped[2 * n :]))


def _penalized_score(n: int, feasibility_filter: bool) -> Score:
    def score(z: NDArray[np.float64]) -> float:
        mix = _to_mixture(z, n)
        if not feasibility_filter:
            return -objective(mix)
        try:
            report = constraint_gap(mix)
        except AdderCapError:
            return _FAILED_SCORE
        if not report.feasible:
            return _INFEASIBLE_SCORE + abs(report.constraint_gap)
        return -objective(mix)

    return score


def _search_directions(n: int) -> list[NDArray[np.float64]]:
    size = 3 * n
    directions = []
    coordinates = range(n, size) if n == 1 else range(size)
    for index in coordinates:
        direction = np.zeros(size)
        direction[index] = 1.0
        directions.append(direction)
    for component in range(n):
        for sign in (1.0, -1.0):
            direction = np.zeros(size)
            direction[n + component] = 1.0
            direction[2 * n + component] = sign
            directions.append(direction / math.sqrt(2.0))
    return directions


def _line_search(
    score: Score, z: NDArray[np.float64], current: float, direction: NDArray[np.float64], span: float
) -> tuple[NDArray[np.float64], float]:
    result = minimize_scalar(
        lambda step: score(z + step * direction),
        bounds=(-span, span),
        method="bounded",
        options={"xatol": _LINE_SEARCH_XATOL, "maxiter": _LINE_SEARCH_MAXITER},
    )
    if result.fun < current - _IMPROVEMENT_FLOOR:
        return z + result.x * direction, float(result.fun)
    return z, current


def _refine(score: Score, z: NDArray[np.float64], n: int, *, span: float, sweeps: int) -> tuple[NDArray[np.float64], float]:
    current = score(z)
    directions = _search_directions(n)
    for sweep in range(sweeps):
        sweep_span = span * _SPAN_SHRINK**sweep
        for direction in directions:
            z, current = _line_search(score, z, current, direction, sweep_span)
        z = _canonical_point(z, n)
    return z, current


def _canonical_point(z: NDArray[np.float64], n: int) -> NDArray[np.float64]:
    canonical = np.clip(z, 0.0, 1.0)
    if n > 1:
        canonical[:n] = _project_simplex(z[:n])
    return canonical


def _n1_starts(feasibility_filter: bool) -> list[NDArray[np.float64]]:
    axis = np.linspace(0.0, 1.0, _N1_GRID_POINTS)
    table = feasibility_map(axis, axis)
    allowed = table.gap >= -FEASIBILITY_TOLERANCE if feasibility_filter else np.ones(table.gap.shape, dtype=bool)
    if not np.any(allowed):
        raise OptimizationError("no feasible grid cell found for a single component")

    ranked = np.where(allowed, table.objective, -np.inf).ravel()
    order = np.argsort(-ranked, kind="stable")[:_N1_REFINE_STARTS]
    diagonal = np.where(np.eye(_N1_GRID_POINTS, dtype=bool) & allowed, table.objective, -np.inf)
    best_diagonal = int(np.argmax(diagonal))
    indices = [int(i) for i in order]
    if best_diagonal not in indices:
        indices.append(best_diagonal)
    return [np.array([1.0, table.a.flat[i], table.b.flat[i]]) for i in indices]


def _restart_start(n: int, seed: int, restart: int, score: Score) -> NDArray[np.float64]:
    rng = np.random.default_rng([seed, restart])
    p = rng.dirichlet(np.ones(n))
    a = rng.uniform(0.0, 1.0, n)
    b = rng.uniform(0.0, 1.0, n)
    theta = 1.0
    for _ in range(_CONTRACTION_STEPS):
        shrunk_a = _SAFE_COMPONENT_VALUE + theta * (a - _SAFE_COMPONENT_VALUE)
        shrunk_b = _SAFE_COMPONENT_VALUE + theta * (b - _SAFE_COMPONENT_VALUE)
        z = np.concatenate([p, shrunk_a, shrunk_b])
        if score(z) < 0.0:
            return z
        theta *= 0.5
    return np.concatenate([p, np.full(2 * n, _SAFE_COMPONENT_VALUE)])


def optimize(
    n: int,
    restarts: int = 16,
    seed: int = 0,
    *,
    sweeps: int = 3,
    feasibility_filter: bool = True,
    threads: int | None = None,
) -> OptimizationResult:
    if not 1 <= n <= MAX_MIXTURE_COMPONENTS:
        raise DomainError(f"n must be in [1, {MAX_MIXTURE_COMPONENTS}], got {n}")
    if restarts < 1:
        raise DomainError(f"restarts must be >= 1, got {restarts}")
    if sweeps < 1:
        raise DomainError(f"sweeps must be >= 1, got {sweeps}")
    if seed < 0:
        raise DomainError(f"seed must be >= 0, got {seed}")

    score = _penalized_score(n, feasibility_filter)
    if n == 1:
        span = 4.0 / (_N1_GRID_POINTS - 1)
        starts = _n1_starts(feasibility_filter)
    else:
        span = _RESTART_SPAN
        starts = [_restart_start(n, seed, restart, score) for restart in range(restarts)]

    def run(start: NDArray[np.float64]) -> tuple[NDArray[np.float64], float]:
        return _refine(score, start, n, span=span, sweeps=sweeps)

    worker_count = resolve_thread_count() if threads is None else max(1, threads)
    if worker_count > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=worker_count) as executor:
            outcomes = list(executor.map(run, starts))
    else:
        outcomes = [run(start) for start in starts]

    best_index = 0
    for index, (_, value) in enumerate(outcomes):
        if value < outcomes[best_index][1]:
            best_index = index
    best_z, best_score = outcomes[best_index]
    if best_score >= 0.0:
        raise OptimizationError(f"no feasible mixture found for n={n}")

    best_mix = _to_mixture(best_z, n)
    report = constraint_gap(best_mix)
    certified = brute_min_gap(best_mix, _CERTIFY_GRID, threads=threads)
    if report.feasible and certified < -_BELOKOPYTOV_GRID_TOLERANCE:
        log_event(
            _LOGGER,
            logging.WARNING,
            "capacity.optimize.certificate_mismatch",
            constraint_gap=report.constraint_gap,
            certified_min_gap=certified,
        )

    symmetric = None
    if n == 1:
        symmetric = abs(best_mix.a[0] - best_mix.b[0]) < _SYMMETRY_SOFT_LIMIT
        if not symmetric:
            log_event(_LOGGER, logging.WARNING, "capacity.optimize.asymmetric_argmax", a=best_mix.a[0], b=best_mix.b[0])

    rate = objective(best_mix)
    log_event(
        _LOGGER,
        logging.INFO,
        "capacity.optimize.completed",
        n=n,
        restarts=len(starts),
        rate=rate,
        feasible=report.feasible,
    )
    return OptimizationResult(
        best_mix=best_mix,
        rate=rate,
        report=report,
        restarts_used=len(starts),
        certified_min_gap=certified,
        symmetric=symmetric,
    )


def _weighted_grid_gaps(axis: NDArray[np.float64], grid_per_axis: int) -> NDArray[np.float64]:
    fractions = np.linspace(0.0, 1.0, grid_per_axis)
    b = axis[:, None]
    gaps = np.empty((axis.size, axis.size))
    for row, a in enumerate(axis):
        lo = -np.minimum(a * (1.0 - b), (1.0 - a) * b)
        hi = np.minimum(a * b, (1.0 - a) * (1.0 - b))
        c = lo + (hi - lo) * fractions
        s = a * (1.0 - b) + (1.0 - a) * b
        gaps[row] = np.min(s3_array(np.clip(s + 2.0 * c, 0.0, 1.0)) - s4_array(a, b, c), axis=-1)
    return gaps


def weighted_optimize(c1: float, c2: float, *, grid_per_axis: int = MAX_GRID_PER_AXIS, sweeps: int = 3) -> WeightedResult:
    """Exploratory maximizer of ``c1 H2(a) + c2 H2(b)`` under the all-couplings constraint.

    The result carries no optimality certificate.
    """
    if c1 < 0.0 or c2 < 0.0 or abs(c1 + c2 - 1.0) > _WEIGHT_TOLERANCE:
        raise DomainError(f"weights must be nonnegative and sum to 1, got {c1!r} and {c2!r}")

    def weighted_value(a: float, b: float) -> float:
        return c1 * h2(a) + c2 * h2(b)

    def score(z: NDArray[np.float64]) -> float:
        a, b = (float(value) for value in np.clip(z[1:], 0.0, 1.0))
        gap = brute_min_gap(Mixture.single(a, b), grid_per_axis, threads=1)
        if gap < -FEASIBILITY_TOLERANCE:
            return _INFEASIBLE_SCORE + abs(gap)
        return -weighted_value(a, b)

    axis = np.linspace(0.0, 1.0, _WEIGHTED_GRID_POINTS)
    gaps = _weighted_grid_gaps(axis, grid_per_axis)
    values = c1 * h2_array(axis)[:, None] + c2 * h2_array(axis)[None, :]
    ranked = np.where(gaps >= -FEASIBILITY_TOLERANCE, values, -np.inf)
    start = np.unravel_index(int(np.argmax(ranked)), ranked.shape)
    z = np.array([1.0, axis[start[0]], axis[start[1]]])

    z, _ = _refine(score, z, 1, span=4.0 / (_WEIGHTED_GRID_POINTS - 1), sweeps=sweeps)
    a, b = (float(value) for value in np.clip(z[1:], 0.0, 1.0))
    min_gap = brute_min_gap(Mixture.single(a, b), grid_per_axis, threads=1)
    value = weighted_value(a, b)
    log_event(_LOGGER, logging.INFO, "capacity.weighted.completed", c1=c1, c2=c2, a=a, b=b, value=value)
    return WeightedResult(a=a, b=b, value=value, min_gap=min_gap)
