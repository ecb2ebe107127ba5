from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from typing import Final

from addercap.events import log_event

_LOGGER = logging.getLogger("addercap.constants")

R_CONST: Final[float] = 2.0 + math.sqrt(3.0)
DELTA: Final[float] = 1.0 / (2.0 * math.log2(R_CONST))
LAMBDA_STAR: Final[float] = DELTA * math.log2((1.0 + 2.0 * DELTA) / (1.0 - 2.0 * DELTA))
# H2(1/2 - delta, 1/2 + delta); entropy helpers live downstream of this module.
CAPACITY: Final[float] = -(
    (0.5 - DELTA) * math.log2(0.5 - DELTA) + (0.5 + DELTA) * math.log2(0.5 + DELTA)
)
BELOKOPYTOV_A: Final[float] = 0.5 - DELTA
BELOKOPYTOV_C: Final[float] = 0.25 - 2.0 * DELTA / math.sqrt(3.0) + DELTA * DELTA
X1_AT_LAMBDA_STAR: Final[float] = 1.0 - 4.0 * DELTA / math.sqrt(3.0)
# Printed reference constant of the t(n) ~ log2(n) / capacity asymptotics.
ASYMPTOTIC_SLOPE: Final[float] = 1.0 / CAPACITY

CELL_CLAMP_TOLERANCE: Final[float] = 1e-12
BRANCH_SWITCH_TOLERANCE: Final[float] = 1e-3
COUPLING_RESIDUAL_TOLERANCE: Final[float] = 1e-10
BISECTION_MAX_ITERATIONS: Final[int] = 200
BISECTION_TOLERANCE: Final[float] = 1e-14
DERIVATIVE_FLOOR: Final[float] = 1e-12
FINITE_DIFFERENCE_STEP: Final[float] = 1e-7

DOMAIN_TOLERANCE: Final[float] = 1e-12
SIMPLEX_TOLERANCE: Final[float] = 1e-12
NEAR_BOUNDARY_MARGIN: Final[float] = 1e-6
X_STAR_SCAN_FLOOR: Final[float] = 1e-9
X_STAR_TOLERANCE: Final[float] = 1e-13
X_STAR_RESIDUAL_TOLERANCE: Final[float] = 1e-11
CERTIFY_SCAN_POINTS: Final[int] = 1024

FEASIBILITY_TOLERANCE: Final[float] = 1e-9
MAX_MIXTURE_COMPONENTS: Final[int] = 3
MAX_GRID_PER_AXIS: Final[int] = 400

RHO_SINGULARITY_TOLERANCE: Final[float] = 1e-9
STATIONARY_EQUATION_TOLERANCE: Final[float] = 1e-9

MAX_EXACT_T_N: Final[int] = 9
MAX_EXACT_T_NN_N: Final[int] = 6
MAX_SEARCH_DEPTH: Final[int] = 12
MAX_SEARCH_NODES: Final[int] = 10**8

THREADS_ENV_VAR: Final[str] = "ARTIFACT_THREADS"


@dataclass(frozen=True)
class Constants:
    delta: float
    r_const: float
    lambda_star: float
    capacity: float


CONSTANTS: Final[Constants] = Constants(
    delta=DELTA,
    r_const=R_CONST,
    lambda_star=LAMBDA_STAR,
    capacity=CAPACITY,
)


def resolve_thread_count(environ: dict[str, str] | None = None) -> int:
    env = os.environ if environ is None else environ
    raw = env.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return 1

    try:
        value = int(raw)
    except ValueError:
        log_event(_LOGGER, logging.WARNING, "constants.threads.invalid", value=raw)
        return 1

    if value <= 0:
        log_event(_LOGGER, logging.WARNING, "constants.threads.non_positive", value=value)
        return 1
    return value
