"""Entropy functionals in bits.

Every logarithm in the package is base 2. Cell masses that dip below zero by
no more than ``CELL_CLAMP_TOLERANCE`` are treated as exact zeros; anything more
negative is a domain error rather than a silently clamped value.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import entr

from addercap.constants import CELL_CLAMP_TOLERANCE
from addercap.errors import DomainError

_LN2 = math.log(2.0)


def _clamped_masses(masses: NDArray[np.float64], *, label: str) -> NDArray[np.float64]:
    if np.any(np.isnan(masses)):
        raise DomainError(f"{label} must not contain NaN")
    if np.any(masses < -CELL_CLAMP_TOLERANCE):
        worst = float(np.min(masses))
        raise DomainError(f"{label} must be nonnegative, got {worst!r}")
    return np.clip(masses, 0.0, None)


def entropy(masses: Sequence[float] | ArrayLike) -> float:
    values = _clamped_masses(np.asarray(masses, dtype=np.float64), label="masses")
    return float(np.sum(entr(values)) / _LN2)


def h2(p: float) -> float:
    if not -CELL_CLAMP_TOLERANCE <= p <= 1.0 + CELL_CLAMP_TOLERANCE:
        raise DomainError(f"p must be in [0, 1], got {p!r}")
    return entropy((p, 1.0 - p))


def _validate_unit(name: str, value: float) -> float:
    if not -CELL_CLAMP_TOLERANCE <= value <= 1.0 + CELL_CLAMP_TOLERANCE:
        raise DomainError(f"{name} must be in [0, 1], got {value!r}")
    return min(max(value, 0.0), 1.0)


def s3(x: float) -> float:
    x = _validate_unit("x", x)
    side = (1.0 - x) / 2.0
    return entropy((side, x, side))


def s4_cells(a: float, b: float, c: float) -> tuple[float, float, float, float]:
    a_bar = 1.0 - a
    b_bar = 1.0 - b
    return (a * b - c, a * b_bar + c, a_bar * b + c, a_bar * b_bar - c)


def s4(a: float, b: float, c: float) -> float:
    _validate_unit("a", a)
    _validate_unit("b", b)
    return entropy(s4_cells(a, b, c))


def s3_array(x: ArrayLike) -> NDArray[np.float64]:
    values = np.asarray(x, dtype=np.float64)
    if np.any(values < -CELL_CLAMP_TOLERANCE) or np.any(values > 1.0 + CELL_CLAMP_TOLERANCE):
        raise DomainError("x must lie in [0, 1] for every grid entry")
    values = np.clip(values, 0.0, 1.0)
    side = (1.0 - values) / 2.0
    return (2.0 * entr(side) + entr(values)) / _LN2


def h2_array(p: ArrayLike) -> NDArray[np.float64]:
    values = np.asarray(p, dtype=np.float64)
    if np.any(values < -CELL_CLAMP_TOLERANCE) or np.any(values > 1.0 + CELL_CLAMP_TOLERANCE):
        raise DomainError("p must lie in [0, 1] for every grid entry")
    values = np.clip(values, 0.0, 1.0)
    return (entr(values) + entr(1.0 - values)) / _LN2


def s4_array(a: ArrayLike, b: ArrayLike, c: ArrayLike) -> NDArray[np.float64]:
    a_arr, b_arr, c_arr = np.broadcast_arrays(
        np.asarray(a, dtype=np.float64),
        np.asarray(b, dtype=np.float64),
        np.asarray(c, dtype=np.float64),
    )
    cells = np.stack(
        [
            a_arr * b_arr - c_arr,
            a_arr * (1.0 - b_arr) + c_arr,
            (1.0 - a_arr) * b_arr + c_arr,
            (1.0 - a_arr) * (1.0 - b_arr) - c_arr,
        ]
    )
    cells = _clamped_masses(cells, label="joint cells")
    return np.sum(entr(cells), axis=0) / _LN2
