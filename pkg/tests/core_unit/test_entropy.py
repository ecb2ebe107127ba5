from __future__ import annotations

import math

import numpy as np
import pytest

from addercap.capacity import entropy, h2, h2_array, s3, s3_array, s4, s4_array, s4_cells
from addercap.constants import BELOKOPYTOV_C, CAPACITY, DELTA
from addercap.errors import DomainError

pytestmark = pytest.mark.core_unit


@pytest.mark.parametrize(
    ("masses", "expected"),
    [
        ((0.5, 0.5), 1.0),
        ((1.0, 0.0, 0.0), 0.0),
        ((0.25, 0.25, 0.25, 0.25), 2.0),
    ],
)
def test_entropy_reference_values(masses: tuple[float, ...], expected: float) -> None:
    assert entropy(masses) == pytest.approx(expected, abs=1e-15)


def test_entropy_of_capacity_split() -> None:
    assert entropy((0.5 - DELTA, 0.5 + DELTA)) == pytest.approx(0.78974, abs=1e-4)
    assert h2(0.5 - DELTA) == pytest.approx(CAPACITY, abs=1e-15)


def test_entropy_rejects_negative_mass_but_clamps_rounding_noise() -> None:
    with pytest.raises(DomainError, match="must be nonnegative"):
        entropy((0.5, -1e-6, 0.5))
    assert entropy((1.0, -1e-13)) == 0.0


def test_entropy_rejects_nan() -> None:
    with pytest.raises(DomainError, match="NaN"):
        entropy((math.nan, 1.0))


@pytest.mark.parametrize(("x", "expected"), [(1.0, 0.0), (0.0, 1.0), (1.0 / 3.0, math.log2(3.0))])
def test_s3_reference_values(x: float, expected: float) -> None:
    assert s3(x) == pytest.approx(expected, abs=1e-14)


def test_s3_rejects_out_of_range() -> None:
    with pytest.raises(DomainError, match=r"x must be in \[0, 1\]"):
        s3(1.2)


def test_s4_reference_values() -> None:
    assert s4(0.5, 0.5, 0.25) == pytest.approx(1.0, abs=1e-15)
    assert s4(0.5, 0.5, 0.0) == pytest.approx(2.0, abs=1e-15)
    assert s4_cells(0.5, 0.5, 0.25) == (0.0, 0.25 + 0.25, 0.25 + 0.25, 0.0)


def test_s4_equals_s3_at_the_tight_point() -> None:
    a = 0.5 - DELTA
    middle = 0.5 - 2.0 * DELTA * DELTA + 2.0 * BELOKOPYTOV_C
    assert s4(a, a, BELOKOPYTOV_C) == pytest.approx(s3(middle), abs=1e-9)


def test_s4_rejects_cells_outside_the_box() -> None:
    with pytest.raises(DomainError, match="must be nonnegative"):
        s4(0.5, 0.5, 0.3)


def test_s4_relabeling_symmetries(rng: np.random.Generator) -> None:
    for a, b, fraction in rng.uniform(0.0, 1.0, size=(200, 3)):
        lo = -min(a * (1.0 - b), (1.0 - a) * b)
        hi = min(a * b, (1.0 - a) * (1.0 - b))
        c = lo + fraction * (hi - lo)
        assert s4(a, b, c) == pytest.approx(s4(b, a, c), abs=1e-12)
        assert s4(a, b, c) == pytest.approx(s4(1.0 - a, 1.0 - b, c), abs=1e-12)


def test_array_variants_match_scalar_versions() -> None:
    xs = np.linspace(0.0, 1.0, 11)
    assert np.allclose(s3_array(xs), [s3(float(x)) for x in xs], atol=1e-14)
    assert np.allclose(h2_array(xs), [h2(float(x)) for x in xs], atol=1e-14)
    cs = np.linspace(-0.2, 0.2, 9)
    assert np.allclose(s4_array(0.4, 0.5, cs), [s4(0.4, 0.5, float(c)) for c in cs], atol=1e-14)


def test_array_variants_reject_out_of_range_entries() -> None:
    with pytest.raises(DomainError):
        s3_array([0.2, 1.5])
    with pytest.raises(DomainError):
        s4_array(0.5, 0.5, [0.0, 0.4])
