from __future__ import annotations

import logging

import pytest

from addercap.capacity import Mixture, RatePoint, belokopytov_certificate, objective, optimize, weighted_optimize
from addercap.constants import BELOKOPYTOV_A, BELOKOPYTOV_C, CAPACITY
from addercap.errors import DomainError

pytestmark = pytest.mark.core_unit


def test_objective_reference_values() -> None:
    assert objective(Mixture.single(0.5, 0.5)) == pytest.approx(1.0, abs=1e-15)
    assert objective(Mixture.single(BELOKOPYTOV_A, BELOKOPYTOV_A)) == pytest.approx(CAPACITY, abs=1e-15)
    mix = Mixture(p=(0.25, 0.75), a=(0.5, 0.0), b=(0.5, 1.0))
    assert objective(mix) == pytest.approx(0.25, abs=1e-15)


def test_belokopytov_certificate(caplog: pytest.LogCaptureFixture) -> None:
    caplog.set_level(logging.INFO, logger="addercap.capacity")

    certificate = belokopytov_certificate()

    assert certificate.a_star == BELOKOPYTOV_A
    assert certificate.c_star == BELOKOPYTOV_C
    assert certificate.rate == pytest.approx(0.78974, abs=1e-4)
    assert abs(certificate.m_at_cstar) <= 1e-9
    assert certificate.grid_min >= -1e-6
    events = [record for record in caplog.records if getattr(record, "event_name", "") == "capacity.belokopytov.certified"]
    assert len(events) == 1


@pytest.mark.parametrize(
    ("kwargs", "message"),
    [
        ({"n": 0}, r"n must be in \[1, 3\]"),
        ({"n": 4}, r"n must be in \[1, 3\]"),
        ({"n": 2, "restarts": 0}, "restarts must be >= 1"),
        ({"n": 2, "sweeps": 0}, "sweeps must be >= 1"),
        ({"n": 2, "seed": -1}, "seed must be >= 0"),
    ],
)
def test_optimize_validation(kwargs: dict[str, int], message: str) -> None:
    with pytest.raises(DomainError, match=message):
        optimize(**kwargs)


@pytest.mark.parametrize(("c1", "c2"), [(0.7, 0.7), (-0.1, 1.1), (0.5, 0.4)])
def test_weighted_optimize_validation(c1: float, c2: float) -> None:
    with pytest.raises(DomainError, match="weights must be nonnegative and sum to 1"):
        weighted_optimize(c1, c2)


def test_rate_point_validation() -> None:
    assert RatePoint(r1=0.5, r2=0.7).r2 == 0.7
    with pytest.raises(DomainError, match=r"r1 must be in \[0, 1\]"):
        RatePoint(r1=1.2, r2=0.5)
