#!/usr/bin/env python3
from __future__ import annotations

import argparse
import platform
import sys
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from addercap.capacity import (
    Mixture,
    belokopytov_certificate,
    constraint_gap,
    coupling_box,
    eval_m,
    grid_minimizer,
    in_domain,
    optimize,
    solve_c,
    solve_x_star,
    verify_sandwich,
)
from addercap.coding import CandidateState, bounds, exact_t, exact_t_nn, greedy_strategy, identifies_all
from addercap.constants import CAPACITY


@dataclass(frozen=True)
class Gate:
    name: str
    max_seconds: float
    check: Callable[[argparse.Namespace], str | None]


def _capacity_value(_: argparse.Namespace) -> str | None:
    certificate = belokopytov_certificate()
    if abs(certificate.rate - 0.78974) > 1e-4:
        return f"rate {certificate.rate!r} is not within 1e-4 of 0.78974"
    if abs(certificate.m_at_cstar) > 1e-9:
        return f"|M(c*)| = {abs(certificate.m_at_cstar)!r} exceeds 1e-9"
    if certificate.grid_min < -1e-6:
        return f"grid minimum {certificate.grid_min!r} is below -1e-6"
    return None


def _sandwich(_: argparse.Namespace) -> str | None:
    report = verify_sandwich()
    bound = report.bound
    if abs(bound.q_base - 0.72212) > 1e-4:
        return f"q_base {bound.q_base!r} is not within 1e-4 of 0.72212"
    if abs(bound.q_case2 - 0.78974) > 1e-4:
        return f"q_case2 {bound.q_case2!r} is not within 1e-4 of 0.78974"
    if not bound.q_case1 < bound.q_case2:
        return f"q_case1 {bound.q_case1!r} does not sit below q_case2 {bound.q_case2!r}"
    if abs(bound.overall - CAPACITY) > 1e-9:
        return f"overall bound {bound.overall!r} misses the capacity"
    return None


def _optimizer_n1(_: argparse.Namespace) -> str | None:
    result = optimize(1)
    if not 0.78960 <= result.rate <= 0.78975:
        return f"n=1 rate {result.rate!r} is outside [0.78960, 0.78975]"
    if not result.report.feasible:
        return "n=1 optimum is not certified feasible"
    return None


def _optimizer_n2(_: argparse.Namespace) -> str | None:
    result = optimize(2, restarts=64, seed=1)
    if result.rate > 0.78975:
        return f"n=2 rate {result.rate!r} exceeds 0.78975"
    return None


def _coupling(args: argparse.Namespace) -> str | None:
    rng = np.random.default_rng(args.seed)
    for a, b, x in rng.uniform(0.0, 1.0, size=(args.samples, 3)):
        closed = solve_c(a, b, x)
        bisected = solve_c(a, b, x, method="bisect")
        if abs(closed - bisected) > 1e-9:
            return f"closed {closed!r} and bisection {bisected!r} disagree at {(a, b, x)}"
        if abs(eval_m(a, b, closed, x)) > 1e-10:
            return f"residual {eval_m(a, b, closed, x)!r} exceeds 1e-10 at {(a, b, x)}"
    return None


def _random_mixture(rng: np.random.Generator) -> Mixture:
    n = int(rng.integers(1, 4))
    p = rng.dirichlet(np.ones(n))
    return Mixture(p=tuple(p), a=tuple(rng.uniform(0.0, 1.0, n)), b=tuple(rng.uniform(0.0, 1.0, n)))


def _fixed_point(args: argparse.Namespace) -> str | None:
    rng = np.random.default_rng(args.seed)
    checked = 0
    while checked < args.samples:
        mix = _random_mixture(rng)
        if not in_domain(mix):
            continue
        result = solve_x_star(mix, certify=True)
        if result.sign_changes != 1:
            return f"{result.sign_changes} sign changes for {mix.to_payload()}"
        if result.residual > 1e-11 or result.phi_prime_at >= 0.0:
            return f"unverified root {result.x_star!r} for {mix.to_payload()}"
        checked += 1
    return None


_QUANTIFIER_GRID = 200


def _argmin_offset_cells(mix: Mixture, c: tuple[float, ...]) -> float:
    middle = sum(p * (a * (1.0 - b) + (1.0 - a) * b + 2.0 * ci) for (p, a, b), ci in zip(mix.components(), c))
    worst = 0.0
    for (_, a, b), ci in zip(mix.components(), c):
        box = coupling_box(a, b)
        if box.degenerate:
            continue
        cell = (box.hi - box.lo) / (_QUANTIFIER_GRID - 1)
        worst = max(worst, abs(ci - solve_c(a, b, middle)) / cell)
    return worst


def _quantifier(args: argparse.Namespace) -> str | None:
    rng = np.random.default_rng(args.seed)
    compared = 0
    worst_offset = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 3))
        p = rng.dirichlet(np.ones(n))
        mix = Mixture(p=tuple(p), a=tuple(rng.uniform(0.0, 1.0, n)), b=tuple(rng.uniform(0.0, 1.0, n)))
        if not in_domain(mix):
            continue
        gap = constraint_gap(mix).constraint_gap
        minimum = grid_minimizer(mix, _QUANTIFIER_GRID)
        if minimum.value < min(0.0, gap) - 1e-4:
            return f"brute minimum {minimum.value!r} falls below min(0, {gap!r}) for {mix.to_payload()}"
        offset = _argmin_offset_cells(mix, minimum.c)
        if offset > 2.0:
            return f"grid argmin sits {offset:.2f} cells from the stationary coupling for {mix.to_payload()}"
        worst_offset = max(worst_offset, offset)
        if abs(gap) <= 1e-4:
            continue
        if (minimum.value < 0.0) != (gap < 0.0):
            return f"brute minimum {minimum.value!r} and constraint gap {gap!r} disagree for {mix.to_payload()}"
        compared += 1
    print(f"quantifier_compared={compared} worst_argmin_offset_cells={worst_offset:.3f}")
    return None


def _group_testing(args: argparse.Namespace) -> str | None:
    if exact_t(3).depth != 2 or exact_t_nn(2).depth != 2:
        return "t(3) and t(2,2) must both equal 2"
    for n in range(2, args.exact_max_n + 1):
        result = exact_t(n)
        greedy = greedy_strategy(CandidateState.single_set(n)).depth
        if not bounds(n).info_lower <= result.depth <= greedy:
            return f"t({n})={result.depth} is outside [{bounds(n).info_lower}, {greedy}]"
        if not identifies_all(result.tree):
            return f"witness for t({n}) does not identify every pair"
        print(f"exact_t_{n}={result.depth} nodes={result.nodes_expanded}")
    return None


GATES: tuple[Gate, ...] = (
    Gate("capacity-value", 5.0, _capacity_value),
    Gate("sandwich", 1.0, _sandwich),
    Gate("optimizer-n1", 60.0, _optimizer_n1),
    Gate("optimizer-n2", 60.0, _optimizer_n2),
    Gate("coupling", 5.0, _coupling),
    Gate("fixed-point", 30.0, _fixed_point),
    Gate("quantifier", 120.0, _quantifier),
    Gate("group-testing", 600.0, _group_testing),
)


def main() -> int:
    parser = argparse.ArgumentParser(
        description="Run the full-size acceptance sweeps and fail when a check or its time target misses."
    )
    parser.add_argument("--gate", action="append", choices=[gate.name for gate in GATES], help="Run only these gates.")
    parser.add_argument("--seed", type=int, default=20260218, help="Seed for the randomized sweeps.")
    parser.add_argument("--samples", type=int, default=10_000, help="Sample count for coupling and fixed-point sweeps.")
    parser.add_argument("--exact-max-n", type=int, default=7, help="Largest n for the exact group-testing sweep.")
    parser.add_argument("--time-scale", type=float, default=1.0, help="Multiplier on every gate's time target.")
    args = parser.parse_args()

    if args.samples <= 0:
        raise ValueError("--samples must be > 0")
    if args.exact_max_n < 3:
        raise ValueError("--exact-max-n must be >= 3")
    if args.time_scale <= 0:
        raise ValueError("--time-scale must be > 0")

    print("addercap-acceptance")
    print(f"python={platform.python_version()}")
    print(f"platform={platform.platform()}")
    print(f"config=seed:{args.seed},samples:{args.samples},exact_max_n:{args.exact_max_n},time_scale:{args.time_scale:.2f}")

    selected = [gate for gate in GATES if not args.gate or gate.name in args.gate]
    failures = 0
    for gate in selected:
        target = gate.max_seconds * args.time_scale
        started = time.perf_counter()
        problem = gate.check(args)
        elapsed = time.perf_counter() - started
        if problem is None and elapsed > target:
            problem = f"took {elapsed:.3f}s, target {target:.3f}s"

        if problem is None:
            print(f"gate={gate.name} result=PASS seconds={elapsed:.3f}")
        else:
            failures += 1
            print(f"gate={gate.name} result=FAIL seconds={elapsed:.3f} {problem}", file=sys.stderr)

    if failures:
        print(f"result=FAIL {failures} of {len(selected)} gates failed", file=sys.stderr)
        return 1

    print(f"result=PASS {len(selected)} gates")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
