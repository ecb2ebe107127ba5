from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, is_dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from addercap.capacity import (
    Mixture,
    belokopytov_certificate,
    branch,
    constraint_gap,
    coupling_box,
    eval_m,
    feasibility_map,
    in_domain,
    joint,
    optimize,
    phi,
    phi_prime,
    solve_c,
    solve_x_star,
    theorem_bound,
    verify_sandwich,
    weighted_optimize,
)
from addercap.coding import (
    VARIANTS,
    CandidateState,
    bounds,
    code_to_strategy,
    dump_code,
    dump_strategy,
    exact_t,
    exact_t_nn,
    greedy_strategy,
    identifies_all,
    is_uniquely_decodable,
    load_code,
    load_strategy,
    strategy_to_code,
    table,
)
from addercap.constants import (
    ASYMPTOTIC_SLOPE,
    BELOKOPYTOV_C,
    CONSTANTS,
    X1_AT_LAMBDA_STAR,
)
from addercap.errors import AdderCapError, DomainError
from addercap.events import log_event

_LOGGER = logging.getLogger("addercap.cli")
_FEASIBILITY_GRID_AXIS = 200


@dataclass(frozen=True)
class CommandResult:
    status: str
    payload: Any
    elapsed_ms: float | None = None

    def to_document(self) -> dict[str, Any]:
        key = "payload" if self.status == "ok" else "error"
        document: dict[str, Any] = {"status": self.status, key: self.payload}
        if self.elapsed_ms is not None:
            document["elapsed_ms"] = self.elapsed_ms
        return document


def to_jsonable(value: Any) -> Any:
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def float_list(value: str) -> tuple[float, ...]:
    """argparse type for comma-separated numbers such as ``0.5,0.5``."""
    try:
        return tuple(float(token) for token in value.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {value!r}") from exc


def _floats(value: str | float | Sequence[float] | None, name: str) -> tuple[float, ...]:
    if value is None:
        raise DomainError(f"--{name} is required")
    if isinstance(value, (int, float)):
        return (float(value),)
    if isinstance(value, str):
        tokens = [token.strip() for token in value.split(",")]
        try:
            return tuple(float(token) for token in tokens)
        except ValueError as exc:
            raise DomainError(f"--{name} must be comma-separated numbers, got {value!r}") from exc
    try:
        return tuple(float(item) for item in value)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"--{name} must be a list of numbers, got {value!r}") from exc


def _option(args: argparse.Namespace, name: str, default: Any) -> Any:
    value = getattr(args, name, None)
    return default if value is None else value


def parse_mixture(
    p_value: str | float | Sequence[float] | None,
    a_value: str | float | Sequence[float] | None,
    b_value: str | float | Sequence[float] | None,
) -> Mixture:
    a = _floats(a_value, "a")
    b = _floats(b_value, "b")
    if p_value is None and len(a) > 1:
        raise DomainError(f"--p is required for a mixture of {len(a)} components")
    p = _floats(p_value, "p") if p_value is not None else (1.0,)
    return Mixture(p=p, a=a, b=b)


def _mixture(args: argparse.Namespace) -> Mixture:
    return parse_mixture(getattr(args, "p", None), getattr(args, "a", None), getattr(args, "b", None))


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(item) if isinstance(item, float) else item for item in row])


def constants_payload() -> dict[str, Any]:
    return {
        "delta": CONSTANTS.delta,
        "r": CONSTANTS.r_const,
        "lambda_star": CONSTANTS.lambda_star,
        "capacity": CONSTANTS.capacity,
        "c_star": BELOKOPYTOV_C,
        "x1": X1_AT_LAMBDA_STAR,
        "asymptotic_slope": ASYMPTOTIC_SLOPE,
    }


def _cmd_coupling_eval(args: argparse.Namespace) -> dict[str, Any]:
    a = float(_option(args, "a_value", 0.5))
    b = float(_option(args, "b_value", 0.5))
    x = float(_option(args, "x", 0.5))
    method = _option(args, "method", "closed")
    c = solve_c(a, b, x, method=method)
    return {
        "a": a,
        "b": b,
        "x": x,
        "method": method,
        "box": coupling_box(a, b),
        "branch": branch(a, b, x),
        "c": c,
        "residual": eval_m(a, b, c, x),
        "joint": joint(a, b, c),
        "phi": phi(a, b, x),
        "phi_prime": phi_prime(a, b, x),
    }


def _cmd_phi(args: argparse.Namespace) -> dict[str, Any]:
    a = float(_option(args, "a_value", 0.5))
    b = float(_option(args, "b_value", 0.5))
    if getattr(args, "x", None) is not None:
        xs = _floats(args.x, "x")
    else:
        points = int(_option(args, "points", 11))
        if points < 2:
            raise DomainError(f"--points must be >= 2, got {points}")
        xs = tuple(float(value) for value in np.linspace(0.0, 1.0, points))
    rows = [(x, phi(a, b, x), phi_prime(a, b, x)) for x in xs]
    if getattr(args, "out", None):
        _write_csv(args.out, ("x", "phi", "phi_prime"), rows)
    return {"a": a, "b": b, "rows": [{"x": x, "phi": value, "phi_prime": slope} for x, value, slope in rows]}


def fixed_point_payload(mix: Mixture, *, certify: bool = False) -> dict[str, Any]:
    result = solve_x_star(mix, certify=certify)
    return {"mixture": mix.to_payload(), "in_domain": in_domain(mix), **asdict(result)}


def _cmd_fixed_point(args: argparse.Namespace) -> dict[str, Any]:
    return fixed_point_payload(_mixture(args), certify=bool(getattr(args, "certify", False)))


def _cmd_feasibility(args: argparse.Namespace) -> dict[str, Any]:
    mix = _mixture(args)
    grid = getattr(args, "grid", None)
    report = constraint_gap(mix, grid_per_axis=None if grid is None else int(grid))
    return {"mixture": mix.to_payload(), **asdict(report)}


def _cmd_capacity_optimize(args: argparse.Namespace) -> dict[str, Any]:
    n = int(_option(args, "n", 1))
    result = optimize(
        n,
        restarts=int(_option(args, "restarts", 16)),
        seed=int(_option(args, "seed", 0)),
        sweeps=int(_option(args, "sweeps", 3)),
        feasibility_filter=not bool(getattr(args, "no_feasibility_filter", False)),
    )
    if getattr(args, "out", None):
        axis = np.linspace(0.0, 1.0, _FEASIBILITY_GRID_AXIS)
        _write_csv(args.out, ("a", "b", "gap", "objective"), feasibility_map(axis, axis).rows())
    return {
        "best_mix": result.best_mix.to_payload(),
        "rate": result.rate,
        "report": result.report,
        "restarts_used": result.restarts_used,
        "certified_min_gap": result.certified_min_gap,
        "symmetric": result.symmetric,
    }


def belokopytov_payload() -> dict[str, Any]:
    return asdict(belokopytov_certificate())


def _cmd_capacity_weighted(args: argparse.Namespace) -> dict[str, Any]:
    return asdict(weighted_optimize(float(_option(args, "c1", 0.5)), float(_option(args, "c2", 0.5))))


def lagrangian_bound_payload(lam: float | None = None) -> dict[str, Any]:
    return asdict(theorem_bound(CONSTANTS.lambda_star if lam is None else float(lam)))


def _cmd_lagrangian_verify(_: argparse.Namespace) -> dict[str, Any]:
    return asdict(verify_sandwich())


def _required_file(args: argparse.Namespace) -> Path:
    value = getattr(args, "file", None)
    if value is None:
        raise DomainError("--file is required")
    return Path(value)


def _cmd_code_check(args: argparse.Namespace) -> dict[str, Any]:
    code = load_code(_required_file(args))
    result = is_uniquely_decodable(code)
    return {"m1": code.m1, "m2": code.m2, "n_uses": code.n_uses, **asdict(result)}


def _cmd_code_from_strategy(args: argparse.Namespace) -> dict[str, Any]:
    strategy = load_strategy(_required_file(args))
    code = strategy_to_code(strategy)
    return {
        "code": dump_code(code),
        "identifies_all": identifies_all(strategy),
        "uniquely_decodable": is_uniquely_decodable(code).decodable,
    }


def _cmd_code_to_strategy(args: argparse.Namespace) -> dict[str, Any]:
    code = load_code(_required_file(args))
    strategy = code_to_strategy(code)
    return {"strategy": dump_strategy(strategy), "identifies_all": identifies_all(strategy)}


def gtest_exact_payload(n: int, variant: str = "single_set", export: str | None = None) -> dict[str, Any]:
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}, got {variant!r}")
    result = exact_t(n) if variant == "single_set" else exact_t_nn(n)
    tree = dump_strategy(result.tree)
    if export:
        Path(export).write_text(json.dumps(tree, indent=2) + "\n", encoding="utf-8")
    return {
        "variant": variant,
        "n": n,
        "depth": result.depth,
        "lower_bound_used": result.lower_bound_used,
        "nodes_expanded": result.nodes_expanded,
        "identifies_all": identifies_all(result.tree),
        "tree": tree,
    }


def _cmd_gtest_exact(args: argparse.Namespace) -> dict[str, Any]:
    return gtest_exact_payload(int(_option(args, "n", 3)), "single_set", getattr(args, "export", None))


def _cmd_gtest_exact_nn(args: argparse.Namespace) -> dict[str, Any]:
    return gtest_exact_payload(int(_option(args, "n", 2)), "two_sets", getattr(args, "export", None))


def _cmd_gtest_greedy(args: argparse.Namespace) -> dict[str, Any]:
    n = int(_option(args, "n", 3))
    variant = _option(args, "variant", "single_set")
    state = CandidateState.single_set(n) if variant == "single_set" else CandidateState.two_sets(n)
    strategy = greedy_strategy(state)
    return {
        "variant": variant,
        "depth": strategy.depth,
        "bounds": bounds(n, variant) if n >= 2 else None,
        "identifies_all": identifies_all(strategy),
        "tree": dump_strategy(strategy),
    }


def _cmd_gtest_table(args: argparse.Namespace) -> dict[str, Any]:
    rows = table(int(_option(args, "n_max", 6)))
    if getattr(args, "out", None):
        _write_csv(
            args.out,
            ("n", "info_lower", "exact_t", "exact_t_nn", "greedy", "ratio_to_log2n"),
            [(row.n, row.info_lower, row.exact_t, row.exact_t_nn, row.greedy, row.ratio_to_log2n) for row in rows],
        )
    return {"reference_constant": ASYMPTOTIC_SLOPE, "rows": rows}


def _add_mixture_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=float_list, default=None, help="Comma-separated mixture weights.")
    parser.add_argument("--a", type=float_list, default=None, help="Comma-separated a_i values in [0, 1].")
    parser.add_argument("--b", type=float_list, default=None, help="Comma-separated b_i values in [0, 1].")


def _add_pair_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--a", dest="a_value", type=float, default=None, help="Input bias a in [0, 1].")
    parser.add_argument("--b", dest="b_value", type=float, default=None, help="Input bias b in [0, 1].")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="addercap",
        description="Certify the average zero-error capacity of the binary adder channel with feedback.",
    )
    parser.add_argument("--config", default=None, help="JSON file with default flag values.")
    parser.add_argument("--verbose", action="store_true", help="Log INFO events to stderr.")
    parser.add_argument("--timing", action="store_true", help="Include elapsed_ms in the output document.")
    commands = parser.add_subparsers(dest="command", required=True)

    constants_parser = commands.add_parser("constants", help="Print the exact constants.")
    constants_parser.set_defaults(handler=lambda _: constants_payload())

    coupling_parser = commands.add_parser("coupling", help="Coupling equation tools.")
    coupling_commands = coupling_parser.add_subparsers(dest="coupling_command", required=True)
    coupling_eval = coupling_commands.add_parser("eval", help="Solve for c and evaluate phi at one point.")
    _add_pair_flags(coupling_eval)
    coupling_eval.add_argument("--x", type=float, default=None)
    coupling_eval.add_argument("--method", choices=("closed", "bisect"), default=None)
    coupling_eval.set_defaults(handler=_cmd_coupling_eval)

    phi_parser = commands.add_parser("phi", help="Sweep phi and its derivative over x.")
    _add_pair_flags(phi_parser)
    phi_parser.add_argument("--x", type=float_list, default=None, help="Comma-separated x values.")
    phi_parser.add_argument("--points", type=int, default=None, help="Uniform sweep size over [0, 1].")
    phi_parser.add_argument("--out", default=None, help="CSV output path.")
    phi_parser.set_defaults(handler=_cmd_phi)

    fixed_point_parser = commands.add_parser("fixed-point", help="Solve the mixture fixed point.")
    _add_mixture_flags(fixed_point_parser)
    fixed_point_parser.add_argument("--certify", action="store_true", help="Count sign changes on a uniform scan.")
    fixed_point_parser.set_defaults(handler=_cmd_fixed_point)

    feasibility_parser = commands.add_parser("feasibility", help="Evaluate the capacity constraint.")
    _add_mixture_flags(feasibility_parser)
    feasibility_parser.add_argument("--grid", type=int, default=None, help="Brute-force grid points per axis.")
    feasibility_parser.set_defaults(handler=_cmd_feasibility)

    capacity_parser = commands.add_parser("capacity", help="Capacity optimization and certificates.")
    capacity_commands = capacity_parser.add_subparsers(dest="capacity_command", required=True)
    capacity_optimize = capacity_commands.add_parser("optimize", help="Maximize the rate over feasible mixtures.")
    capacity_optimize.add_argument("--n", type=int, default=None)
    capacity_optimize.add_argument("--restarts", type=int, default=None)
    capacity_optimize.add_argument("--seed", type=int, default=None)
    capacity_optimize.add_argument(
        "--sweeps",
        type=int,
        default=None,
        help="Coordinate sweeps of bounded Brent line searches (scipy minimize_scalar).",
    )
    capacity_optimize.add_argument("--no-feasibility-filter", action="store_true", help="Diagnostic: ignore the constraint.")
    capacity_optimize.add_argument("--out", default=None, help="CSV dump of the single-component feasibility grid.")
    capacity_optimize.set_defaults(handler=_cmd_capacity_optimize)
    capacity_belokopytov = capacity_commands.add_parser("belokopytov", help="Certify the symmetric optimum.")
    capacity_belokopytov.set_defaults(handler=lambda _: belokopytov_payload())
    capacity_weighted = capacity_commands.add_parser("weighted", help="Exploratory weighted-rate maximizer.")
    capacity_weighted.add_argument("--c1", type=float, default=None)
    capacity_weighted.add_argument("--c2", type=float, default=None)
    capacity_weighted.set_defaults(handler=_cmd_capacity_weighted)

    lagrangian_parser = commands.add_parser("lagrangian", help="Upper-bound machinery.")
    lagrangian_commands = lagrangian_parser.add_subparsers(dest="lagrangian_command", required=True)
    lagrangian_bound = lagrangian_commands.add_parser("bound", help="Evaluate the three bound quantities.")
    lagrangian_bound.add_argument("--lambda", dest="lam", type=float, default=None)
    lagrangian_bound.set_defaults(handler=lambda args: lagrangian_bound_payload(args.lam))
    lagrangian_verify = lagrangian_commands.add_parser("verify", help="Run the optimal-multiplier pipeline.")
    lagrangian_verify.set_defaults(handler=_cmd_lagrangian_verify)

    code_parser = commands.add_parser("code", help="Feedback codes and strategies.")
    code_commands = code_parser.add_subparsers(dest="code_command", required=True)
    for name, handler, help_text in (
        ("check", _cmd_code_check, "Check unique decodability of a code file."),
        ("from-strategy", _cmd_code_from_strategy, "Convert a strategy file to a code."),
        ("to-strategy", _cmd_code_to_strategy, "Convert a code file to a strategy."),
    ):
        command = code_commands.add_parser(name, help=help_text)
        command.add_argument("--file", default=None)
        command.set_defaults(handler=handler)

    gtest_parser = commands.add_parser("gtest", help="Adaptive group testing for two defectives.")
    gtest_commands = gtest_parser.add_subparsers(dest="gtest_command", required=True)
    for name, handler in (("exact", _cmd_gtest_exact), ("exact-nn", _cmd_gtest_exact_nn)):
        command = gtest_commands.add_parser(name, help="Exact minimax search.")
        command.add_argument("--n", type=int, default=None)
        command.add_argument("--export", default=None, help="Write the witness strategy JSON here.")
        command.set_defaults(handler=handler)
    gtest_greedy = gtest_commands.add_parser("greedy", help="Greedy upper-bound strategy.")
    gtest_greedy.add_argument("--n", type=int, default=None)
    gtest_greedy.add_argument("--variant", choices=VARIANTS, default=None)
    gtest_greedy.set_defaults(handler=_cmd_gtest_greedy)
    gtest_table = gtest_commands.add_parser("table", help="Exact and greedy depths for small n.")
    gtest_table.add_argument("--n-max", dest="n_max", type=int, default=None)
    gtest_table.add_argument("--out", default=None, help="CSV output path.")
    gtest_table.set_defaults(handler=_cmd_gtest_table)

    return parser


_CONFIG_DESTS = {"a": ("a", "a_value"), "b": ("b", "b_value"), "lambda": ("lam",)}
_GLOBAL_KEYS = frozenset({"config", "verbose", "timing", "command", "handler"})


def _config_token(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(str(item) for item in value)
    if isinstance(value, dict):
        return json.dumps(value)
    return str(value)


def config_arguments(parser: argparse.ArgumentParser, args: argparse.Namespace) -> list[str]:
    """Turn ``--config`` fields into extra flags for the flags left unset.

    The extra flags go back through the parser, so a config value of the wrong
    shape fails exactly like the same value typed on the command line.
    """
    if args.config is None:
        return []
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"config file is not readable JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise DomainError("config file must hold a JSON object")

    extra: list[str] = []
    for key, value in config.items():
        if key in _GLOBAL_KEYS or value is None:
            continue
        dest = next((name for name in _CONFIG_DESTS.get(key, (key,)) if hasattr(args, name)), None)
        if dest is None:
            continue
        flag = "--" + key.replace("_", "-")
        current = getattr(args, dest)
        if current is False:
            if not isinstance(value, bool):
                parser.error(f"config field {key!r} must be true or false, got {value!r}")
            if value:
                extra.append(flag)
        elif current is None:
            extra.append(f"{flag}={_config_token(value)}")
    return extra


def dispatch(argv: Sequence[str]) -> CommandResult:
    parser = build_parser()
    arguments = list(argv)
    args = parser.parse_args(arguments)
    started = time.perf_counter()
    try:
        extra = config_arguments(parser, args)
        if extra:
            args = parser.parse_args(arguments + extra)
        payload = to_jsonable(args.handler(args))
    except AdderCapError as exc:
        log_event(_LOGGER, logging.WARNING, "cli.command.failed", command=args.command, code=exc.code, error=str(exc))
        result = CommandResult(status="error", payload=exc.to_payload())
    else:
        log_event(_LOGGER, logging.INFO, "cli.command.succeeded", command=args.command)
        result = CommandResult(status="ok", payload=payload)

    if args.timing:
        return CommandResult(
            status=result.status,
            payload=result.payload,
            elapsed_ms=(time.perf_counter() - started) * 1000.0,
        )
    return result


def main(argv: Sequence[str] | None = None) -> int:
    arguments = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(
        level=logging.INFO if "--verbose" in arguments else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s %(message)s",
    )
    result = dispatch(arguments)
    sys.stdout.write(json.dumps(result.to_document(), indent=2) + "\n")
    return 0 if result.status == "ok" else 1
