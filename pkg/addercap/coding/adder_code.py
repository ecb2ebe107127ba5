from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal, Mapping, Sequence, TypeAlias

from addercap.errors import MalformedCodeError
from addercap.events import log_event

_LOGGER = logging.getLogger("addercap.coding")

Variant = Literal["single_set", "two_sets"]
VARIANTS: tuple[Variant, ...] = ("single_set", "two_sets")
History: TypeAlias = str
EncoderRound: TypeAlias = Mapping[History, tuple[int, ...]]
TestPair: TypeAlias = tuple[tuple[int, ...], tuple[int, ...]]
StrategyRound: TypeAlias = Mapping[History, TestPair]
_OUTPUT_SYMBOLS = frozenset("012")


def _check_history(history: object, round_index: int) -> History:
    if not isinstance(history, str) or len(history) != round_index or not set(history) <= _OUTPUT_SYMBOLS:
        raise MalformedCodeError(
            f"history keys in round {round_index} must be strings of {round_index} symbols over 0-2, got {history!r}"
        )
    return history


@dataclass(frozen=True)
class FeedbackCode:
    m1: int
    m2: int
    n_uses: int
    encoder1: tuple[EncoderRound, ...]
    encoder2: tuple[EncoderRound, ...]

    def __post_init__(self) -> None:
        if self.m1 < 1 or self.m2 < 1:
            raise MalformedCodeError(f"message counts must be >= 1, got {self.m1} and {self.m2}")
        if self.n_uses < 0:
            raise MalformedCodeError(f"n_uses must be >= 0, got {self.n_uses}")
        encoders = []
        for label, encoder, messages in (("encoder1", self.encoder1, self.m1), ("encoder2", self.encoder2, self.m2)):
            if len(encoder) != self.n_uses:
                raise MalformedCodeError(f"{label} must have {self.n_uses} rounds, got {len(encoder)}")
            rounds = []
            for round_index, table in enumerate(encoder):
                checked: dict[History, tuple[int, ...]] = {}
                for history, bits in table.items():
                    history = _check_history(history, round_index)
                    bits = tuple(bits)
                    if len(bits) != messages or any(bit not in (0, 1) for bit in bits):
                        raise MalformedCodeError(
                            f"{label} round {round_index} history {history!r} must map to {messages} bits, got {list(bits)}"
                        )
                    checked[history] = bits
                rounds.append(checked)
            encoders.append(tuple(rounds))
        object.__setattr__(self, "encoder1", encoders[0])
        object.__setattr__(self, "encoder2", encoders[1])


@dataclass(frozen=True)
class Strategy:
    variant: Variant
    n1: int
    n2: int
    depth: int
    rounds: tuple[StrategyRound, ...]

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise MalformedCodeError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.n1 < 1 or self.n2 < 0 or (self.variant == "two_sets" and self.n2 < 1):
            raise MalformedCodeError(f"set sizes are out of range, got n1={self.n1} and n2={self.n2}")
        if self.depth < 0 or len(self.rounds) != self.depth:
            raise MalformedCodeError(f"strategy must have depth rounds, got depth={self.depth} and {len(self.rounds)} rounds")

        rounds = []
        for round_index, table in enumerate(self.rounds):
            checked: dict[History, TestPair] = {}
            for history, (set1, set2) in table.items():
                history = _check_history(history, round_index)
                first = tuple(sorted(set(int(element) for element in set1)))
                second = tuple(sorted(set(int(element) for element in set2)))
                if self.variant == "single_set" and second:
                    raise MalformedCodeError("single_set strategies must leave set2 empty")
                if any(not 0 <= element < self.n1 for element in first) or any(
                    not 0 <= element < self.n2 for element in second
                ):
                    raise MalformedCodeError(f"test at round {round_index} history {history!r} leaves the element range")
                checked[history] = (first, second)
            rounds.append(checked)
        object.__setattr__(self, "rounds", tuple(rounds))


@dataclass(frozen=True)
class DecodabilityResult:
    decodable: bool
    counterexample: tuple[tuple[int, int], tuple[int, int]] | None = None


def _lookup(table: Mapping[History, Any], history: History, round_index: int, label: str) -> Any:
    try:
        return table[history]
    except KeyError as exc:
        raise MalformedCodeError(f"{label} has no entry for reachable history {history!r} in round {round_index}") from exc


def simulate(code: FeedbackCode, w1: int, w2: int) -> tuple[int, ...]:
    if not 0 <= w1 < code.m1 or not 0 <= w2 < code.m2:
        raise MalformedCodeError(f"messages must satisfy w1 < {code.m1} and w2 < {code.m2}, got ({w1}, {w2})")

    history = ""
    outputs = []
    for round_index in range(code.n_uses):
        x1 = _lookup(code.encoder1[round_index], history, round_index, "encoder1")[w1]
        x2 = _lookup(code.encoder2[round_index], history, round_index, "encoder2")[w2]
        outputs.append(x1 + x2)
        history += str(x1 + x2)
    return tuple(outputs)


def is_uniquely_decodable(code: FeedbackCode) -> DecodabilityResult:
    seen: dict[tuple[int, ...], tuple[int, int]] = {}
    for w1 in range(code.m1):
        for w2 in range(code.m2):
            outputs = simulate(code, w1, w2)
            if outputs in seen:
                return DecodabilityResult(decodable=False, counterexample=(seen[outputs], (w1, w2)))
            seen[outputs] = (w1, w2)
    return DecodabilityResult(decodable=True)


def strategy_to_code(strategy: Strategy) -> FeedbackCode:
    if strategy.variant != "two_sets":
        raise MalformedCodeError("only two_sets strategies correspond to feedback codes")

    encoder1 = []
    encoder2 = []
    for table in strategy.rounds:
        encoder1.append({history: tuple(int(w in set1) for w in range(strategy.n1)) for history, (set1, _) in table.items()})
        encoder2.append({history: tuple(int(w in set2) for w in range(strategy.n2)) for history, (_, set2) in table.items()})
    return FeedbackCode(
        m1=strategy.n1,
        m2=strategy.n2,
        n_uses=strategy.depth,
        encoder1=tuple(encoder1),
        encoder2=tuple(encoder2),
    )


def code_to_strategy(code: FeedbackCode) -> Strategy:
    rounds = []
    for round_index, (table1, table2) in enumerate(zip(code.encoder1, code.encoder2)):
        if table1.keys() != table2.keys():
            log_event(_LOGGER, logging.DEBUG, "coding.to_strategy.history_mismatch", round_index=round_index)
        histories = sorted(table1.keys() & table2.keys())
        rounds.append(
            {
                history: (
                    tuple(w for w, bit in enumerate(table1[history]) if bit),
                    tuple(w for w, bit in enumerate(table2[history]) if bit),
                )
                for history in histories
            }
        )
    return Strategy(variant="two_sets", n1=code.m1, n2=code.m2, depth=code.n_uses, rounds=tuple(rounds))


def _require(payload: Mapping[str, Any], key: str, kind: type) -> Any:
    if key not in payload:
        raise MalformedCodeError(f"document must contain {key!r}")
    value = payload[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is int:
        raise MalformedCodeError(f"{key!r} must be a {kind.__name__}, got {type(value).__name__}")
    return value


def _read_document(source: str | Path | Mapping[str, Any]) -> Mapping[str, Any]:
    if isinstance(source, Mapping):
        return source
    try:
        text = Path(source).read_text(encoding="utf-8") if isinstance(source, Path) else source
        document = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedCodeError(f"document is not readable JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise MalformedCodeError("document must be a JSON object")
    return document


def _rounds(payload: Mapping[str, Any], key: str) -> Sequence[Mapping[str, Any]]:
    rounds = _require(payload, key, list)
    if any(not isinstance(table, dict) for table in rounds):
        raise MalformedCodeError(f"every round in {key!r} must be an object")
    return rounds


def load_code(source: str | Path | Mapping[str, Any]) -> FeedbackCode:
    payload = _read_document(source)
    try:
        return FeedbackCode(
            m1=_require(payload, "m1", int),
            m2=_require(payload, "m2", int),
            n_uses=_require(payload, "n_uses", int),
            encoder1=tuple(_rounds(payload, "encoder1")),
            encoder2=tuple(_rounds(payload, "encoder2")),
        )
    except TypeError as exc:
        raise MalformedCodeError(f"encoder tables must hold bit arrays: {exc}") from exc


def dump_code(code: FeedbackCode) -> dict[str, Any]:
    return {
        "m1": code.m1,
        "m2": code.m2,
        "n_uses": code.n_uses,
        "encoder1": [{history: list(bits) for history, bits in sorted(table.items())} for table in code.encoder1],
        "encoder2": [{history: list(bits) for history, bits in sorted(table.items())} for table in code.encoder2],
    }


def load_strategy(source: str | Path | Mapping[str, Any]) -> Strategy:
    payload = _read_document(source)
    rounds = []
    for table in _rounds(payload, "rounds"):
        parsed = {}
        for history, leaf in table.items():
            if not isinstance(leaf, dict) or not isinstance(leaf.get("set1", []), list) or not isinstance(leaf.get("set2", []), list):
                raise MalformedCodeError(f"strategy leaf for history {history!r} must carry set1/set2 arrays")
            parsed[history] = (tuple(leaf.get("set1", [])), tuple(leaf.get("set2", [])))
        rounds.append(parsed)
    try:
        return Strategy(
            variant=payload.get("variant", "two_sets"),
            n1=_require(payload, "n1", int),
            n2=_require(payload, "n2", int),
            depth=_require(payload, "depth", int),
            rounds=tuple(rounds),
        )
    except MalformedCodeError:
        raise
    except (TypeError, ValueError) as exc:
        raise MalformedCodeError(f"strategy sets must hold integer indices: {exc}") from exc


def dump_strategy(strategy: Strategy) -> dict[str, Any]:
    return {
        "variant": strategy.variant,
        "n1": strategy.n1,
        "n2": strategy.n2,
        "depth": strategy.depth,
        "rounds": [
            {history: {"set1": list(set1), "set2": list(set2)} for history, (set1, set2) in sorted(table.items())}
            for table in strategy.rounds
        ],
    }
