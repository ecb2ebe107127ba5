from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Collection, Iterator

from addercap.coding.adder_code import Strategy, TestPair, Variant
from addercap.coding.canonical import canonical_bipartite, canonical_graph
from addercap.constants import (
    CAPACITY,
    MAX_EXACT_T_N,
    MAX_EXACT_T_NN_N,
    MAX_SEARCH_DEPTH,
    MAX_SEARCH_NODES,
)
from addercap.errors import DomainError, MalformedCodeError, ResourceLimitError
from addercap.events import log_event

_LOGGER = logging.getLogger("addercap.gtest")

Pair = tuple[int, int]
Candidates = frozenset[Pair]
_EMPTY_TEST: TestPair = ((), ())
Split = tuple[Candidates, Candidates, Candidates]


@dataclass(frozen=True)
class CandidateState:
    variant: Variant
    candidates: Candidates
    n1: int
    n2: int = 0

    def __post_init__(self) -> None:
        if not self.candidates:
            raise DomainError("candidate set must be nonempty")
        for w1, w2 in self.candidates:
            if self.variant == "single_set":
                if not 0 <= w1 < w2 < self.n1:
                    raise DomainError(f"single_set pairs must be increasing and below {self.n1}, got {(w1, w2)}")
            elif not (0 <= w1 < self.n1 and 0 <= w2 < self.n2):
                raise DomainError(f"two_sets pairs must lie in [{self.n1}] x [{self.n2}], got {(w1, w2)}")

    @classmethod
    def single_set(cls, n: int) -> CandidateState:
        if n < 2:
            raise DomainError(f"single_set needs n >= 2, got {n}")
        return cls(variant="single_set", candidates=frozenset(combinations(range(n), 2)), n1=n)

    @classmethod
    def two_sets(cls, n1: int, n2: int | None = None) -> CandidateState:
        n2 = n1 if n2 is None else n2
        if n1 < 1 or n2 < 1:
            raise DomainError(f"two_sets needs sizes >= 1, got {n1} and {n2}")
        return cls(
            variant="two_sets",
            candidates=frozenset((w1, w2) for w1 in range(n1) for w2 in range(n2)),
            n1=n1,
            n2=n2,
        )

    def restricted(self, candidates: Candidates) -> CandidateState:
        return CandidateState(variant=self.variant, candidates=candidates, n1=self.n1, n2=self.n2)


@dataclass(frozen=True)
class SearchResult:
    depth: int
    tree: Strategy
    lower_bound_used: int
    nodes_expanded: int


@dataclass(frozen=True)
class Bounds:
    info_lower: int
    asymptotic_reference: float


@dataclass(frozen=True)
class TableRow:
    n: int
    info_lower: int
    exact_t: int | None
    exact_t_nn: int | None
    greedy: int
    ratio_to_log2n: float


def outcome(test: tuple[Collection[int], Collection[int]], pair: Pair, variant: Variant = "two_sets") -> int:
    set1, set2 = test
    w1, w2 = pair
    if variant == "single_set":
        return int(w1 in set1) + int(w2 in set1)
    return int(w1 in set1) + int(w2 in set2)


def ceil_log3(count: int) -> int:
    depth = 0
    reach = 1
    while reach < count:
        reach *= 3
        depth += 1
    return depth


def bounds(n: int, variant: Variant = "single_set") -> Bounds:
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    count = math.comb(n, 2) if variant == "single_set" else n * n
    return Bounds(info_lower=ceil_log3(count), asymptotic_reference=math.log2(n) / CAPACITY)


def _support(state: CandidateState) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if state.variant == "single_set":
        return tuple(sorted({w for pair in state.candidates for w in pair})), ()
    return tuple(sorted({w1 for w1, _ in state.candidates})), tuple(sorted({w2 for _, w2 in state.candidates}))


def _subsets(elements: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    for size in range(len(elements) + 1):
        yield from combinations(elements, size)


def _tests(state: CandidateState) -> Iterator[TestPair]:
    # The complement of a test relabels outcomes 0 <-> 2, so one side's largest element stays out.
    rows, columns = _support(state)
    if state.variant == "single_set":
        for subset in _subsets(rows[:-1]):
            yield subset, ()
        return
    if columns:
        for set1 in _subsets(rows):
            for set2 in _subsets(columns[:-1]):
                yield set1, set2
    else:
        for set1 in _subsets(rows[:-1]):
            yield set1, ()


def _split(state: CandidateState, test: TestPair) -> Split:
    classes: tuple[set[Pair], set[Pair], set[Pair]] = (set(), set(), set())
    set1 = frozenset(test[0])
    set2 = frozenset(test[1])
    for pair in state.candidates:
        classes[outcome((set1, set2), pair, state.variant)].add(pair)
    return frozenset(classes[0]), frozenset(classes[1]), frozenset(classes[2])


def _partitions(state: CandidateState) -> Iterator[tuple[TestPair, Split]]:
    seen: set[frozenset[Candidates]] = set()
    total = len(state.candidates)
    for test in _tests(state):
        classes = _split(state, test)
        if any(len(group) == total for group in classes):
            continue
        signature = frozenset(group for group in classes if group)
        if signature in seen:
            continue
        seen.add(signature)
        yield test, classes


@dataclass
class _Search:
    variant: Variant
    node_limit: int = MAX_SEARCH_NODES
    nodes_expanded: int = 0
    # canonical form -> (largest failing budget, smallest succeeding budget)
    memo: dict[object, tuple[int, int]] = field(default_factory=dict)

    def key(self, state: CandidateState) -> object:
        if self.variant == "single_set":
            return canonical_graph(state.candidates)
        return canonical_bipartite(state.candidates)

    def solvable(self, state: CandidateState, budget: int) -> bool:
        size = len(state.candidates)
        if size <= 1:
            return True
        if budget <= 0 or size > 3**budget:
            return False

        key = self.key(state)
        failing, succeeding = self.memo.get(key, (-1, MAX_SEARCH_DEPTH + 1))
        if budget >= succeeding:
            return True
        if budget <= failing:
            return False

        self.nodes_expanded += 1
        if self.nodes_expanded > self.node_limit:
            raise ResourceLimitError(f"search expanded more than {self.node_limit} nodes")

        capacity = 3 ** (budget - 1)
        for _, classes in _partitions(state):
            if any(len(group) > capacity for group in classes):
                continue
            ordered = sorted((group for group in classes if group), key=len, reverse=True)
            if all(self.solvable(state.restricted(group), budget - 1) for group in ordered):
                self.memo[key] = (failing, min(succeeding, budget))
                return True

        self.memo[key] = (max(failing, budget), succeeding)
        return False

    def witness_test(self, state: CandidateState, budget: int) -> tuple[TestPair, Split]:
        capacity = 3 ** (budget - 1)
        for test, classes in _partitions(state):
            if any(len(group) > capacity for group in classes):
                continue
            if all(not group or self.solvable(state.restricted(group), budget - 1) for group in classes):
                return test, classes
        raise ResourceLimitError("witness reconstruction lost its memoized solution")


def _fixed_depth_strategy(
    state: CandidateState,
    depth: int,
    choose: Callable[[CandidateState, int], tuple[TestPair, Split]],
) -> Strategy:
    rounds: list[dict[str, TestPair]] = [{} for _ in range(depth)]

    def walk(candidates: Candidates, history: str, remaining: int) -> None:
        if remaining == 0:
            return
        round_index = depth - remaining
        if len(candidates) <= 1:
            rounds[round_index][history] = _EMPTY_TEST
            walk(candidates, history + "0", remaining - 1)
            return
        test, classes = choose(state.restricted(candidates), remaining)
        rounds[round_index][history] = test
        for result, group in enumerate(classes):
            if group:
                walk(group, history + str(result), remaining - 1)

    walk(state.candidates, "", depth)
    n2 = state.n2 if state.variant == "two_sets" else 0
    return Strategy(variant=state.variant, n1=state.n1, n2=n2, depth=depth, rounds=tuple(rounds))


def search(state: CandidateState, *, node_limit: int = MAX_SEARCH_NODES) -> SearchResult:
    searcher = _Search(variant=state.variant, node_limit=node_limit)
    lower = ceil_log3(len(state.candidates))
    for budget in range(lower, MAX_SEARCH_DEPTH + 1):
        if searcher.solvable(state, budget):
            tree = _fixed_depth_strategy(state, budget, searcher.witness_test)
            log_event(
                _LOGGER,
                logging.INFO,
                "gtest.exact.completed",
                variant=state.variant,
                candidates=len(state.candidates),
                depth=budget,
                nodes_expanded=searcher.nodes_expanded,
            )
            return SearchResult(depth=budget, tree=tree, lower_bound_used=lower, nodes_expanded=searcher.nodes_expanded)
    raise ResourceLimitError(f"no strategy within the depth cap {MAX_SEARCH_DEPTH}")


def exact_t(n: int, *, max_n: int = MAX_EXACT_T_N) -> SearchResult:
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if n > max_n:
        raise ResourceLimitError(f"exact_t is capped at n={max_n}, got {n}")
    return search(CandidateState.single_set(n))


def exact_t_nn(n: int, *, max_n: int = MAX_EXACT_T_NN_N) -> SearchResult:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n > max_n:
        raise ResourceLimitError(f"exact_t_nn is capped at n={max_n}, got {n}")
    return search(CandidateState.two_sets(n))


def _greedy_choice(state: CandidateState, _remaining: int) -> tuple[TestPair, Split]:
    best: tuple[int, TestPair, Split] | None = None
    for test, classes in _partitions(state):
        worst = max(len(group) for group in classes)
        if best is None or (worst, test) < (best[0], best[1]):
            best = (worst, test, classes)
    if best is None:
        raise DomainError("no splitting test exists for the candidate set")
    return best[1], best[2]


def _greedy_depth(state: CandidateState) -> int:
    if len(state.candidates) <= 1:
        return 0
    _, classes = _greedy_choice(state, 0)
    return 1 + max(_greedy_depth(state.restricted(group)) for group in classes if group)


def greedy_strategy(state: CandidateState) -> Strategy:
    return _fixed_depth_strategy(state, _greedy_depth(state), _greedy_choice)


def strategy_outcomes(strategy: Strategy, w1: int, w2: int) -> tuple[int, ...]:
    history = ""
    results = []
    for round_index, table in enumerate(strategy.rounds):
        if history not in table:
            raise MalformedCodeError(f"strategy has no test for reachable history {history!r} in round {round_index}")
        result = outcome(table[history], (w1, w2), strategy.variant)
        results.append(result)
        history += str(result)
    return tuple(results)


def candidate_pairs(strategy: Strategy) -> list[Pair]:
    if strategy.variant == "single_set":
        return list(combinations(range(strategy.n1), 2))
    return [(w1, w2) for w1 in range(strategy.n1) for w2 in range(strategy.n2)]


def identifies_all(strategy: Strategy) -> bool:
    sequences = [strategy_outcomes(strategy, w1, w2) for w1, w2 in candidate_pairs(strategy)]
    return len(set(sequences)) == len(sequences)


def table(n_max: int, *, exact_cap: int = MAX_EXACT_T_N, exact_nn_cap: int = MAX_EXACT_T_NN_N) -> list[TableRow]:
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    rows = []
    for n in range(2, n_max + 1):
        exact = exact_t(n).depth if n <= exact_cap else None
        exact_nn = exact_t_nn(n).depth if n <= exact_nn_cap else None
        greedy = greedy_strategy(CandidateState.single_set(n)).depth
        measured = exact if exact is not None else greedy
        rows.append(
            TableRow(
                n=n,
                info_lower=bounds(n).info_lower,
                exact_t=exact,
                exact_t_nn=exact_nn,
                greedy=greedy,
                ratio_to_log2n=measured / math.log2(n),
            )
        )
    return rows
