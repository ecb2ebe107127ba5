from addercap.coding.adder_code import (
    VARIANTS,
    DecodabilityResult,
    FeedbackCode,
    Strategy,
    Variant,
    code_to_strategy,
    dump_code,
    dump_strategy,
    is_uniquely_decodable,
    load_code,
    load_strategy,
    simulate,
    strategy_to_code,
)
from addercap.coding.canonical import canonical_bipartite, canonical_graph
from addercap.coding.group_testing import (
    Bounds,
    CandidateState,
    SearchResult,
    TableRow,
    bounds,
    candidate_pairs,
    ceil_log3,
    exact_t,
    exact_t_nn,
    greedy_strategy,
    identifies_all,
    outcome,
    search,
    strategy_outcomes,
    table,
)

__all__ = [
    "VARIANTS",
    "Bounds",
    "CandidateState",
    "DecodabilityResult",
    "FeedbackCode",
    "SearchResult",
    "Strategy",
    "TableRow",
    "Variant",
    "bounds",
    "candidate_pairs",
    "canonical_bipartite",
    "canonical_graph",
    "ceil_log3",
    "code_to_strategy",
    "dump_code",
    "dump_strategy",
    "exact_t",
    "exact_t_nn",
    "greedy_strategy",
    "identifies_all",
    "is_uniquely_decodable",
    "load_code",
    "load_strategy",
    "outcome",
    "search",
    "simulate",
    "strategy_outcomes",
    "strategy_to_code",
    "table",
]
