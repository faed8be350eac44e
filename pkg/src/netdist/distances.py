"""Exact rearrangement distances by bidirectional search over canonical keys."""

from __future__ import annotations

from .canonical import canonical_key
from .errors import BudgetExceededError, NonTreeError, TaxaMismatchError
from .network import PhyloNetwork
from .rearrange import OpSet, enumerate_neighbors_flagged, find_op_between
from .sequences import DistanceResult, RearrangementSequence, sequence_from_ops

DEFAULT_BUDGET = 500_000


def pr_distance(
    n1: PhyloNetwork,
    n2: PhyloNetwork,
    cap: int | None = None,
    budget_states: int = DEFAULT_BUDGET,
) -> DistanceResult:
    """Shortest PR-sequence length between two networks.

    Intermediates are restricted to at most ``cap`` reticulations
    (default: one above the larger input count); the result's
    ``exhausted`` flag reports whether that restriction ever pruned a
    candidate, in which case the value is an upper bound for the
    unrestricted distance.
    """
    return _bfs_distance(n1, n2, OpSet.PR, cap, budget_states, "pr")


def snpr_distance(
    n1: PhyloNetwork,
    n2: PhyloNetwork,
    cap: int | None = None,
    budget_states: int = DEFAULT_BUDGET,
) -> DistanceResult:
    """Shortest SNPR-sequence length; PR without head prunings."""
    return _bfs_distance(n1, n2, OpSet.SNPR, cap, budget_states, "snpr")


def rspr_distance(
    t1: PhyloNetwork, t2: PhyloNetwork, budget_states: int = DEFAULT_BUDGET
) -> DistanceResult:
    """Exact rSPR distance between two trees via search in tree space."""
    if not t1.is_tree() or not t2.is_tree():
        raise NonTreeError("rSPR distance is defined on trees")
    return _bfs_distance(t1, t2, OpSet.RSPR, 0, budget_states, "rspr")


def _check_taxa(n1: PhyloNetwork, n2: PhyloNetwork) -> None:
    if n1.taxa.labels != n2.taxa.labels:
        raise TaxaMismatchError(f"taxa differ: {n1.taxa.labels} vs {n2.taxa.labels}")


def _bfs_distance(
    n1: PhyloNetwork,
    n2: PhyloNetwork,
    ops: OpSet,
    cap: int | None,
    budget_states: int,
    metric: str,
) -> DistanceResult:
    _check_taxa(n1, n2)
    r1 = len(n1.reticulations())
    r2 = len(n2.reticulations())
    if cap is None:
        cap = max(r1, r2) + 1
    if cap < max(r1, r2):
        raise ValueError("cap must admit both endpoint networks")
    k1 = canonical_key(n1)
    k2 = canonical_key(n2)
    if k1 == k2:
        return DistanceResult(0, sequence_from_ops(n1, [], ops), True, metric)

    # parents[side][key] = (parent key, network); depth via dist maps
    sides = (
        {"dist": {k1: 0}, "net": {k1: n1}, "parent": {k1: None}, "frontier": [k1], "depth": 0},
        {"dist": {k2: 0}, "net": {k2: n2}, "parent": {k2: None}, "frontier": [k2], "depth": 0},
    )
    capped_any = False
    explored = 0

    while sides[0]["frontier"] and sides[1]["frontier"]:
        side = 0 if len(sides[0]["frontier"]) <= len(sides[1]["frontier"]) else 1
        me, other = sides[side], sides[1 - side]
        new_frontier: list[bytes] = []
        meets: list[tuple[int, bytes]] = []
        for key in me["frontier"]:
            g = me["net"][key]
            explored += 1
            if explored > budget_states:
                raise BudgetExceededError(
                    f"state budget {budget_states} exceeded at combined depth "
                    f"{sides[0]['depth'] + sides[1]['depth']}",
                    lower_bound=sides[0]["depth"] + sides[1]["depth"] + 1,
                )
            nbrs, capped = enumerate_neighbors_flagged(g, ops, cap=cap)
            capped_any = capped_any or capped
            for _, nk, h in nbrs:
                if nk in me["dist"]:
                    continue
                me["dist"][nk] = me["depth"] + 1
                me["net"][nk] = h
                me["parent"][nk] = key
                new_frontier.append(nk)
                if nk in other["dist"]:
                    meets.append((me["depth"] + 1 + other["dist"][nk], nk))
        me["depth"] += 1
        me["frontier"] = new_frontier
        if meets:
            best = min(meets)
            return _reconstruct(n1, n2, ops, sides, best[1], best[0], metric, not capped_any)
    raise BudgetExceededError("search space exhausted without meeting; disconnected under cap")


def _reconstruct(
    n1: PhyloNetwork,
    n2: PhyloNetwork,
    ops: OpSet,
    sides,
    meet: bytes,
    value: int,
    metric: str,
    exhausted: bool,
) -> DistanceResult:
    fwd, bwd = sides
    chain_a: list[PhyloNetwork] = []
    k = meet
    while k is not None:
        chain_a.append(fwd["net"][k])
        k = fwd["parent"][k]
    chain_a.reverse()  # n1 .. meet
    chain_b: list[PhyloNetwork] = []
    k = meet
    while k is not None:
        chain_b.append(bwd["net"][k])
        k = bwd["parent"][k]
    # meet .. n2; chain_b[0] is the meet network from the backward side
    nets = chain_a + chain_b[1:]
    ops_list = []
    cur = nets[0]
    for nxt in nets[1:]:
        op = find_op_between(cur, nxt, ops)
        assert op is not None, "adjacent BFS states must be one operation apart"
        ops_list.append(op)
        from .rearrange import apply_op

        cur = apply_op(cur, op)
    seq = sequence_from_ops(n1, ops_list, ops)
    assert len(seq) == value
    assert seq.end_key == canonical_key(n2)
    return DistanceResult(value, seq, exhausted, metric)
