"""Prune-and-regraft rearrangement operations on phylogenetic networks.

Four operation kinds are implemented over edge ids:

* ``TAIL``  prunes edge (u, v) at its tail u (an inner tree vertex) and
  regrafts it onto a subdivision of the target edge;
* ``HEAD``  prunes (u, v) at its head v (a reticulation) likewise;
* ``PLUS``  subdivides (u, v) with a new head vertex, subdivides the
  target edge with a new tail vertex and joins them, adding one
  reticulation; the target may equal the subdivided edge itself, which
  addresses its upper half;
* ``MINUS`` deletes (u, v) with u an inner tree vertex and v a
  reticulation, suppressing both.

Ids follow the :class:`~netdist.graph.GraphEditor` conventions; in
particular a pruned-and-regrafted edge keeps its id, so callers can track
moved edges across operations.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .canonical import canonical_key
from .errors import InvalidOperationError, NonTreeError
from .graph import GraphEditor
from .network import PhyloNetwork


class OpKind(enum.Enum):
    TAIL = "tail"
    HEAD = "head"
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True, order=True)
class RearrangementOp:
    """One rearrangement move, addressed by edge ids of the source network."""

    kind: OpKind
    edge: int
    target: int | None = None

    def __post_init__(self):
        if self.kind is OpKind.MINUS:
            if self.target is not None:
                raise ValueError("MINUS takes no target edge")
        elif self.target is None:
            raise ValueError(f"{self.kind.value} requires a target edge")

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "edge": self.edge, "target": self.target}

    @classmethod
    def from_json(cls, d: dict) -> "RearrangementOp":
        return cls(OpKind(d["kind"]), d["edge"], d.get("target"))


class OpSet(enum.Enum):
    PR = "pr"
    SNPR = "snpr"
    RSPR = "rspr"

    @property
    def kinds(self) -> tuple[OpKind, ...]:
        if self is OpSet.PR:
            return (OpKind.TAIL, OpKind.HEAD, OpKind.PLUS, OpKind.MINUS)
        if self is OpSet.SNPR:
            return (OpKind.TAIL, OpKind.PLUS, OpKind.MINUS)
        return (OpKind.TAIL,)


def _is_inner_tree(g: PhyloNetwork, v: int) -> bool:
    return g.label(v) is None and g.in_degree(v) == 1 and g.out_degree(v) == 2

def _is_reticulation(g: PhyloNetwork, v: int) -> bool:
    return g.in_degree(v) == 2 and g.out_degree(v) == 1


def _violation(
    g: PhyloNetwork,
    op: RearrangementOp,
    desc_of: set[int] | None = None,
    anc_of: set[int] | None = None,
) -> str | None:
    """Return the violated clause, or None when the op is applicable.

    The descendant and ancestor tests are stated against the intermediate
    graph (after deletion and suppression) but are evaluated on g itself;
    the two agree because deleting an edge incident to the tested vertex
    and suppressing a degree-two vertex never change reachability between
    surviving vertices.
    """
    if not g.has_edge(op.edge):
        return f"edge {op.edge} does not exist"
    u, v = g.ends(op.edge)
    k = op.kind
    if k is OpKind.MINUS:
        if not _is_inner_tree(g, u):
            return f"PR- requires tail {u} to be an inner tree vertex"
        if not _is_reticulation(g, v):
            return f"PR- requires head {v} to be a reticulation"
        return None
    f = op.target
    if k is OpKind.PLUS:
        if f != op.edge and not g.has_edge(f):
            return f"target edge {f} does not exist"
        if f != op.edge:
            x = g.tail(f)
            if x == v or x in (desc_of if desc_of is not None else g.reachable_from(v)):
                return f"target {f} is a descendant of the subdivision vertex"
        return None
    if k is OpKind.TAIL:
        if not _is_inner_tree(g, u):
            return f"tail PR0 requires {u} to be an inner tree vertex"
        if f == op.edge or not g.has_edge(f):
            return f"target edge {f} not available after pruning"
        x = g.tail(f)
        if x == v or x in (desc_of if desc_of is not None else g.reachable_from(v)):
            return f"target {f} is a descendant of {v}"
        return None
    if k is OpKind.HEAD:
        if not _is_reticulation(g, v):
            return f"head PR0 requires {v} to be a reticulation"
        if f == op.edge or not g.has_edge(f):
            return f"target edge {f} not available after pruning"
        y = g.head(f)
        if y == u or y in (anc_of if anc_of is not None else g.reachable_to(u)):
            return f"target {f} is an ancestor of {u}"
        return None
    raise AssertionError(k)


def is_valid_op(g: PhyloNetwork, op: RearrangementOp) -> bool:
    """True iff applying op to g yields a valid phylogenetic network."""
    return _violation(g, op) is None


def apply_op_traced(
    g: PhyloNetwork, op: RearrangementOp, _checked: bool = False
) -> tuple[PhyloNetwork, GraphEditor]:
    """Apply op, returning the result and the editor that records the edits."""
    if not _checked:
        why = _violation(g, op)
        if why is not None:
            raise InvalidOperationError(why)
    ed = GraphEditor(g)
    u, v = g.ends(op.edge)
    k = op.kind
    if k is OpKind.TAIL:
        ed.delete_edge(op.edge)
        ed.suppress_if_degree_one_one(u)
        f = ed.resolve(op.target)
        assert f is not None
        mid, _ = ed.subdivide(f)
        ed.add_edge(mid, v, eid=op.edge)
    elif k is OpKind.HEAD:
        ed.delete_edge(op.edge)
        ed.suppress_if_degree_one_one(v)
        f = ed.resolve(op.target)
        assert f is not None
        mid, _ = ed.subdivide(f)
        ed.add_edge(u, mid, eid=op.edge)
    elif k is OpKind.PLUS:
        head_mid, _ = ed.subdivide(op.edge)
        f = ed.resolve(op.target)
        assert f is not None
        tail_mid, _ = ed.subdivide(f)
        ed.add_edge(tail_mid, head_mid)
    else:  # MINUS
        ed.delete_edge(op.edge)
        ed.suppress_if_degree_one_one(u)
        ed.suppress_if_degree_one_one(v)
    return ed.finish(PhyloNetwork), ed


def apply_op(g: PhyloNetwork, op: RearrangementOp) -> PhyloNetwork:
    """Apply a rearrangement operation; raises InvalidOperationError."""
    return apply_op_traced(g, op)[0]


def candidate_ops(g: PhyloNetwork, ops: OpSet) -> list[RearrangementOp]:
    """All applicable operations of the given kinds, in deterministic order."""
    kinds = ops.kinds
    out: list[RearrangementOp] = []
    edges = sorted(g.edges())
    for e in edges:
        u, v = g.ends(e)
        if OpKind.TAIL in kinds and _is_inner_tree(g, u):
            desc = g.reachable_from(v)
            for f in edges:
                if f == e:
                    continue
                x = g.tail(f)
                if x != v and x not in desc:
                    out.append(RearrangementOp(OpKind.TAIL, e, f))
        if OpKind.HEAD in kinds and _is_reticulation(g, v):
            anc = g.reachable_to(u)
            for f in edges:
                if f == e:
                    continue
                y = g.head(f)
                if y != u and y not in anc:
                    out.append(RearrangementOp(OpKind.HEAD, e, f))
        if OpKind.PLUS in kinds:
            desc = g.reachable_from(v)
            for f in edges:
                if f != e:
                    x = g.tail(f)
                    if x == v or x in desc:
                        continue
                out.append(RearrangementOp(OpKind.PLUS, e, f))
        if OpKind.MINUS in kinds and _is_inner_tree(g, u) and _is_reticulation(g, v):
            out.append(RearrangementOp(OpKind.MINUS, e))
    return out


def enumerate_neighbors(
    g: PhyloNetwork, ops: OpSet, cap: int | None = None
) -> list[tuple[RearrangementOp, bytes, PhyloNetwork]]:
    """Distinct rearrangement neighbors of g, deduplicated by canonical key.

    The network itself is excluded even when some operation maps g onto an
    isomorphic copy. With a reticulation cap, results whose reticulation
    count exceeds the cap are dropped; callers needing to know whether the
    cap pruned anything should pass ``capped_flag``.
    """
    res, _ = enumerate_neighbors_flagged(g, ops, cap)
    return res


def enumerate_neighbors_flagged(
    g: PhyloNetwork, ops: OpSet, cap: int | None = None
) -> tuple[list[tuple[RearrangementOp, bytes, PhyloNetwork]], bool]:
    """Like enumerate_neighbors, also reporting whether the cap pruned results."""
    if ops is OpSet.RSPR and not g.is_tree():
        raise NonTreeError("rSPR neighborhoods are defined on trees only")
    own = canonical_key(g)
    r = len(g.reticulations())
    seen: set[bytes] = {own}
    out: list[tuple[RearrangementOp, bytes, PhyloNetwork]] = []
    capped = False
    for op in candidate_ops(g, ops):
        if cap is not None:
            r2 = r + (1 if op.kind is OpKind.PLUS else -1 if op.kind is OpKind.MINUS else 0)
            if r2 > cap:
                capped = True
                continue
        h, _ = apply_op_traced(g, op, _checked=True)
        k = canonical_key(h)
        if k in seen:
            continue
        seen.add(k)
        out.append((op, k, h))
    return out, capped


def find_op_between(g: PhyloNetwork, h: PhyloNetwork, ops: OpSet) -> RearrangementOp | None:
    """First operation taking g to a network isomorphic to h, if one exists."""
    target = canonical_key(h)
    for op in candidate_ops(g, ops):
        if canonical_key(apply_op(g, op)) == target:
            return op
    return None
