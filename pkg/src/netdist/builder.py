"""Constructive sequence builders realizing the distance bound proofs.

``mag_to_pr_sequence`` turns a certified maximum agreement graph into an
explicit PR-sequence of length at most three times the agreement
distance. The construction keeps an embedding-style bookkeeping of the
evolving guest graph into the working network: every working edge lies on
exactly one guest path or is a shadow edge, and sprouts are resolved one
at a time by the case analysis (free resolutions, prunable unblocked
sprouts, addable disagreement edges, claims of occupied root or leaf
vertices via shadow edges, blocked-and-blocking sprouts parked aside, and
disagreement edges whose head wants an occupied vertex).

``pr_to_snpr_sequence`` rewrites any PR-sequence into an SNPR-sequence of
at most twice the length by simulating each head pruning with one raising
and one lowering operation.
"""

from __future__ import annotations

from .agreement import MagWitness, normalize_embedding
from .canonical import canonical_key, find_isomorphism
from .embedding import AgreementEmbedding, embedding_change, verify_agreement_embedding
from .errors import ConstructionError, InvalidOperationError
from .graph import Digraph, GraphEditor
from .network import PhyloNetwork, PrunedGraph
from .rearrange import (
    OpKind,
    OpSet,
    RearrangementOp,
    _violation,
    apply_op,
    apply_op_traced,
    find_op_between,
)
from .sequences import RearrangementSequence, sequence_from_ops, verify_sequence


class _Stuck(Exception):
    pass


def _subs(ed: GraphEditor) -> list[tuple]:
    return [ev for ev in ed.events if ev[0] == "sub"]


def _sub_lower(ed: GraphEditor, edge: int) -> int:
    for _, e, _, lower in _subs(ed):
        if e == edge:
            return lower
    raise _Stuck(f"edge {edge} was not subdivided")


def _sub_mids(ed: GraphEditor) -> list[int]:
    return [mid for _, _, mid, _ in _subs(ed)]


def _added(ed: GraphEditor) -> int:
    adds = [ev[1] for ev in ed.events if ev[0] == "add" and ev[1] not in ed.merged]
    assert len(adds) == 1, f"expected one added edge, saw {adds}"
    return adds[0]


class _Builder:
    """Transforms the poorer network into the richer one along a MAG."""

    def __init__(self, witness: MagWitness, check: bool = True):
        self.check = check
        self.M: PhyloNetwork = witness.poor
        self.target: PhyloNetwork = witness.rich
        g = witness.ag.graph
        self.gl: dict[int, str | None] = dict(g.labels_map)
        self.ge: dict[int, tuple[int, int]] = dict(g.edges_map)
        self._next_ge = max(self.ge, default=-1) + 1
        self.pending: set[int] = set(witness.ag.disagreement_edges)
        emb_t = normalize_embedding(witness.ag, witness.rich, witness.embedding_rich)
        self.tv: dict[int, int] = dict(emb_t.vertex_map)
        self.te: dict[int, list[int]] = {e: list(p) for e, p in emb_t.edge_map.items()}
        self.mv: dict[int, int] = dict(witness.embedding_poor.vertex_map)
        self.me: dict[int, list[int]] = {
            e: list(p) for e, p in witness.embedding_poor.edge_map.items()
        }
        self.shadows: dict[int, list[int]] = {}
        self._next_shadow = 0
        self.ops: list[RearrangementOp] = []
        self.credits: dict = {}
        self.moved_aside: set[int] = set()
        self._leaf1 = witness.poor.taxa.labels[0]

    # -- guest helpers -------------------------------------------------------

    def g_out(self, v: int) -> list[int]:
        return sorted(e for e, (t, _) in self.ge.items() if t == v)

    def g_in(self, v: int) -> list[int]:
        return sorted(e for e, (_, h) in self.ge.items() if h == v)

    def g_degree(self, v: int) -> int:
        return len(self.g_out(v)) + len(self.g_in(v))

    def is_sprout(self, v: int) -> bool:
        return self.gl.get(v) is None and self.g_degree(v) == 1

    def orientation(self, v: int) -> str:
        return "t" if self.g_out(v) else "h"

    def own_edge(self, v: int) -> int:
        es = self.g_out(v) or self.g_in(v)
        return es[0]

    def live_sprouts(self) -> list[int]:
        out = [v for v in self.gl if self.is_sprout(v) and v in self.mv]
        return sorted(out, key=lambda v: (self.own_edge(v), v))

    def guest_digraph(self) -> PrunedGraph:
        return PrunedGraph(self.gl, self.ge)

    def credit(self, key, amount: int = 1) -> None:
        self.credits[key] = self.credits.get(key, 0) + amount

    # -- attachments ----------------------------------------------------------

    def att_M(self, u: int) -> tuple[str, int]:
        w = self.mv[u]
        for x in sorted(self.mv):
            if x != u and self.mv[x] == w:
                return ("vertex", x)
        own = self.own_edge(u)
        for ge_id in sorted(self.me):
            if ge_id == own:
                continue
            for e in self.me[ge_id][:-1]:
                if self.M.head(e) == w:
                    return ("edge", ge_id)
        for sid in sorted(self.shadows):
            for e in self.shadows[sid][:-1]:
                if self.M.head(e) == w:
                    return ("shadow", sid)
        raise _Stuck(f"sprout {u} has no attachment in the working network")

    def att_T(self, u: int) -> tuple[str, int]:
        w = self.tv[u]
        for x in sorted(self.tv):
            if x != u and self.tv[x] == w:
                return ("vertex", x)
        own = self.own_edge(u)
        for ge_id in sorted(self.te):
            if ge_id == own:
                continue
            for e in self.te[ge_id][:-1]:
                if self.target.head(e) == w:
                    return ("edge", ge_id)
        raise _Stuck(f"sprout {u} has no attachment in the target embedding")

    def shadow_covering(self, m_edge: int) -> int | None:
        for sid in sorted(self.shadows):
            if m_edge in self.shadows[sid]:
                return sid
        return None

    def path_owner(self, m_edge: int) -> int | None:
        for ge_id in sorted(self.me):
            if m_edge in self.me[ge_id]:
                return ge_id
        return None

    # -- op application with bookkeeping ---------------------------------------

    def _do(self, op: RearrangementOp, skip: set[int] | None = None) -> GraphEditor:
        """Apply op to M, mechanically rewriting all paths except ``skip``."""
        skip = skip or set()
        why = _violation(self.M, op)
        if why is not None:
            raise _Stuck(f"op {op} invalid: {why}")
        m2, ed = apply_op_traced(self.M, op, _checked=True)
        for ge_id in self.me:
            if ge_id in skip:
                continue
            self.me[ge_id] = ed.rewrite_path(self.me[ge_id])
        for sid in self.shadows:
            self.shadows[sid] = ed.rewrite_path(self.shadows[sid])
        for gv, hv in list(self.mv.items()):
            if hv in ed.removed_vertices:
                # only the moving sprout's image may be suppressed; callers
                # re-point it right after this returns
                self.mv[gv] = -1
        self.M = m2
        self.ops.append(op)
        return ed

    # -- invariants -------------------------------------------------------------

    def _check(self) -> None:
        if not self.check:
            return
        used: dict[int, int] = {}
        for ge_id, path in self.me.items():
            assert path, f"empty path for guest edge {ge_id}"
            t, h = self.ge[ge_id]
            assert self.M.tail(path[0]) == self.mv[t], f"path {ge_id} tail image mismatch"
            assert self.M.head(path[-1]) == self.mv[h], f"path {ge_id} head image mismatch"
            for a, b in zip(path, path[1:]):
                assert self.M.head(a) == self.M.tail(b), f"path {ge_id} broken"
            for e in path:
                used[e] = used.get(e, 0) + 1
        for sid, path in self.shadows.items():
            assert path, f"empty shadow {sid}"
            for a, b in zip(path, path[1:]):
                assert self.M.head(a) == self.M.tail(b), f"shadow {sid} broken"
            for e in path:
                used[e] = used.get(e, 0) + 1
        assert all(k == 1 for k in used.values()), "edge covered more than once"
        assert set(used) == set(self.M.edges()), "edge partition incomplete"
        for gv, hv in self.mv.items():
            assert self.M.has_vertex(hv), f"image of guest {gv} missing from network"
        emb = AgreementEmbedding(self.target, self.guest_digraph(), self.tv, self.te)
        rep = verify_agreement_embedding(emb)
        assert rep.ok, "target embedding broken: " + "; ".join(rep.violations)

    def dump(self) -> str:
        return "\n".join(
            [
                f"M: {self.M!r}",
                f"guest labels: {self.gl}",
                f"guest edges: {self.ge}",
                f"pending: {sorted(self.pending)}",
                f"mv: {self.mv}",
                f"me: {self.me}",
                f"tv: {self.tv}",
                f"te: {self.te}",
                f"shadows: {self.shadows}",
                f"ops: {[(o.kind.value, o.edge, o.target) for o in self.ops]}",
            ]
        )

    # -- guest rewrites ---------------------------------------------------------

    def fix_into_edge(self, u: int, f: int) -> None:
        """Resolve sprout u onto guest edge f, splitting f at u in both maps."""
        mi = self._split_index(self.me[f], self.mv[u], self.M)
        ti = self._split_index(self.te[f], self.tv[u], self.target)
        p, q = self.ge[f]
        new_id = self._next_ge
        self._next_ge += 1
        self.ge[f] = (p, u)
        self.ge[new_id] = (u, q)
        self.me[new_id] = self.me[f][mi:]
        self.me[f] = self.me[f][:mi]
        self.te[new_id] = self.te[f][ti:]
        self.te[f] = self.te[f][:ti]

    @staticmethod
    def _split_index(path: list[int], w: int, host: Digraph) -> int:
        for i, e in enumerate(path[:-1]):
            if host.head(e) == w:
                return i + 1
        raise _Stuck(f"vertex {w} not internal to path {path}")

    def identify(self, u: int, x: int) -> None:
        """Merge sprout u into guest vertex x; both images must coincide."""
        assert self.mv[u] == self.mv[x] and self.tv[u] == self.tv[x]
        for e, (t, h) in list(self.ge.items()):
            self.ge[e] = (x if t == u else t, x if h == u else h)
        del self.gl[u]
        del self.mv[u]
        del self.tv[u]

    # -- claim targets ------------------------------------------------------------

    def target_ready(self, u: int) -> bool:
        kind, where = self.att_T(u)
        return not (kind == "edge" and where in self.pending)

    def claim_edge_for(self, u: int) -> tuple[int, bool]:
        """The working edge to regraft u onto, and whether it is a shadow.

        For an edge attachment this is the first (t-sprout) or last
        (h-sprout) edge of the target edge's current path. For a vertex
        attachment it is the spare edge at the claimed image; when that
        edge carries parked shadow anchors the claim point steps over them
        so shadows end up tied to the resolved path, not to a still-moving
        one.
        """
        kind, where = self.att_T(u)
        orient = self.orientation(u)
        if kind == "edge":
            path = self.me[where]
            return (path[0] if orient == "t" else path[-1]), False
        x_img = self.mv[where]
        if orient == "t":
            cands = self.M.out_edges(x_img)
            assert len(cands) == 1, f"claimed vertex {x_img} lacks a unique outgoing edge"
            edge = cands[0]
            if self.shadow_covering(edge) is not None:
                return edge, True
            owner = self.path_owner(edge)
            assert owner is not None
            path = self.me[owner]
            i = path.index(edge)
            while i + 1 < len(path) and self._is_shadow_tail(self.M.head(path[i])):
                i += 1
            return path[i], False
        cands = self.M.in_edges(x_img)
        assert len(cands) == 1, f"claimed vertex {x_img} lacks a unique incoming edge"
        edge = cands[0]
        if self.shadow_covering(edge) is not None:
            return edge, True
        owner = self.path_owner(edge)
        assert owner is not None
        path = self.me[owner]
        i = path.index(edge)
        while i - 1 >= 0 and self._is_shadow_head(self.M.tail(path[i])):
            i -= 1
        return path[i], False

    def _is_shadow_head(self, w: int) -> bool:
        return any(self.M.head(p[-1]) == w for p in self.shadows.values())

    def _is_shadow_tail(self, w: int) -> bool:
        return any(self.M.tail(p[0]) == w for p in self.shadows.values())

    def prune_op(self, u: int, target_edge: int) -> RearrangementOp:
        own = self.own_edge(u)
        if self.orientation(u) == "t":
            return RearrangementOp(OpKind.TAIL, self.me[own][0], target_edge)
        return RearrangementOp(OpKind.HEAD, self.me[own][-1], target_edge)

    # -- Case A / A': prunable unblocked sprout ----------------------------------

    def resolve_prunable(self, u: int) -> None:
        kind, where = self.att_T(u)
        edge, is_shadow = self.claim_edge_for(u)
        own = self.own_edge(u)
        orient = self.orientation(u)
        op = self.prune_op(u, edge)
        self._do(op, skip={own})
        # own keeps its id list: the moved edge is re-added under its own id
        # and no other own edge is touched by this operation
        self.mv[u] = (
            self.M.tail(self.me[own][0]) if orient == "t" else self.M.head(self.me[own][-1])
        )
        self.credit(u)
        if kind == "edge":
            self.fix_into_edge(u, where)
        elif not is_shadow:
            self._splice_vertex_claim(u, where, edge, via=own)
            self.identify(u, where)
        else:
            self._shadow_vertex_claim(u, where, edge, via=own)
        self._check()

    def _splice_vertex_claim(self, u: int, x: int, t_edge: int, via: int) -> None:
        """Absorb the squatting path up to the claim point; frees the squatter."""
        orient = self.orientation(u)
        owner = self.path_owner(t_edge)
        assert owner is not None and owner != via
        path = self.me[owner]
        i = path.index(t_edge)
        if orient == "t":
            squatter = self._squatter_of(owner, "t")
            self.me[via] = path[: i + 1] + self.me[via]
            self.me[owner] = path[i + 1 :]
            self.mv[u] = self.M.tail(self.me[via][0])
            self.mv[squatter] = self.M.tail(self.me[owner][0])
        else:
            squatter = self._squatter_of(owner, "h")
            self.me[via] = self.me[via] + path[i + 1 :]
            self.me[owner] = path[: i + 1]
            self.mv[u] = self.M.head(self.me[via][-1])
            self.mv[squatter] = self.M.head(self.me[owner][-1])
        assert self.mv[u] == self.mv[x], "claimed vertex image mismatch"

    def _squatter_of(self, owner_edge: int, orient: str) -> int:
        t, h = self.ge[owner_edge]
        v = t if orient == "t" else h
        if not self.is_sprout(v):
            raise _Stuck(f"expected a sprout at the {orient} end of guest edge {owner_edge}")
        return v

    def _shadow_vertex_claim(self, u: int, x: int, s_edge: int, via: int, credit_key=None) -> None:
        """Absorb the parked shadow's near side, then remove the remnant."""
        orient = self.orientation(u)
        sid = self.shadow_covering(s_edge)
        assert sid is not None
        spath = self.shadows[sid]
        i = spath.index(s_edge)
        if orient == "t":
            self.me[via] = spath[: i + 1] + self.me[via]
            self.shadows[sid] = spath[i + 1 :]
            self.mv[u] = self.M.tail(self.me[via][0])
        else:
            self.me[via] = self.me[via] + spath[i + 1 :]
            self.shadows[sid] = spath[: i + 1]
            self.mv[u] = self.M.head(self.me[via][-1])
        assert self.mv[u] == self.mv[x]
        remnant = self.shadows.pop(sid)
        assert len(remnant) == 1, f"shadow remnant not a single edge: {remnant}"
        self.identify(u, x)
        self._do(RearrangementOp(OpKind.MINUS, remnant[0]))
        self.credit(credit_key if credit_key is not None else u)

    # -- Case B / B': addable disagreement edge -----------------------------------

    def _claim_spec(self, sp: int):
        kind, where = self.att_T(sp)
        edge, is_shadow = self.claim_edge_for(sp)
        return kind, where, edge, is_shadow

    def _add_plan(self, e: int):
        t, h = self.ge[e]
        _, _, e_t, _ = self._claim_spec(t)
        _, _, e_h, sh_h = self._claim_spec(h)
        if sh_h:
            sid = self.shadow_covering(e_h)
            if len(self.shadows[sid]) != 1:
                raise _Stuck("head-side parked shadow is not a single edge")
            op = RearrangementOp(OpKind.TAIL, self.shadows[sid][0], e_t)
            return ("reuse", op, sid) if _violation(self.M, op) is None else None
        op = RearrangementOp(OpKind.PLUS, e_h, e_t)
        return ("plus", op, None) if _violation(self.M, op) is None else None

    def addable(self, e: int) -> bool:
        t, h = self.ge[e]
        if not self.target_ready(t) or not self.target_ready(h):
            return False
        try:
            return self._add_plan(e) is not None
        except (_Stuck, AssertionError):
            return False

    def add_disagreement_edge(self, e: int) -> None:
        plan = self._add_plan(e)
        assert plan is not None
        mode, op, sid = plan
        t, h = self.ge[e]
        k_t, w_t, e_t, sh_t = self._claim_spec(t)
        k_h, w_h, e_h, sh_h = self._claim_spec(h)
        if mode == "reuse":
            s_edge = self.shadows[sid][0]
            self._do(op)
            del self.shadows[sid]
            self.me[e] = [s_edge]
            self.pending.discard(e)
            self.mv[t] = self.M.tail(s_edge)
            self.mv[h] = self.M.head(s_edge)
            self.credit(e)
            self._resolve_added_end(t, k_t, w_t, e_t, sh_t, e)
            assert self.mv[h] == self.mv[w_h]
            self.identify(h, w_h)
            self._check()
            return
        ed = self._do(op)
        new_edge = _added(ed)
        self.me[e] = [new_edge]
        self.pending.discard(e)
        self.mv[t] = self.M.tail(new_edge)
        self.mv[h] = self.M.head(new_edge)
        self.credit(e)
        self._resolve_added_end(t, k_t, w_t, e_t, sh_t, e)
        self._resolve_added_end(h, k_h, w_h, e_h, sh_h, e)
        self._check()

    def _resolve_added_end(self, sp, kind, where, claim_edge, is_shadow, dis_edge) -> None:
        """Resolve one endpoint of a freshly placed disagreement edge.

        The claim edge keeps its id through the placement (subdivision
        preserves the upper half), so the generic splice helpers apply
        with the disagreement edge as the absorbing path. An edge
        attachment is re-resolved first: resolving the other endpoint may
        have split the guest edge it pointed at.
        """
        if kind == "edge":
            kind2, where2 = self.att_T(sp)
            assert kind2 == "edge"
            self.fix_into_edge(sp, where2)
            return
        if not is_shadow:
            self._splice_vertex_claim(sp, where, claim_edge, via=dis_edge)
            self.identify(sp, where)
            return
        self._shadow_vertex_claim(sp, where, claim_edge, via=dis_edge, credit_key=dis_edge)

    # -- Case C / C' / C'': unprunable unblocked sprout ----------------------------

    def resolve_unprunable(self, u: int) -> None:
        kind, where = self.att_T(u)
        if kind == "vertex":
            edge, is_shadow = self.claim_edge_for(u)
            if is_shadow:
                self._unprunable_shadow_swap(u, where, edge)
                return
        self._park_shadow(u)
        self.resolve_prunable(u)

    def _unprunable_shadow_swap(self, u: int, x: int, s_edge: int) -> None:
        """One operation: the parked shadow moves onto u's old anchor."""
        own = self.own_edge(u)
        orient = self.orientation(u)
        sid = self.shadow_covering(s_edge)
        assert sid is not None and len(self.shadows[sid]) == 1
        if orient == "t":
            first = self.me[own][0]
            ed = self._do(RearrangementOp(OpKind.HEAD, s_edge, first))
            path = self.me[own]
            assert path[0] == first
            self.shadows[sid] = [first]
            self.me[own] = [s_edge] + path[1:]
            self.mv[u] = self.M.tail(s_edge)
        else:
            last = self.me[own][-1]
            ed = self._do(RearrangementOp(OpKind.TAIL, s_edge, last))
            path = self.me[own]
            assert path[-1] != last or True
            lower = _sub_lower(ed, last)
            li = path.index(lower)
            self.shadows[sid] = [lower]
            self.me[own] = path[:li] + [s_edge]
            self.mv[u] = self.M.head(s_edge)
        assert self.mv[u] == self.mv[x]
        self.credit(u)
        self.identify(u, x)
        self._check()

    def _park_shadow(self, u: int) -> None:
        """Raise a shadow edge onto u's path so that u becomes prunable."""
        own = self.own_edge(u)
        orient = self.orientation(u)
        if orient == "t":
            first = self.me[own][0]
            leaf_img = self.M.labeled_vertices()[self._leaf1]
            pendant = self.M.in_edges(leaf_img)[0]
            ed = self._do(RearrangementOp(OpKind.PLUS, pendant, first))
            new_edge = _added(ed)
            w = self.M.tail(new_edge)
            path = self.me[own]
            k = next(i for i, e in enumerate(path) if self.M.tail(e) == w)
            sid = self._next_shadow
            self._next_shadow += 1
            self.shadows[sid] = path[:k] + [new_edge]
            self.me[own] = path[k:]
            self.mv[u] = w
        else:
            last = self.me[own][-1]
            root_edge = self.M.out_edges(self.M.root())[0]
            ed = self._do(RearrangementOp(OpKind.PLUS, last, root_edge))
            new_edge = _added(ed)
            z = self.M.head(new_edge)
            path = self.me[own]
            k = next(i for i, e in enumerate(path) if self.M.head(e) == z)
            sid = self._next_shadow
            self._next_shadow += 1
            self.shadows[sid] = [new_edge] + path[k + 1 :]
            self.me[own] = path[: k + 1]
            self.mv[u] = z
        self.credit(u)
        self._check()

    # -- Case D: blocked blocking sprout moved aside --------------------------------

    def park_aside(self, u: int) -> None:
        own = self.own_edge(u)
        orient = self.orientation(u)
        if orient == "t":
            target = self.M.out_edges(self.M.root())[0]
        else:
            leaf_img = self.M.labeled_vertices()[self._leaf1]
            target = self.M.in_edges(leaf_img)[0]
        self._do(self.prune_op(u, target), skip={own})
        self.mv[u] = (
            self.M.tail(self.me[own][0]) if orient == "t" else self.M.head(self.me[own][-1])
        )
        self.moved_aside.add(u)
        self.credit(u)
        self._check()

    def blocking_sprouts(self) -> set[int]:
        """Sprouts sitting on some blocked sprout's obstruction path."""
        res: set[int] = set()
        for u in self.live_sprouts():
            if not self.target_ready(u):
                continue
            try:
                edge, _ = self.claim_edge_for(u)
            except (_Stuck, AssertionError):
                continue
            if _violation(self.M, self.prune_op(u, edge)) is None:
                continue
            own = self.me[self.own_edge(u)]
            if self.orientation(u) == "t":
                top = self.M.head(own[0])
                bottom = self.M.tail(edge)
            else:
                top = self.M.head(edge)
                bottom = self.M.tail(own[-1])
            zone = (self.M.reachable_from(top) | {top}) & (
                self.M.reachable_to(bottom) | {bottom}
            )
            for v in self.live_sprouts():
                if v != u and self.mv[v] in zone:
                    res.add(v)
        return res

    # -- Case D': disagreement edge onto an occupied vertex ---------------------------

    def place_via_root(self, e: int) -> None:
        t, h = self.ge[e]
        kind, x = self.att_T(h)
        assert kind == "vertex"
        x_img = self.mv[x]
        src = self.M.in_edges(x_img)[0]
        assert self.shadow_covering(src) is None
        root_edge = self.M.out_edges(self.M.root())[0]
        ed = self._do(RearrangementOp(OpKind.PLUS, src, root_edge))
        new_edge = _added(ed)
        owner = self.path_owner(src)
        assert owner is not None
        path = self.me[owner]
        i = path.index(src)
        squatter = self._squatter_of(owner, "h")
        self.me[e] = [new_edge] + path[i + 1 :]
        self.me[owner] = path[: i + 1]
        self.pending.discard(e)
        self.mv[t] = self.M.tail(new_edge)
        self.mv[h] = self.M.head(self.me[e][-1])
        self.mv[squatter] = self.M.head(self.me[owner][-1])
        assert self.mv[h] == self.mv[x]
        self.identify(h, x)
        self.credit(e)
        self._check()

    # -- main loop ----------------------------------------------------------------

    def run(self) -> list[RearrangementOp]:
        guard = 0
        limit = 50 * (len(self.live_sprouts()) + len(self.pending) + 2)
        while True:
            guard += 1
            if guard > limit:
                raise _Stuck("case loop failed to make progress")
            sprouts = self.live_sprouts()
            if not sprouts and not self.pending:
                break
            if self._try_free_resolution(sprouts):
                continue
            if self._try_prunable(sprouts):
                continue
            if self._try_addable():
                continue
            if self._try_root_or_leaf_claim():
                continue
            if self._try_park_blocking(sprouts):
                continue
            if self._try_place_via_root():
                continue
            if self._try_unprunable(sprouts):
                continue
            raise _Stuck("no case applies")
        if canonical_key(self.M) != canonical_key(self.target):
            raise _Stuck("construction finished off target")
        for key, c in self.credits.items():
            assert c <= 3, f"credit bound violated for {key}: {c}"
        return self.ops

    def _try_free_resolution(self, sprouts) -> bool:
        for u in sprouts:
            if not self.target_ready(u):
                continue
            am = self.att_M(u)
            if am[0] == "shadow":
                continue
            if am == self.att_T(u):
                if am[0] == "edge":
                    self.fix_into_edge(u, am[1])
                else:
                    self.identify(u, am[1])
                self._check()
                return True
        return False

    def _try_prunable(self, sprouts) -> bool:
        for u in sprouts:
            if not self.target_ready(u):
                continue
            if self.att_M(u)[0] == "vertex":
                continue
            try:
                edge, _ = self.claim_edge_for(u)
            except (_Stuck, AssertionError):
                continue
            if _violation(self.M, self.prune_op(u, edge)) is not None:
                continue
            self.resolve_prunable(u)
            return True
        return False

    def _try_addable(self) -> bool:
        for e in sorted(self.pending):
            if self.addable(e):
                self.add_disagreement_edge(e)
                return True
        return False

    def _try_root_or_leaf_claim(self) -> bool:
        singletons = [
            v for v in sorted(self.gl) if self.gl[v] is not None and self.g_degree(v) == 0
        ]
        for x in singletons:
            squatters = [
                v for v in self.live_sprouts() if v != x and self.mv.get(v) == self.mv.get(x)
            ]
            if not squatters:
                continue
            owner = self._t_owner_of(x)
            if owner is None:
                continue
            if owner in self.mv:
                if self.att_M(owner)[0] != "vertex":
                    continue  # prunable owners are Case A's job
                self.resolve_unprunable(owner)
                return True
            e = self.own_edge(owner)
            if e in self.pending:
                self._make_addable(e)
                if self.addable(e):
                    self.add_disagreement_edge(e)
                    return True
        return False

    def _t_owner_of(self, x: int) -> int | None:
        for v in sorted(self.gl):
            if v != x and self.is_sprout(v) and self.tv.get(v) == self.tv[x]:
                return v
        return None

    def _make_addable(self, e: int) -> None:
        """Target-side embedding changes freeing a disagreement edge's sprouts."""
        for _ in range(100):
            changed = False
            for sp in self.ge[e]:
                kind, where = self.att_T(sp)
                if kind == "edge" and where in self.pending and where != e:
                    mate_t, mate_h = self.ge[where]
                    mate = mate_t if self.orientation(sp) == "t" else mate_h
                    emb = AgreementEmbedding(
                        self.target, self.guest_digraph(), self.tv, self.te
                    )
                    emb2 = embedding_change(emb, sp, mate)
                    self.tv = dict(emb2.vertex_map)
                    self.te = {k: list(p) for k, p in emb2.edge_map.items()}
                    changed = True
            if not changed:
                return
        raise _Stuck("embedding changes failed to free the disagreement edge")

    def _try_park_blocking(self, sprouts) -> bool:
        blocking = self.blocking_sprouts()
        for u in sprouts:
            if u not in blocking or u in self.moved_aside:
                continue
            if self.att_M(u)[0] == "vertex":
                continue  # unprunable sprouts cannot be moved aside
            if not self.target_ready(u):
                continue
            edge, _ = self.claim_edge_for(u)
            if _violation(self.M, self.prune_op(u, edge)) is None:
                continue  # not blocked; Case A handles it
            self.park_aside(u)
            return True
        return False

    def _try_place_via_root(self) -> bool:
        for e in sorted(self.pending):
            h = self.ge[e][1]
            if not self.target_ready(h):
                continue
            kind, x = self.att_T(h)
            if kind != "vertex":
                continue
            src = self.M.in_edges(self.mv[x])[0]
            if self.shadow_covering(src) is not None:
                continue
            self.place_via_root(e)
            return True
        return False

    def _try_unprunable(self, sprouts) -> bool:
        for u in sprouts:
            if not self.target_ready(u):
                continue
            if self.att_M(u)[0] != "vertex":
                continue
            try:
                edge, _ = self.claim_edge_for(u)
            except (_Stuck, AssertionError):
                continue
            if self._unprunable_blocked(u, edge):
                continue
            self.resolve_unprunable(u)
            return True
        return False

    def _unprunable_blocked(self, u: int, claim_edge: int) -> bool:
        own = self.me[self.own_edge(u)]
        if self.orientation(u) == "t":
            a = self.M.head(own[0])
            x = self.M.tail(claim_edge)
            return x == a or x in self.M.reachable_from(a)
        b = self.M.tail(own[-1])
        y = self.M.head(claim_edge)
        return y == b or b in self.M.reachable_from(y)


def mag_to_pr_sequence(
    n1: PhyloNetwork, n2: PhyloNetwork, witness: MagWitness
) -> RearrangementSequence:
    """Build a PR-sequence from n1 to n2 of length at most 3 (s + l).

    The witness must certify a maximum agreement graph for the pair; its
    embedding into the richer network is normalized internally. A
    ConstructionError, which certified inputs must never trigger, carries
    a state dump of the working network and the bookkeeping tables.
    """
    builder = _Builder(witness)
    try:
        ops = builder.run()
    except (_Stuck, AssertionError) as exc:
        raise ConstructionError(str(exc), builder.dump()) from exc
    seq = sequence_from_ops(witness.poor, ops, OpSet.PR)
    if canonical_key(n1) == canonical_key(witness.poor):
        out = seq if witness.poor is n1 else _rebase(seq, n1)
    else:
        out = _invert(seq, start=n1)
    assert out.end_key == canonical_key(n2), "sequence endpoint is not the second network"
    return out


def _rebase(seq: RearrangementSequence, start: PhyloNetwork) -> RearrangementSequence:
    """Replay a sequence from an isomorphic copy of its start network."""
    nets = seq.networks()
    ops = []
    cur = start
    for nxt in nets[1:]:
        op = find_op_between(cur, nxt, seq.opset)
        assert op is not None
        ops.append(op)
        cur = apply_op(cur, op)
    return sequence_from_ops(start, ops, seq.opset)


def _invert(seq: RearrangementSequence, start: PhyloNetwork) -> RearrangementSequence:
    """The reverse sequence, from an isomorphic copy of the end network."""
    nets = seq.networks()
    assert canonical_key(start) == canonical_key(nets[-1])
    ops = []
    cur = start
    for prev in reversed(nets[:-1]):
        op = find_op_between(cur, prev, seq.opset)
        assert op is not None, "rearrangement operations must be reversible"
        ops.append(op)
        cur = apply_op(cur, op)
    return sequence_from_ops(start, ops, seq.opset)


def pr_to_snpr_sequence(seq: RearrangementSequence) -> RearrangementSequence:
    """Rewrite a PR-sequence as an SNPR-sequence of at most twice the length.

    Tail prunings and raising or lowering operations carry over verbatim;
    each head pruning becomes one raising operation that installs the
    rerouted edge followed by one lowering operation removing the old
    attachment.
    """
    rep = verify_sequence(seq)
    if not rep.ok:
        raise InvalidOperationError("input sequence invalid: " + "; ".join(rep.violations))
    nets = seq.networks()
    cur = seq.start
    out_ops: list[RearrangementOp] = []
    for (op, _), src in zip(seq.steps, nets):
        iso = find_isomorphism(src, cur)
        assert iso is not None
        _, emap = iso
        if op.kind is not OpKind.HEAD:
            mapped = RearrangementOp(
                op.kind, emap[op.edge], None if op.target is None else emap[op.target]
            )
            out_ops.append(mapped)
            cur = apply_op(cur, mapped)
            continue
        e = emap[op.edge]
        f = emap[op.target]
        plus = RearrangementOp(OpKind.PLUS, f, e)
        cur2, ed = apply_op_traced(cur, plus)
        minus = RearrangementOp(OpKind.MINUS, _sub_lower(ed, e))
        cur3 = apply_op(cur2, minus)
        out_ops.extend([plus, minus])
        cur = cur3
    converted = sequence_from_ops(seq.start, out_ops, OpSet.SNPR)
    assert converted.end_key == seq.end_key, "conversion changed the endpoint"
    assert len(converted) <= 2 * len(seq)
    return converted
