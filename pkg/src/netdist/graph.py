"""Directed multigraphs with integer ids, plus a traced editor for rewrites."""

from __future__ import annotations

from typing import Iterable, Mapping


class Digraph:
    """Immutable directed multigraph with optionally labeled vertices.

    Vertices and edges carry integer ids. Parallel edges are distinct edge
    ids over the same (tail, head) pair, so multiplicities are preserved.
    Instances are never mutated after construction; all rewriting goes
    through :class:`GraphEditor`, which produces a fresh graph.
    """

    __slots__ = ("_labels", "_edges", "_out", "_in", "_key")

    def __init__(self, labels: Mapping[int, str | None], edges: Mapping[int, tuple[int, int]]):
        self._labels = {int(v): labels[v] for v in sorted(labels)}
        self._edges = {int(e): (int(edges[e][0]), int(edges[e][1])) for e in sorted(edges)}
        out: dict[int, list[int]] = {v: [] for v in self._labels}
        inn: dict[int, list[int]] = {v: [] for v in self._labels}
        for e, (u, v) in self._edges.items():
            if u not in out or v not in out:
                raise ValueError(f"edge {e} references unknown vertex")
            out[u].append(e)
            inn[v].append(e)
        self._out = out
        self._in = inn
        self._key: bytes | None = None

    # -- basic accessors -------------------------------------------------

    @property
    def labels_map(self) -> dict[int, str | None]:
        return self._labels

    @property
    def edges_map(self) -> dict[int, tuple[int, int]]:
        return self._edges

    def vertices(self) -> Iterable[int]:
        return self._labels.keys()

    def edges(self) -> Iterable[int]:
        return self._edges.keys()

    @property
    def n_vertices(self) -> int:
        return len(self._labels)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def label(self, v: int) -> str | None:
        return self._labels[v]

    def has_vertex(self, v: int) -> bool:
        return v in self._labels

    def has_edge(self, e: int) -> bool:
        return e in self._edges

    def ends(self, e: int) -> tuple[int, int]:
        return self._edges[e]

    def tail(self, e: int) -> int:
        return self._edges[e][0]

    def head(self, e: int) -> int:
        return self._edges[e][1]

    def out_edges(self, v: int) -> list[int]:
        return self._out[v]

    def in_edges(self, v: int) -> list[int]:
        return self._in[v]

    def out_degree(self, v: int) -> int:
        return len(self._out[v])

    def in_degree(self, v: int) -> int:
        return len(self._in[v])

    def degree(self, v: int) -> int:
        return len(self._out[v]) + len(self._in[v])

    def labeled_vertices(self) -> dict[str, int]:
        """Map label -> vertex id; labels are assumed unique per graph."""
        res: dict[str, int] = {}
        for v, lab in self._labels.items():
            if lab is not None:
                res[lab] = v
        return res

    def children(self, v: int) -> list[int]:
        return [self._edges[e][1] for e in self._out[v]]

    def parents(self, v: int) -> list[int]:
        return [self._edges[e][0] for e in self._in[v]]

    # -- structure queries -----------------------------------------------

    def is_acyclic(self) -> bool:
        return self._topo_order() is not None

    def _topo_order(self) -> list[int] | None:
        indeg = {v: len(self._in[v]) for v in self._labels}
        stack = [v for v, d in indeg.items() if d == 0]
        order = []
        while stack:
            v = stack.pop()
            order.append(v)
            for e in self._out[v]:
                w = self._edges[e][1]
                indeg[w] -= 1
                if indeg[w] == 0:
                    stack.append(w)
        if len(order) != len(self._labels):
            return None
        return order

    def reachable_from(self, v: int) -> set[int]:
        """All vertices reachable from v by a directed path of >= 1 edge."""
        seen: set[int] = set()
        stack = [self._edges[e][1] for e in self._out[v]]
        while stack:
            w = stack.pop()
            if w in seen:
                continue
            seen.add(w)
            for e in self._out[w]:
                stack.append(self._edges[e][1])
        return seen

    def reachable_to(self, v: int) -> set[int]:
        """All vertices with a directed path of >= 1 edge into v."""
        seen: set[int] = set()
        stack = [self._edges[e][0] for e in self._in[v]]
        while stack:
            w = stack.pop()
            if w in seen:
                continue
            seen.add(w)
            for e in self._in[w]:
                stack.append(self._edges[e][0])
        return seen

    def components(self) -> list[frozenset[int]]:
        """Weakly connected components as vertex sets, deterministic order."""
        seen: set[int] = set()
        comps: list[frozenset[int]] = []
        for start in self._labels:
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                v = stack.pop()
                for e in self._out[v]:
                    w = self._edges[e][1]
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
                for e in self._in[v]:
                    w = self._edges[e][0]
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            seen |= comp
            comps.append(frozenset(comp))
        return comps

    def component_edges(self, comp: frozenset[int]) -> list[int]:
        return sorted(e for e, (u, _) in self._edges.items() if u in comp)

    def relabel_ids(self, vmap: Mapping[int, int], emap: Mapping[int, int]) -> "Digraph":
        """Return an id-permuted copy; used to test isomorphism invariance."""
        labels = {vmap[v]: lab for v, lab in self._labels.items()}
        edges = {emap[e]: (vmap[u], vmap[v]) for e, (u, v) in self._edges.items()}
        return type(self)(labels, edges)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        parts = []
        for v in sorted(self._labels):
            lab = self._labels[v]
            parts.append(f"{v}:{lab}" if lab else str(v))
        es = ",".join(f"{u}->{v}" for _, (u, v) in sorted(self._edges.items()))
        return f"<{type(self).__name__} V[{' '.join(parts)}] E[{es}]>"


class GraphEditor:
    """Copy-on-write editor over a Digraph that records its edits in order.

    The id conventions matter to callers that maintain edge-path tables:

    * subdividing edge e keeps id e for the upper half (tail side) and
      allocates a fresh id for the lower half;
    * suppressing an in-1/out-1 vertex merges its two incident edges and
      the merged edge keeps the id of the incoming edge;
    * ``resolve`` follows merges so stale ids can be mapped to the
      surviving edge (or None if the edge was deleted outright);
    * ``rewrite_path`` replays the recorded edits over an edge-id path.
    """

    def __init__(self, g: Digraph):
        self.labels = dict(g.labels_map)
        self.edges = dict(g.edges_map)
        self._next_v = max(self.labels, default=-1) + 1
        self._next_e = max(self.edges, default=-1) + 1
        self.merged: dict[int, int] = {}
        self.deleted: set[int] = set()
        self.removed_vertices: set[int] = set()
        self.events: list[tuple] = []  # ("sub", e, mid, lower) | ("merge", gone, kept) | ("del", e) | ("add", e)

    # -- id bookkeeping ---------------------------------------------------

    def resolve(self, e: int) -> int | None:
        while e in self.merged:
            e = self.merged[e]
        if e not in self.edges:
            return None
        return e

    def fresh_vertex(self, label: str | None = None) -> int:
        v = self._next_v
        self._next_v += 1
        self.labels[v] = label
        return v

    def _fresh_edge_id(self) -> int:
        e = self._next_e
        self._next_e += 1
        return e

    # -- primitive edits ---------------------------------------------------

    def delete_edge(self, e: int) -> None:
        del self.edges[e]
        self.deleted.add(e)
        self.events.append(("del", e))

    def add_edge(self, u: int, v: int, eid: int | None = None) -> int:
        if eid is None:
            eid = self._fresh_edge_id()
        else:
            self.deleted.discard(eid)
            self._next_e = max(self._next_e, eid + 1)
        assert eid not in self.edges
        self.edges[eid] = (u, v)
        self.events.append(("add", eid))
        return eid

    def subdivide(self, e: int) -> tuple[int, int]:
        """Split edge e at a fresh vertex; returns (mid vertex, lower edge id)."""
        u, v = self.edges[e]
        mid = self.fresh_vertex()
        lower = self._fresh_edge_id()
        self.edges[e] = (u, mid)
        self.edges[lower] = (mid, v)
        self.events.append(("sub", e, mid, lower))
        return mid, lower

    def in_out(self, v: int) -> tuple[list[int], list[int]]:
        ins = sorted(e for e, (a, b) in self.edges.items() if b == v)
        outs = sorted(e for e, (a, b) in self.edges.items() if a == v)
        return ins, outs

    def suppress_if_degree_one_one(self, v: int) -> int | None:
        """Suppress v when unlabeled with in-degree 1, out-degree 1; returns kept id."""
        if self.labels.get(v) is not None:
            return None
        ins, outs = self.in_out(v)
        if len(ins) != 1 or len(outs) != 1:
            return None
        ein, eout = ins[0], outs[0]
        p = self.edges[ein][0]
        w = self.edges[eout][1]
        del self.edges[eout]
        self.edges[ein] = (p, w)
        self.merged[eout] = ein
        del self.labels[v]
        self.removed_vertices.add(v)
        self.events.append(("merge", eout, ein))
        return ein

    def remove_isolated(self, v: int) -> None:
        ins, outs = self.in_out(v)
        assert not ins and not outs
        del self.labels[v]
        self.removed_vertices.add(v)

    # -- output ------------------------------------------------------------

    def finish(self, cls=None) -> Digraph:
        cls = cls or Digraph
        return cls(self.labels, self.edges)

    def rewrite_path(self, path: list[int]) -> list[int]:
        """Replay recorded edits over an edge-id path from the original graph.

        Raises ValueError if the path runs through an edge that was deleted;
        callers must rewrite such paths explicitly before relying on this.
        """
        cur = list(path)
        for ev in self.events:
            if ev[0] == "sub":
                _, e, _, lower = ev
                nxt: list[int] = []
                for x in cur:
                    nxt.append(x)
                    if x == e:
                        nxt.append(lower)
                cur = nxt
            elif ev[0] == "merge":
                _, gone, kept = ev
                nxt = []
                for x in cur:
                    y = kept if x == gone else x
                    if not nxt or nxt[-1] != y:
                        nxt.append(y)
                cur = nxt
            elif ev[0] == "del":
                if ev[1] in cur:
                    raise ValueError(f"path edge {ev[1]} was deleted")
        return cur
