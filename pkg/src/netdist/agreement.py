"""Prunings, agreement graphs, and the exact agreement distance.

The distance between two networks with r <= r' reticulations is s + l,
where l = r' - r and s is the smallest number of sprouts over the
agreement subgraphs of any agreement graph. The solver runs iterative
deepening on s: the set of graphs obtainable from the poorer network by
exactly s prunings is intersected, via canonical keys, with the graphs
obtainable from the richer one by s + 2l prunings after discarding l
single-edge unlabeled components. Both directions of the
prunings-iff-embedding lemma make this complete.
"""

from __future__ import annotations

from dataclasses import dataclass

from .canonical import canonical_key
from .embedding import (
    AgreementEmbedding,
    attachment,
    embedding_change,
    find_agreement_embedding,
    incident_edge,
    sprout_orientation,
    verify_agreement_embedding,
)
from .errors import BudgetExceededError, EmbeddingError, PruningError, TaxaMismatchError
from .graph import Digraph, GraphEditor
from .network import PhyloNetwork, PrunedGraph
from .sequences import DistanceResult

_MAX_SPROUTS = 64


@dataclass(frozen=True, order=True)
class Pruning:
    """Detach one end of an edge, leaving a fresh sprout there."""

    edge: int
    end: str  # "tail" | "head"


def apply_pruning(g: Digraph, p: Pruning) -> PrunedGraph:
    """Apply a pruning; the detached edge keeps its id, anchored at a new sprout."""
    if not g.has_edge(p.edge):
        raise PruningError(f"edge {p.edge} does not exist")
    u, v = g.ends(p.edge)
    x = u if p.end == "tail" else v
    if g.label(x) is None and g.degree(x) != 3:
        raise PruningError(f"pruned-at vertex {x} must be labeled or have degree three")
    ed = GraphEditor(g)
    ed.delete_edge(p.edge)
    s = ed.fresh_vertex(None)
    if p.end == "tail":
        ed.add_edge(s, v, eid=p.edge)
    else:
        ed.add_edge(u, s, eid=p.edge)
    ed.suppress_if_degree_one_one(x)
    return ed.finish(PrunedGraph)


def enumerate_prunings(g: Digraph) -> list[Pruning]:
    """All legal (edge, end) pairs on g, in deterministic order."""
    out: list[Pruning] = []
    for e in sorted(g.edges()):
        u, v = g.ends(e)
        if g.label(u) is not None or g.degree(u) == 3:
            out.append(Pruning(e, "tail"))
        if g.label(v) is not None or g.degree(v) == 3:
            out.append(Pruning(e, "head"))
    return out


def remove_components(g: PrunedGraph, comps: list[frozenset[int]]) -> PrunedGraph:
    """Drop whole components; ids of the remaining vertices and edges persist."""
    gone = set()
    for comp in comps:
        gone |= comp
    labels = {v: lab for v, lab in g.labels_map.items() if v not in gone}
    edges = {e: (u, v) for e, (u, v) in g.edges_map.items() if u not in gone}
    return PrunedGraph(labels, edges)


class PruningLevels:
    """Level sets of graphs reachable by exactly d prunings, deduplicated.

    Levels hold parent pointers only; member graphs are reconstructed by
    replaying their pruning chain, which keeps deep levels memory-light.
    For every member the canonical keys after removing k of its
    single-edge unlabeled components are indexed as well, which is what
    the distance solver joins against.
    """

    def __init__(self, g0: PrunedGraph):
        self.g0 = g0
        k0 = canonical_key(g0)
        self.levels: list[dict[bytes, tuple[bytes | None, Pruning | None]]] = [{k0: (None, None)}]
        self.reduced: list[dict[int, dict[bytes, bytes]]] = [self._reduced_entry(g0, k0, {})]

    def _reduced_entry(self, g: PrunedGraph, key: bytes, acc: dict) -> dict:
        comps = sorted(g.single_edge_components(), key=sorted)
        for k in range(1, len(comps) + 1):
            rk = canonical_key(remove_components(g, comps[:k]))
            acc.setdefault(k, {}).setdefault(rk, key)
        return acc

    def ensure(self, depth: int) -> None:
        while len(self.levels) - 1 < depth:
            d = len(self.levels) - 1
            nxt: dict[bytes, tuple[bytes | None, Pruning | None]] = {}
            red: dict[int, dict[bytes, bytes]] = {}
            for pk in self.levels[d]:
                pg = self.graph_at(d, pk)
                for p in enumerate_prunings(pg):
                    h = apply_pruning(pg, p)
                    hk = canonical_key(h)
                    if hk in nxt:
                        continue
                    nxt[hk] = (pk, p)
                    self._reduced_entry(h, hk, red)
            self.levels.append(nxt)
            self.reduced.append(red)

    def keys(self, depth: int) -> set[bytes]:
        self.ensure(depth)
        return set(self.levels[depth].keys())

    def reduced_lookup(self, depth: int, k: int) -> dict[bytes, bytes]:
        self.ensure(depth)
        return self.reduced[depth].get(k, {})

    def graph_at(self, depth: int, key: bytes) -> PrunedGraph:
        chain: list[Pruning] = []
        d, k = depth, key
        while d > 0:
            pk, p = self.levels[d][k]
            assert p is not None and pk is not None
            chain.append(p)
            k = pk
            d -= 1
        g: PrunedGraph = self.g0
        for p in reversed(chain):
            g = apply_pruning(g, p)
        return g


_level_cache: dict[bytes, PruningLevels] = {}


def pruning_levels(g: PhyloNetwork | PrunedGraph) -> PruningLevels:
    """Levels for a network, shared across distance calls via canonical key."""
    pg = g.as_pruned() if isinstance(g, PhyloNetwork) else g
    key = canonical_key(pg)
    lv = _level_cache.get(key)
    if lv is None:
        lv = PruningLevels(pg)
        _level_cache[key] = lv
    return lv


def clear_caches() -> None:
    _level_cache.clear()


@dataclass
class AgreementGraph:
    """A pruned graph split into agreement subgraphs and disagreement edges."""

    graph: PrunedGraph
    disagreement_edges: tuple[int, ...]

    @property
    def l(self) -> int:
        return len(self.disagreement_edges)

    @property
    def s(self) -> int:
        """Sprouts in the agreement subgraphs; disagreement-edge ends do not count."""
        skip = set()
        for e in self.disagreement_edges:
            u, v = self.graph.ends(e)
            skip.add(u)
            skip.add(v)
        return len([v for v in self.graph.sprouts() if v not in skip])

    def agreement_part(self) -> PrunedGraph:
        comps = []
        for e in self.disagreement_edges:
            u, v = self.graph.ends(e)
            comps.append(frozenset((u, v)))
        return remove_components(self.graph, comps)

    def components_json(self) -> list[dict]:
        out = []
        dis_vertices = set()
        for e in self.disagreement_edges:
            u, v = self.graph.ends(e)
            dis_vertices |= {u, v}
        for comp in self.graph.components():
            role = "disagreement" if comp <= dis_vertices and len(comp) == 2 else "agreement"
            es = self.graph.component_edges(comp)
            if role == "disagreement" and not set(es) <= set(self.disagreement_edges):
                role = "agreement"
            out.append(
                {
                    "role": role,
                    "vertices": [
                        {"id": v, "label": self.graph.label(v)} for v in sorted(comp)
                    ],
                    "edges": [[e, *self.graph.ends(e)] for e in es],
                }
            )
        return out


def _orient(n1: PhyloNetwork, n2: PhyloNetwork) -> tuple[PhyloNetwork, PhyloNetwork, bool]:
    """Return (poorer, richer, swapped) by reticulation count."""
    r1 = len(n1.reticulations())
    r2 = len(n2.reticulations())
    if r1 <= r2:
        return n1, n2, False
    return n2, n1, True


def _check_taxa(n1: PhyloNetwork, n2: PhyloNetwork) -> None:
    if n1.taxa.labels != n2.taxa.labels:
        raise TaxaMismatchError(f"taxa differ: {n1.taxa.labels} vs {n2.taxa.labels}")


def check_agreement_graph(
    graph: PrunedGraph,
    disagreement_edges: tuple[int, ...],
    n1: PhyloNetwork,
    n2: PhyloNetwork,
) -> tuple[bool, AgreementEmbedding | None, AgreementEmbedding | None]:
    """Decide the agreement-graph property; witnesses returned when it holds.

    The first embedding is of the graph minus its disagreement edges into
    the reticulation-poorer network, the second of the whole graph into
    the richer one.
    """
    _check_taxa(n1, n2)
    poor, rich, _ = _orient(n1, n2)
    l = len(rich.reticulations()) - len(poor.reticulations())
    if len(disagreement_edges) != l:
        return False, None, None
    single = {frozenset(graph.ends(e)): e for e in disagreement_edges}
    comps = {frozenset(c) for c in graph.single_edge_components()}
    for pair in single:
        if pair not in comps:
            return False, None, None
    ag = AgreementGraph(graph, tuple(sorted(disagreement_edges)))
    emb_rich = find_agreement_embedding(graph, rich)
    if emb_rich is None:
        return False, None, None
    emb_poor = find_agreement_embedding(ag.agreement_part(), poor)
    if emb_poor is None:
        return False, None, None
    return True, emb_poor, emb_rich


def is_agreement_graph(
    graph: PrunedGraph,
    disagreement_edges: tuple[int, ...],
    n1: PhyloNetwork,
    n2: PhyloNetwork,
) -> bool:
    ok, _, _ = check_agreement_graph(graph, disagreement_edges, n1, n2)
    return ok


@dataclass
class MagWitness:
    """A maximum agreement graph together with both certifying embeddings."""

    ag: AgreementGraph
    poor: PhyloNetwork
    rich: PhyloNetwork
    embedding_poor: AgreementEmbedding
    embedding_rich: AgreementEmbedding
    swapped: bool  # True when (first, second) arguments were (rich, poor)

    def to_json(self) -> dict:
        emb_n = self.embedding_poor if not self.swapped else self.embedding_rich
        emb_np = self.embedding_rich if not self.swapped else self.embedding_poor
        return {
            "d": self.ag.s + self.ag.l,
            "s": self.ag.s,
            "l": self.ag.l,
            "components": self.ag.components_json(),
            "embedding_N": emb_n.to_json(),
            "embedding_Nprime": emb_np.to_json(),
        }


def agreement_distance(n1: PhyloNetwork, n2: PhyloNetwork) -> DistanceResult:
    """Exact agreement distance with a certified maximum-agreement-graph witness."""
    _check_taxa(n1, n2)
    poor, rich, swapped = _orient(n1, n2)
    l = len(rich.reticulations()) - len(poor.reticulations())
    la = pruning_levels(poor)
    lb = pruning_levels(rich)
    for s in range(_MAX_SPROUTS + 1):
        akeys = la.keys(s)
        if l == 0:
            match = sorted(akeys & lb.keys(s))
            if match:
                key = match[0]
                graph = lb.graph_at(s, key)
                return _finish(graph, (), poor, rich, swapped, s, l)
        else:
            lookup = lb.reduced_lookup(s + 2 * l, l)
            match = sorted(akeys & set(lookup))
            if match:
                bkey = lookup[match[0]]
                graph = lb.graph_at(s + 2 * l, bkey)
                comps = sorted(graph.single_edge_components(), key=sorted)[:l]
                dis = tuple(sorted(graph.component_edges(c)[0] for c in comps))
                return _finish(graph, dis, poor, rich, swapped, s, l)
    raise BudgetExceededError(f"no agreement graph within {_MAX_SPROUTS} sprouts")


def _finish(graph, dis, poor, rich, swapped, s, l) -> DistanceResult:
    ok, emb_poor, emb_rich = check_agreement_graph(graph, dis, poor, rich)
    assert ok and emb_poor is not None and emb_rich is not None, (
        "level-set match failed certification; prunings-iff-embedding violated"
    )
    ag = AgreementGraph(graph, dis)
    assert ag.s == s and ag.l == l
    witness = MagWitness(ag, poor, rich, emb_poor, emb_rich, swapped)
    return DistanceResult(s + l, witness, exhausted=True, metric="ad")


def normalize_embedding(
    ag: AgreementGraph, host: PhyloNetwork, emb: AgreementEmbedding
) -> AgreementEmbedding:
    """Re-splice an embedding into the richer network into the normal form.

    Afterwards no agreement-subgraph sprout is attached to a disagreement
    edge, and a disagreement edge may be attached to another only with a
    smaller index; both follow by repeated embedding changes that move the
    offending sprout upward (t-sprouts) or downward (h-sprouts). With no
    disagreement edges the embedding is returned unchanged.
    """
    report = verify_agreement_embedding(emb)
    if not report.ok:
        raise EmbeddingError("embedding invalid: " + "; ".join(report.violations))
    dis = list(ag.disagreement_edges)
    if not dis:
        return emb
    dis_sprouts: dict[int, tuple[int, int]] = {}
    for e in dis:
        u, v = ag.graph.ends(e)
        dis_sprouts[e] = (u, v)
    guard = 0
    cur = emb

    def offending_agreement_sprout():
        dis_set = set(dis)
        skip = {x for uv in dis_sprouts.values() for x in uv}
        for sp in cur.guest.sprouts() if isinstance(cur.guest, PrunedGraph) else []:
            if sp in skip:
                continue
            kind, where = attachment(cur, sp)
            if kind == "edge" and where in dis_set:
                return sp, where
        return None

    while True:
        guard += 1
        if guard > 10_000:
            raise EmbeddingError("normalization failed to terminate")
        off = offending_agreement_sprout()
        if off is None:
            break
        sp, e = off
        mate = dis_sprouts[e][0] if sprout_orientation(cur.guest, sp) == "t" else dis_sprouts[e][1]
        cur = embedding_change(cur, sp, mate)
    order = {e: i for i, e in enumerate(dis)}
    progress = True
    while progress:
        progress = False
        for e in dis:
            for sp in dis_sprouts[e]:
                kind, where = attachment(cur, sp)
                if kind == "edge" and where in order and order[where] > order[e]:
                    mate = (
                        dis_sprouts[where][0]
                        if sprout_orientation(cur.guest, sp) == "t"
                        else dis_sprouts[where][1]
                    )
                    cur = embedding_change(cur, sp, mate)
                    progress = True
                    guard += 1
                    if guard > 10_000:
                        raise EmbeddingError("normalization failed to terminate")
    report = verify_agreement_embedding(cur)
    assert report.ok, "normalization broke the embedding"
    _assert_normalized(ag, cur)
    return cur


def _assert_normalized(ag: AgreementGraph, emb: AgreementEmbedding) -> None:
    for prop, ok in check_normal_form(ag, emb).items():
        assert ok, f"normal form property violated: {prop}"


def check_normal_form(ag: AgreementGraph, emb: AgreementEmbedding) -> dict[str, bool]:
    """The three normal-form properties of an embedding into the richer network."""
    dis = list(ag.disagreement_edges)
    res = {"no-agreement-sprout-on-disagreement": True, "first-edge-free": True, "ordered": True}
    if not dis:
        return res
    dis_set = set(dis)
    dis_sprout_set = set()
    for e in dis:
        u, v = ag.graph.ends(e)
        dis_sprout_set |= {u, v}
    guest = emb.guest
    for sp in guest.sprouts() if isinstance(guest, PrunedGraph) else []:
        kind, where = attachment(emb, sp)
        if sp not in dis_sprout_set:
            if kind == "edge" and where in dis_set:
                res["no-agreement-sprout-on-disagreement"] = False
    order = {e: i for i, e in enumerate(dis)}
    attached_to_some = {e: False for e in dis}
    for e in dis:
        for sp in ag.graph.ends(e):
            kind, where = attachment(emb, sp)
            if kind == "edge" and where in dis_set:
                attached_to_some[e] = True
                if order[where] > order[e]:
                    res["ordered"] = False
    if all(attached_to_some.values()):
        res["first-edge-free"] = False
    return res
