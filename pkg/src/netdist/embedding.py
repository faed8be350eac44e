"""Agreement embeddings: verification, exhaustive search, and re-splicing.

An agreement embedding maps every guest edge to a directed host path and
every guest vertex to a host vertex such that the paths are pairwise
edge-disjoint, together cover every host edge, labels correspond
bijectively, and at most two guest vertices share a host vertex (then one
is a sprout and the other an isolated labeled vertex or a degree-two
remnant).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmbeddingError
from .graph import Digraph
from .network import ValidationReport


@dataclass
class AgreementEmbedding:
    host: Digraph
    guest: Digraph
    vertex_map: dict[int, int]
    edge_map: dict[int, list[int]]

    def copy(self) -> "AgreementEmbedding":
        return AgreementEmbedding(
            self.host,
            self.guest,
            dict(self.vertex_map),
            {e: list(p) for e, p in self.edge_map.items()},
        )

    def guests_at(self, w: int) -> list[int]:
        return sorted(gv for gv, hv in self.vertex_map.items() if hv == w)

    def path_internal_vertices(self, ge: int) -> list[int]:
        path = self.edge_map[ge]
        return [self.host.head(e) for e in path[:-1]]

    def to_json(self) -> dict:
        return {
            "vertex_map": {str(k): v for k, v in sorted(self.vertex_map.items())},
            "edge_map": {str(k): list(p) for k, p in sorted(self.edge_map.items())},
        }


def _is_sprout(g: Digraph, v: int) -> bool:
    return g.label(v) is None and g.degree(v) == 1


def _is_remnant_or_isolated(g: Digraph, v: int) -> bool:
    if g.label(v) is not None:
        return g.degree(v) == 0
    din, dout = g.in_degree(v), g.out_degree(v)
    return (din, dout) in ((2, 0), (0, 2))


def verify_agreement_embedding(emb: AgreementEmbedding) -> ValidationReport:
    """Check all agreement-embedding properties; violations are itemized."""
    host, guest = emb.host, emb.guest
    bad: list[str] = []
    for gv in guest.vertices():
        if gv not in emb.vertex_map:
            bad.append(f"vertex map: guest vertex {gv} unmapped")
        elif not host.has_vertex(emb.vertex_map[gv]):
            bad.append(f"vertex map: guest vertex {gv} mapped to unknown host vertex")
    if bad:
        return ValidationReport(False, bad)
    for ge in guest.edges():
        path = emb.edge_map.get(ge)
        if not path:
            bad.append(f"paths: guest edge {ge} has no path")
            continue
        if any(not host.has_edge(e) for e in path):
            bad.append(f"paths: guest edge {ge} uses unknown host edges")
            continue
        for a, b in zip(path, path[1:]):
            if host.head(a) != host.tail(b):
                bad.append(f"paths: path of guest edge {ge} is not a directed path")
                break
        gt, gh = guest.ends(ge)
        if host.tail(path[0]) != emb.vertex_map[gt]:
            bad.append(f"endpoints: path of {ge} starts off the image of its tail")
        if host.head(path[-1]) != emb.vertex_map[gh]:
            bad.append(f"endpoints: path of {ge} ends off the image of its head")
    used: dict[int, int] = {}
    for ge in guest.edges():
        for e in emb.edge_map.get(ge, []):
            used[e] = used.get(e, 0) + 1
    for e, k in used.items():
        if k > 1:
            bad.append(f"cover: host edge {e} used by {k} paths, want pairwise edge-disjoint")
    uncovered = sorted(set(host.edges()) - set(used))
    if uncovered:
        bad.append(f"cover: host edges {uncovered} not covered")
    at: dict[int, list[int]] = {}
    for gv, hv in emb.vertex_map.items():
        at.setdefault(hv, []).append(gv)
    for hv, gvs in sorted(at.items()):
        if len(gvs) > 2:
            bad.append(f"collision: host vertex {hv} receives {sorted(gvs)}")
        elif len(gvs) == 2:
            a, b = gvs
            ok = (_is_sprout(guest, a) and _is_remnant_or_isolated(guest, b)) or (
                _is_sprout(guest, b) and _is_remnant_or_isolated(guest, a)
            )
            if not ok:
                bad.append(
                    f"collision: host vertex {hv} receives {sorted(gvs)},"
                    " want one sprout plus one isolated labeled or degree-two remnant"
                )
    glab = guest.labeled_vertices()
    for lab, hv in host.labeled_vertices().items():
        gv = glab.get(lab)
        if gv is None:
            bad.append(f"labels: host label {lab} missing from guest")
        elif emb.vertex_map[gv] != hv:
            bad.append(f"labels: guest vertex labeled {lab} not mapped to its host twin")
    for lab in glab:
        if lab not in host.labeled_vertices():
            bad.append(f"labels: guest label {lab} absent from host")
    return ValidationReport(not bad, bad)


def find_agreement_embedding(guest: Digraph, host: Digraph) -> AgreementEmbedding | None:
    """Exhaustive backtracking search for an agreement embedding.

    Labeled guest vertices are anchored to their host twins up front; guest
    edges touching placed vertices are extended by depth-first path
    enumeration over unused host edges, and unanchored components fall back
    to branching over tail placements. Complete: returns None only when no
    embedding exists.
    """
    glab = guest.labeled_vertices()
    hlab = host.labeled_vertices()
    if set(glab) != set(hlab):
        return None
    if guest.n_edges > host.n_edges:
        return None
    for v in guest.vertices():
        if guest.label(v) is None and guest.degree(v) == 0:
            return None

    vmap: dict[int, int] = {glab[lab]: hlab[lab] for lab in glab}
    occupants: dict[int, list[int]] = {}
    for gv, hv in vmap.items():
        occupants.setdefault(hv, []).append(gv)
    emap: dict[int, list[int]] = {}
    used: set[int] = set()
    all_edges = sorted(guest.edges())
    n_host_edges = host.n_edges

    def may_share(a: int, b: int) -> bool:
        return (_is_sprout(guest, a) and _is_remnant_or_isolated(guest, b)) or (
            _is_sprout(guest, b) and _is_remnant_or_isolated(guest, a)
        )

    def may_place(gv: int, w: int) -> bool:
        if guest.in_degree(gv) > host.in_degree(w) or guest.out_degree(gv) > host.out_degree(w):
            return False
        occ = occupants.get(w, [])
        if len(occ) >= 2:
            return False
        if occ and not may_share(occ[0], gv):
            return False
        return True

    def place(gv: int, w: int):
        vmap[gv] = w
        occupants.setdefault(w, []).append(gv)

    def unplace(gv: int):
        w = vmap.pop(gv)
        occupants[w].remove(gv)

    def paths_forward(u: int, gh: int):
        """Yield (path, endpoint) pairs for guest head gh, walking from u.

        The host is acyclic so a single path can never repeat an edge; the
        generator therefore only reads ``used`` and leaves all reservation
        bookkeeping to the caller.
        """
        target = vmap.get(gh)
        fixed = gh in vmap
        path: list[int] = []

        def walk(x: int):
            for e in host.out_edges(x):
                if e in used:
                    continue
                w = host.head(e)
                path.append(e)
                if fixed:
                    if w == target:
                        yield list(path), w
                        path.pop()
                        continue
                elif may_place(gh, w):
                    yield list(path), w
                yield from walk(w)
                path.pop()

        yield from walk(u)

    def paths_backward(w: int, gt: int):
        """Yield (path, startpoint) pairs for unplaced guest tail gt, ending at w."""
        path: list[int] = []

        def walk(x: int):
            for e in host.in_edges(x):
                if e in used:
                    continue
                u = host.tail(e)
                path.insert(0, e)
                if may_place(gt, u):
                    yield list(path), u
                yield from walk(u)
                path.pop(0)

        yield from walk(w)

    def pick_edge(remaining: list[int]) -> tuple[int, bool]:
        for ge in remaining:
            if guest.tail(ge) in vmap:
                return ge, True
            if guest.head(ge) in vmap:
                return ge, False
        return remaining[0], True

    def search(remaining: list[int]) -> bool:
        if not remaining:
            return len(used) == n_host_edges
        if len(remaining) > n_host_edges - len(used):
            return False
        ge, forward = pick_edge(remaining)
        gt, gh = guest.ends(ge)
        rest = [x for x in remaining if x != ge]
        if gt not in vmap and gh not in vmap:
            # unanchored component: branch over tail placements; labeled guest
            # vertices are pre-anchored, so gt is always unlabeled here
            for w in sorted(host.vertices()):
                if not may_place(gt, w):
                    continue
                place(gt, w)
                if search(remaining):
                    return True
                unplace(gt)
            return False
        if forward:
            u = vmap[gt]
            for path, endpoint in paths_forward(u, gh):
                newly = gh not in vmap
                if newly:
                    place(gh, endpoint)
                for e in path:
                    used.add(e)
                emap[ge] = path
                if search(rest):
                    return True
                del emap[ge]
                for e in path:
                    used.discard(e)
                if newly:
                    unplace(gh)
            return False
        w = vmap[gh]
        for path, startpoint in paths_backward(w, gt):
            newly = gt not in vmap
            if newly:
                place(gt, startpoint)
            for e in path:
                used.add(e)
            emap[ge] = path
            if search(rest):
                return True
            del emap[ge]
            for e in path:
                used.discard(e)
            if newly:
                unplace(gt)
        return False

    if not search(all_edges):
        return None
    emb = AgreementEmbedding(host, guest, dict(vmap), {e: list(p) for e, p in emap.items()})
    report = verify_agreement_embedding(emb)
    assert report.ok, "search produced an invalid embedding: " + "; ".join(report.violations)
    return emb


def sprout_orientation(g: Digraph, v: int) -> str:
    if not _is_sprout(g, v):
        raise EmbeddingError(f"vertex {v} is not a sprout")
    return "t" if g.out_degree(v) == 1 else "h"


def incident_edge(g: Digraph, v: int) -> int:
    es = g.out_edges(v) or g.in_edges(v)
    return es[0]


def attachment(emb: AgreementEmbedding, sprout: int) -> tuple[str, int]:
    """Where a sprout sits: ("vertex", guest vertex) or ("edge", guest edge).

    A sprout is attached to a guest vertex when both map to the same host
    vertex, and to a guest edge when its image is an internal vertex of
    that edge's path.
    """
    w = emb.vertex_map[sprout]
    for gv in emb.guests_at(w):
        if gv != sprout:
            return ("vertex", gv)
    own = incident_edge(emb.guest, sprout)
    for ge, path in sorted(emb.edge_map.items()):
        if ge == own:
            continue
        for e in path[:-1]:
            if emb.host.head(e) == w:
                return ("edge", ge)
    raise EmbeddingError(f"sprout {sprout} has no attachment; embedding inconsistent")


def embedding_change(emb: AgreementEmbedding, u: int, v: int) -> AgreementEmbedding:
    """Re-splice the paths of two same-orientation sprouts u and v.

    Requires u to be attached to v's incident edge. For t-sprouts the edge
    of u absorbs the host prefix of v's path up to u's image, and v's path
    shrinks to the suffix; h-sprouts are symmetric. The images of u and v
    swap accordingly.
    """
    guest = emb.guest
    ou = sprout_orientation(guest, u)
    ov = sprout_orientation(guest, v)
    if ou != ov:
        raise EmbeddingError("embedding change requires sprouts of the same orientation")
    eu = incident_edge(guest, u)
    ev = incident_edge(guest, v)
    if eu == ev:
        raise EmbeddingError("sprouts share their incident edge")
    kind, where = attachment(emb, u)
    if kind != "edge" or where != ev:
        raise EmbeddingError(f"sprout {u} is not attached to the edge of sprout {v}")
    out = emb.copy()
    pu = out.edge_map[eu]
    pv = out.edge_map[ev]
    w = emb.vertex_map[u]
    host = emb.host
    cut = None
    for i, e in enumerate(pv[:-1]):
        if host.head(e) == w:
            cut = i + 1
            break
    assert cut is not None
    if ou == "t":
        out.edge_map[eu] = pv[:cut] + pu
        out.edge_map[ev] = pv[cut:]
        out.vertex_map[u] = emb.vertex_map[v]
        out.vertex_map[v] = w
    else:
        out.edge_map[eu] = pu + pv[cut:]
        out.edge_map[ev] = pv[:cut]
        out.vertex_map[u] = emb.vertex_map[v]
        out.vertex_map[v] = w
    return out
