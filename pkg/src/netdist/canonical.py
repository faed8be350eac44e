"""Canonical forms and isomorphism tests for labeled directed multigraphs.

Canonical keys are computed by iterative color refinement seeded with
vertex labels and degree profiles, followed by backtracking
individualization on the first non-singleton color class. The key of a
graph is the lexicographically smallest serialization over all complete
refinements, which makes two graphs share a key exactly when a
label-preserving, multiplicity-preserving digraph isomorphism exists.
No use of hash() anywhere, so keys are stable across interpreter runs.
"""

from __future__ import annotations

from .graph import Digraph


def canonical_key(g: Digraph) -> bytes:
    cached = getattr(g, "_key", None)
    if cached is not None:
        return cached
    vs = sorted(g.vertices())
    n = len(vs)
    if n == 0:
        g._key = b"empty"
        return g._key
    idx = {v: i for i, v in enumerate(vs)}
    in_nb: list[list[int]] = [[] for _ in range(n)]
    out_nb: list[list[int]] = [[] for _ in range(n)]
    for u, v in g.edges_map.values():
        out_nb[idx[u]].append(idx[v])
        in_nb[idx[v]].append(idx[u])
    labs = [g.label(v) for v in vs]
    sig0 = [
        (0, labs[i], 0, 0) if labs[i] is not None else (1, "", len(in_nb[i]), len(out_nb[i]))
        for i in range(n)
    ]
    col, _ = _rank(sig0)
    key = _search(labs, in_nb, out_nb, col)
    g._key = key
    return key


def _rank(sigs: list) -> tuple[list[int], int]:
    n = len(sigs)
    order = sorted(range(n), key=sigs.__getitem__)
    col = [0] * n
    c = 0
    prev = sigs[order[0]]
    for i in order:
        if sigs[i] != prev:
            c += 1
            prev = sigs[i]
        col[i] = c
    return col, c + 1


def _refine(in_nb, out_nb, col: list[int]) -> list[int]:
    n = len(col)
    ncol = len(set(col))
    while ncol < n:
        sigs = []
        for i in range(n):
            ins = [col[j] for j in in_nb[i]]
            ins.sort()
            outs = [col[j] for j in out_nb[i]]
            outs.sort()
            sigs.append((col[i], tuple(ins), tuple(outs)))
        col, n2 = _rank(sigs)
        if n2 == ncol:
            break
        ncol = n2
    return col


def _search(labs, in_nb, out_nb, col: list[int]) -> bytes:
    col = _refine(in_nb, out_nb, col)
    n = len(col)
    cells: dict[int, list[int]] = {}
    for i, c in enumerate(col):
        cells.setdefault(c, []).append(i)
    target = None
    for c in sorted(cells):
        if len(cells[c]) > 1:
            target = cells[c]
            break
    if target is None:
        return _serialize(labs, in_nb, out_nb, col)
    best: bytes | None = None
    for i in target:
        col2 = [(c, 1) for c in col]
        col2[i] = (col[i], 0)
        ranked, _ = _rank(col2)
        cand = _search(labs, in_nb, out_nb, ranked)
        if best is None or cand < best:
            best = cand
    assert best is not None
    return best


def _serialize(labs, in_nb, out_nb, col: list[int]) -> bytes:
    n = len(col)
    pos = [0] * n
    for i in range(n):
        pos[i] = col[i]
    labplaced = [""] * n
    for i in range(n):
        labplaced[pos[i]] = labs[i] or ""
    pairs = []
    for i in range(n):
        a = pos[i]
        for j in out_nb[i]:
            pairs.append((a, pos[j]))
    pairs.sort()
    parts = ["L:", ",".join(labplaced), "|E:", ",".join(f"{a}>{b}" for a, b in pairs)]
    return "".join(parts).encode()


def are_isomorphic(g1: Digraph, g2: Digraph) -> bool:
    """Label- and multiplicity-preserving digraph isomorphism, by backtracking.

    Independent of canonical_key on purpose; tests cross-check the two.
    """
    return find_isomorphism(g1, g2) is not None


def find_isomorphism(g1: Digraph, g2: Digraph) -> tuple[dict[int, int], dict[int, int]] | None:
    """An explicit isomorphism as (vertex map, edge map), or None.

    Parallel edges are matched by an arbitrary but deterministic bijection
    between the two same-endpoint bundles.
    """
    if g1.n_vertices != g2.n_vertices or g1.n_edges != g2.n_edges:
        return None
    labs1 = g1.labeled_vertices()
    labs2 = g2.labeled_vertices()
    if set(labs1) != set(labs2):
        return None

    def profile(g, v):
        return (g.in_degree(v), g.out_degree(v), g.label(v))

    prof2: dict[tuple, list[int]] = {}
    for v in g2.vertices():
        prof2.setdefault(profile(g2, v), []).append(v)
    for v in g1.vertices():
        if profile(g1, v) not in prof2:
            return None

    def adj_counts(g, v):
        outs: dict[int, int] = {}
        ins: dict[int, int] = {}
        for e in g.out_edges(v):
            w = g.head(e)
            outs[w] = outs.get(w, 0) + 1
        for e in g.in_edges(v):
            w = g.tail(e)
            ins[w] = ins.get(w, 0) + 1
        return ins, outs

    order = sorted(g1.vertices(), key=lambda v: (g1.label(v) is None, -g1.degree(v), v))
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def consistent(v1, v2) -> bool:
        ins1, outs1 = adj_counts(g1, v1)
        ins2, outs2 = adj_counts(g2, v2)
        for w1, k in outs1.items():
            if w1 in mapping and outs2.get(mapping[w1], 0) != k:
                return False
        for w1, k in ins1.items():
            if w1 in mapping and ins2.get(mapping[w1], 0) != k:
                return False
        return True

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        v1 = order[i]
        for v2 in prof2[profile(g1, v1)]:
            if v2 in used:
                continue
            if not consistent(v1, v2):
                continue
            mapping[v1] = v2
            used.add(v2)
            if extend(i + 1):
                return True
            del mapping[v1]
            used.discard(v2)
        return False

    if not extend(0):
        return None
    # pair up edges between mapped endpoint pairs; parallel bundles match in id order
    bundles: dict[tuple[int, int], list[int]] = {}
    for e in sorted(g2.edges()):
        bundles.setdefault(g2.ends(e), []).append(e)
    emap: dict[int, int] = {}
    for e in sorted(g1.edges()):
        u, v = g1.ends(e)
        pool = bundles.get((mapping[u], mapping[v]))
        if not pool:
            return None
        emap[e] = pool.pop(0)
    return dict(mapping), emap
