"""Seeded random networks and exhaustive enumerations of small spaces."""

from __future__ import annotations

import random

from .canonical import canonical_key
from .graph import GraphEditor
from .network import ROOT_LABEL, PhyloNetwork, TaxaSet, network_from_maps
from .rearrange import OpKind, OpSet, apply_op, candidate_ops, enumerate_neighbors


def trivial_network(taxon: str) -> PhyloNetwork:
    return network_from_maps({0: ROOT_LABEL, 1: taxon}, {0: (0, 1)})


def random_tree(taxa: TaxaSet, rng: random.Random) -> PhyloNetwork:
    """Grow a tree by attaching leaves one by one onto random edges."""
    labels = {0: ROOT_LABEL, 1: taxa.labels[0]}
    edges = {0: (0, 1)}
    g = PhyloNetwork(labels, edges)
    for lab in taxa.labels[1:]:
        ed = GraphEditor(g)
        e = rng.choice(sorted(g.edges()))
        mid, _ = ed.subdivide(e)
        leaf = ed.fresh_vertex(lab)
        ed.add_edge(mid, leaf)
        g = ed.finish(PhyloNetwork)
    return g


def random_network(taxa: TaxaSet, r: int, seed: int) -> PhyloNetwork:
    """Random valid network on the taxa with exactly r reticulations.

    A random tree is grown first, then r randomly chosen valid raising
    moves are applied. A fixed seed reproduces the result bit-exactly.
    """
    if r < 0:
        raise ValueError("reticulation count must be non-negative")
    rng = random.Random(seed)
    g = random_tree(taxa, rng)
    for _ in range(r):
        plus_ops = [op for op in candidate_ops(g, OpSet.PR) if op.kind is OpKind.PLUS]
        g = apply_op(g, rng.choice(plus_ops))
    return g


def random_walk(g: PhyloNetwork, steps: int, ops: OpSet, seed: int, cap: int | None = None) -> PhyloNetwork:
    """Apply a fixed number of random valid operations, respecting a cap."""
    rng = random.Random(seed)
    cur = g
    for _ in range(steps):
        r = len(cur.reticulations())
        cands = []
        for op in candidate_ops(cur, ops):
            r2 = r + (1 if op.kind is OpKind.PLUS else -1 if op.kind is OpKind.MINUS else 0)
            if cap is not None and r2 > cap:
                continue
            cands.append(op)
        if not cands:
            break
        cur = apply_op(cur, rng.choice(cands))
    return cur


def enumerate_trees(taxa: TaxaSet) -> list[PhyloNetwork]:
    """All rooted binary trees on the taxa, one representative per key."""
    current = [trivial_network(taxa.labels[0])]
    for lab in taxa.labels[1:]:
        nxt: dict[bytes, PhyloNetwork] = {}
        for g in current:
            for e in sorted(g.edges()):
                ed = GraphEditor(g)
                mid, _ = ed.subdivide(e)
                leaf = ed.fresh_vertex(lab)
                ed.add_edge(mid, leaf)
                h = ed.finish(PhyloNetwork)
                nxt.setdefault(canonical_key(h), h)
        current = [nxt[k] for k in sorted(nxt)]
    return current


def enumerate_space(
    taxa: TaxaSet, max_r: int, ops: OpSet = OpSet.PR
) -> dict[bytes, PhyloNetwork]:
    """Closure of the network space with at most max_r reticulations.

    Starts from every tree on the taxa and closes under the operation set
    with the reticulation cap; for the PR and SNPR sets this enumerates
    every network with at most max_r reticulations on the taxa.
    """
    frontier = enumerate_trees(taxa)
    space: dict[bytes, PhyloNetwork] = {canonical_key(g): g for g in frontier}
    while frontier:
        nxt: list[PhyloNetwork] = []
        for g in frontier:
            for _, k, h in enumerate_neighbors(g, ops, cap=max_r):
                if k not in space:
                    space[k] = h
                    nxt.append(h)
        frontier = nxt
    return dict(sorted(space.items()))


def adjacency(
    space: dict[bytes, PhyloNetwork], ops: OpSet, cap: int | None = None
) -> dict[bytes, list[bytes]]:
    """Neighbor keys within an enumerated space, for all-pairs BFS work."""
    adj: dict[bytes, list[bytes]] = {}
    for k, g in space.items():
        adj[k] = [kk for _, kk, _ in enumerate_neighbors(g, ops, cap=cap) if kk in space]
    return adj
