"""Phylogenetic networks and pruned graphs with validation."""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import Digraph

ROOT_LABEL = "rho"

_FORBIDDEN_LABEL_CHARS = set("(),;:#'\" \t\n")


@dataclass(frozen=True)
class TaxaSet:
    """Ordered set of distinct taxon names; the root label is reserved."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("taxa set must be non-empty")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("taxa must be distinct")
        for lab in self.labels:
            if not lab or lab == ROOT_LABEL or set(lab) & _FORBIDDEN_LABEL_CHARS:
                raise ValueError(f"illegal taxon name {lab!r}")
        object.__setattr__(self, "labels", tuple(sorted(self.labels, key=_label_sort_key)))

    @property
    def n(self) -> int:
        return len(self.labels)

    @classmethod
    def of(cls, *labels) -> "TaxaSet":
        return cls(tuple(str(x) for x in labels))

    @classmethod
    def numbered(cls, n: int) -> "TaxaSet":
        return cls(tuple(str(i) for i in range(1, n + 1)))


def _label_sort_key(lab: str):
    return (0, int(lab)) if lab.isdigit() else (1, lab)


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


class PhyloNetwork(Digraph):
    """Rooted binary phylogenetic network; see :func:`validate`."""

    @property
    def taxa(self) -> TaxaSet:
        labs = [lab for lab in self.labels_map.values() if lab is not None and lab != ROOT_LABEL]
        return TaxaSet(tuple(labs))

    def root(self) -> int:
        for v, lab in self.labels_map.items():
            if lab == ROOT_LABEL:
                return v
        raise ValueError("network has no root vertex")

    def leaves(self) -> dict[str, int]:
        return {lab: v for lab, v in self.labeled_vertices().items() if lab != ROOT_LABEL}

    def reticulations(self) -> list[int]:
        return [v for v in self.vertices() if self.in_degree(v) == 2 and self.out_degree(v) == 1]

    def inner_tree_vertices(self) -> list[int]:
        return [
            v
            for v in self.vertices()
            if self.label(v) is None and self.in_degree(v) == 1 and self.out_degree(v) == 2
        ]

    def is_tree(self) -> bool:
        return not self.reticulations()

    def as_pruned(self) -> "PrunedGraph":
        return PrunedGraph(self.labels_map, self.edges_map)


class PrunedGraph(Digraph):
    """Graph obtainable from a network by prunings; may be disconnected."""

    def sprouts(self) -> list[int]:
        return [v for v in self.vertices() if self.label(v) is None and self.degree(v) == 1]

    def t_sprouts(self) -> list[int]:
        return [v for v in self.sprouts() if self.out_degree(v) == 1]

    def h_sprouts(self) -> list[int]:
        return [v for v in self.sprouts() if self.in_degree(v) == 1]

    def single_edge_components(self) -> list[frozenset[int]]:
        """Components that are one directed edge with two unlabeled endpoints."""
        res = []
        for comp in self.components():
            if len(comp) != 2:
                continue
            es = self.component_edges(comp)
            if len(es) == 1 and all(self.label(v) is None for v in comp):
                res.append(comp)
        return res


def reticulation_count(g: PhyloNetwork) -> int:
    """Number of in-degree-2, out-degree-1 vertices."""
    return len(g.reticulations())


def validate(g: Digraph) -> ValidationReport:
    """Check the rooted-binary-network invariants and report violations."""
    bad: list[str] = []
    roots = [v for v, lab in g.labels_map.items() if lab == ROOT_LABEL]
    if len(roots) != 1:
        bad.append(f"root: expected exactly one vertex labeled {ROOT_LABEL}, found {len(roots)}")
    else:
        r = roots[0]
        if g.in_degree(r) != 0 or g.out_degree(r) != 1:
            bad.append(f"degree profile: root {r} must have in-degree 0, out-degree 1")
    taxa_seen: dict[str, int] = {}
    for v in g.vertices():
        lab = g.label(v)
        din, dout = g.in_degree(v), g.out_degree(v)
        if lab == ROOT_LABEL:
            continue
        if lab is not None:
            if lab in taxa_seen:
                bad.append(f"labels: taxon {lab} on vertices {taxa_seen[lab]} and {v}")
            taxa_seen[lab] = v
            if (din, dout) != (1, 0):
                bad.append(f"degree profile: leaf {v} ({lab}) has in/out ({din},{dout}), want (1,0)")
        else:
            if (din, dout) not in ((1, 2), (2, 1)):
                bad.append(
                    f"degree profile: internal vertex {v} has in/out ({din},{dout}),"
                    " want (1,2) or (2,1)"
                )
    if not taxa_seen:
        bad.append("labels: no leaves")
    if not g.is_acyclic():
        bad.append("acyclic: directed cycle present")
    elif roots:
        reach = g.reachable_from(roots[0])
        reach.add(roots[0])
        missing = sorted(set(g.vertices()) - reach)
        if missing:
            bad.append(f"reachability: vertices {missing} unreachable from root")
    return ValidationReport(not bad, bad)


def validate_pruned(g: Digraph) -> ValidationReport:
    """Check the pruned-graph invariants and report violations."""
    bad: list[str] = []
    labeled = [(v, lab) for v, lab in g.labels_map.items() if lab is not None]
    roots = [v for v, lab in labeled if lab == ROOT_LABEL]
    if len(roots) != 1:
        bad.append(f"labels: expected one {ROOT_LABEL}-labeled vertex, found {len(roots)}")
    seen: dict[str, int] = {}
    for v, lab in labeled:
        din, dout = g.in_degree(v), g.out_degree(v)
        if lab in seen:
            bad.append(f"labels: label {lab} on vertices {seen[lab]} and {v}")
        seen[lab] = v
        if lab == ROOT_LABEL:
            if din != 0 or dout > 1:
                bad.append(f"degree profile: root vertex {v} has in/out ({din},{dout})")
        elif din > 1 or dout != 0:
            bad.append(f"degree profile: labeled vertex {v} ({lab}) has in/out ({din},{dout})")
    if len(labeled) < 2:
        bad.append("labels: need a root and at least one taxon")
    allowed = {(1, 0), (0, 1), (0, 2), (2, 0), (1, 2), (2, 1)}
    for v in g.vertices():
        if g.label(v) is not None:
            continue
        prof = (g.in_degree(v), g.out_degree(v))
        if prof not in allowed:
            bad.append(f"degree profile: unlabeled vertex {v} has in/out {prof}")
    if not g.is_acyclic():
        bad.append("acyclic: directed cycle present")
    return ValidationReport(not bad, bad)


def network_from_maps(labels, edges) -> PhyloNetwork:
    """Build a PhyloNetwork and assert validity; for tests and generators."""
    g = PhyloNetwork(labels, edges)
    rep = validate(g)
    if not rep.ok:
        raise ValueError("invalid network: " + "; ".join(rep.violations))
    return g
