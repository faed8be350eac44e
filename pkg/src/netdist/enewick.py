"""Extended-Newick parsing and writing, plus DOT export.

Dialect: one network per line, terminated by ';'. A reticulation is
written as ``(subtree)#H<k>`` where its single child lives, and as a bare
``#H<k>`` under its other parent; the two occurrences may come in either
textual order. Internal vertex names and branch lengths are rejected, not
ignored. The root is implicit in text: the top-level node of the string
becomes the unique child of the in-memory root vertex.
"""

from __future__ import annotations

from .errors import ParseError
from .graph import Digraph
from .network import ROOT_LABEL, PhyloNetwork, validate

_NAME_STOP = set("(),;:#'\" \t\r\n")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.labels: dict[int, str | None] = {0: ROOT_LABEL}
        self.edges: dict[int, tuple[int, int]] = {}
        self.next_v = 1
        self.next_e = 0
        self.hybrid_def: dict[str, tuple[int, int]] = {}  # tag -> (vertex, position)
        self.hybrid_ref: dict[str, list[int]] = {}  # tag -> positions
        self.hybrid_vertex: dict[str, int] = {}
        self.leaf_pos: dict[str, int] = {}

    def error(self, msg: str, pos: int | None = None):
        raise ParseError(msg, self.pos if pos is None else pos)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        c = self.peek()
        self.pos += 1
        return c

    def skip_ws(self):
        while self.peek() in " \t\r\n" and self.peek():
            self.pos += 1

    def new_vertex(self, label: str | None) -> int:
        v = self.next_v
        self.next_v += 1
        self.labels[v] = label
        return v

    def add_edge(self, u: int, v: int) -> None:
        self.edges[self.next_e] = (u, v)
        self.next_e += 1

    def parse_line(self) -> PhyloNetwork:
        self.skip_ws()
        if not self.peek():
            self.error("empty input")
        top = self.parse_subtree()
        self.skip_ws()
        if self.peek() != ";":
            self.error("expected ';'")
        self.take()
        self.skip_ws()
        if self.peek():
            self.error("trailing characters after ';'")
        self.add_edge(0, top)
        return self.finish()

    def parse_subtree(self) -> int:
        self.skip_ws()
        c = self.peek()
        if c == "(":
            return self.parse_group()
        if c == "#":
            return self.parse_hybrid_ref()
        return self.parse_leaf()

    def parse_group(self) -> int:
        open_pos = self.pos
        self.take()  # '('
        first = self.parse_subtree()
        self.skip_ws()
        if self.peek() == ",":
            self.take()
            second = self.parse_subtree()
            self.skip_ws()
            if self.peek() != ")":
                self.error("expected ')'")
            self.take()
            self.check_no_decoration()
            v = self.new_vertex(None)
            self.add_edge(v, first)
            self.add_edge(v, second)
            return v
        if self.peek() != ")":
            self.error("expected ',' or ')'")
        self.take()
        self.skip_ws()
        if self.peek() != "#":
            self.error("internal vertex with a single child must carry a hybrid tag", open_pos)
        tag_pos = self.pos
        tag = self.parse_tag()
        self.check_no_decoration()
        if tag in self.hybrid_def:
            self.error(f"hybrid tag #{tag} defined twice", tag_pos)
        v = self.hybrid_vertex.get(tag)
        if v is None:
            v = self.new_vertex(None)
            self.hybrid_vertex[tag] = v
        self.hybrid_def[tag] = (v, tag_pos)
        self.add_edge(v, first)
        return v

    def parse_hybrid_ref(self) -> int:
        tag_pos = self.pos
        tag = self.parse_tag()
        self.check_no_decoration()
        self.hybrid_ref.setdefault(tag, []).append(tag_pos)
        v = self.hybrid_vertex.get(tag)
        if v is None:
            v = self.new_vertex(None)
            self.hybrid_vertex[tag] = v
        return v

    def parse_tag(self) -> str:
        self.take()  # '#'
        if self.peek() != "H":
            self.error("hybrid tag must look like #H<number>")
        self.take()
        digits = ""
        while self.peek().isdigit():
            digits += self.take()
        if not digits:
            self.error("hybrid tag must look like #H<number>")
        return "H" + digits

    def parse_leaf(self) -> int:
        start = self.pos
        name = ""
        while self.peek() and self.peek() not in _NAME_STOP:
            name += self.take()
        if not name:
            self.error("expected a taxon name")
        if self.peek() == ":":
            self.error("branch lengths are not supported")
        if name == ROOT_LABEL:
            self.error(f"taxon name {ROOT_LABEL!r} is reserved for the root", start)
        if name in self.leaf_pos:
            self.error(f"duplicate taxon {name}", start)
        self.leaf_pos[name] = start
        return self.new_vertex(name)

    def check_no_decoration(self):
        if self.peek() == ":":
            self.error("branch lengths are not supported")
        if self.peek() and self.peek() not in "(),;# \t\r\n":
            self.error("internal vertex names are not supported")

    def finish(self) -> PhyloNetwork:
        for tag, refs in self.hybrid_ref.items():
            if tag not in self.hybrid_def:
                self.error(f"hybrid tag #{tag} referenced but never defined", refs[0])
        for tag, (v, pos) in self.hybrid_def.items():
            refs = self.hybrid_ref.get(tag, [])
            if len(refs) != 1:
                self.error(
                    f"hybrid tag #{tag} must occur exactly twice (one definition, one reference)",
                    pos,
                )
        g = PhyloNetwork(self.labels, self.edges)
        report = validate(g)
        if not report.ok:
            self.error("invalid network: " + "; ".join(report.violations), 0)
        return g


def parse_enewick(line: str, taxa: "set[str] | None" = None) -> PhyloNetwork:
    """Parse one eNewick line into a network; errors carry text offsets."""
    g = _Parser(line).parse_line()
    if taxa is not None:
        labs = {lab for lab in g.labels_map.values() if lab is not None and lab != ROOT_LABEL}
        unknown = labs - set(taxa)
        missing = set(taxa) - labs
        if unknown or missing:
            raise ParseError(
                f"taxa mismatch: unknown {sorted(unknown)}, missing {sorted(missing)}", 0
            )
    return g


def parse_enewick_document(text: str) -> list[PhyloNetwork]:
    """Parse a document: one network per line, '#' at line start comments."""
    out = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        out.append(parse_enewick(stripped))
    return out


def _signatures(g: PhyloNetwork) -> dict[int, tuple]:
    sig: dict[int, tuple] = {}
    order = g._topo_order()
    assert order is not None
    for v in reversed(order):
        lab = g.label(v)
        if lab is not None and lab != ROOT_LABEL:
            sig[v] = ("leaf", lab)
        elif g.out_degree(v) == 1 and g.in_degree(v) == 2:
            sig[v] = ("ret", sig[g.head(g.out_edges(v)[0])])
        else:
            kids = sorted(sig[g.head(e)] for e in g.out_edges(v))
            sig[v] = ("tree", tuple(kids))
    return sig


def write_enewick(g: PhyloNetwork) -> str:
    """Serialize a network; children are ordered by canonical subtree keys."""
    sig = _signatures(g)
    tags: dict[int, int] = {}

    def render(v: int) -> str:
        lab = g.label(v)
        if lab is not None and lab != ROOT_LABEL:
            return lab
        if g.in_degree(v) == 2 and g.out_degree(v) == 1:
            if v in tags:
                return f"#H{tags[v]}"
            tags[v] = len(tags) + 1
            child = g.head(g.out_edges(v)[0])
            return f"({render(child)})#H{tags[v]}"
        kids = [g.head(e) for e in g.out_edges(v)]
        kids.sort(key=lambda w: (sig[w], w))
        return "(" + ",".join(render(w) for w in kids) + ")"

    root = g.root()
    top = g.head(g.out_edges(root)[0])
    return render(top) + ";"


def export_dot(g: Digraph) -> str:
    """Graphviz DOT for a network or pruned graph; reticulations are boxes."""
    lines = ["digraph G {"]
    for v in sorted(g.vertices()):
        lab = g.label(v)
        din, dout = g.in_degree(v), g.out_degree(v)
        if lab is not None:
            shape = "house" if lab == ROOT_LABEL else "ellipse"
            lines.append(f'  v{v} [label="{lab}", shape={shape}];')
        elif din == 2 and dout == 1:
            lines.append(f'  v{v} [label="", shape=box];')
        else:
            lines.append(f'  v{v} [label="", shape=point];')
    for e in sorted(g.edges()):
        u, v = g.ends(e)
        lines.append(f"  v{u} -> v{v} [label=\"e{e}\"];")
    lines.append("}")
    return "\n".join(lines)
