"""Hypergraph data model, family generators and catalog parsing.

Vertices are 1-indexed in every textual form and 0-indexed inside edge
bitmasks: vertex ``i`` is bit ``i - 1``.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

MAX_RANDOMIZABLE_EDGES = 20


class HypergraphError(ValueError):
    """Malformed hypergraph or catalog text."""


class CapacityError(RuntimeError):
    """Requested computation exceeds the supported size."""


def popcount(x: int) -> int:
    return bin(x).count("1")


def mask_to_vertices(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def vertices_to_mask(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << (v - 1)
    return mask


def _edge_key(mask: int) -> tuple[int, int]:
    return (popcount(mask), mask)


@dataclass(frozen=True)
class Hypergraph:
    """Immutable hypergraph on vertices ``1..n``.

    ``edges`` is stored sorted by (order, bitmask), so two hypergraphs with
    the same edge set compare and hash equal regardless of input order.
    """

    n: int
    edges: tuple[int, ...] = ()
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise HypergraphError(f"vertex count must be a positive integer, got {self.n!r}")
        full = (1 << self.n) - 1
        edges = list(self.edges)
        for e in edges:
            if e <= 0:
                raise HypergraphError("edges must be nonempty")
            if e & ~full:
                raise HypergraphError(
                    f"edge {set(mask_to_vertices(e))} uses a vertex outside 1..{self.n}")
        if len(set(edges)) != len(edges):
            dup = next(e for e, c in Counter(edges).items() if c > 1)
            raise HypergraphError(f"duplicate edge {set(mask_to_vertices(dup))}")
        object.__setattr__(self, "edges", tuple(sorted(edges, key=_edge_key)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]], name: str | None = None) -> "Hypergraph":
        """Build from 1-indexed vertex lists, e.g. ``[(1, 2, 3), (2, 3, 4)]``."""
        masks = []
        for e in edges:
            e = tuple(e)
            if any(v < 1 or v > n for v in e):
                raise HypergraphError(f"edge {e} uses a vertex outside 1..{n}")
            if len(set(e)) != len(e):
                raise HypergraphError(f"edge {e} repeats a vertex")
            masks.append(vertices_to_mask(e))
        return cls(n, tuple(masks), name)

    @property
    def randomizable_edges(self) -> tuple[int, ...]:
        """Edges of order >= 2, in canonical order."""
        return tuple(e for e in self.edges if popcount(e) >= 2)

    @property
    def loops(self) -> tuple[int, ...]:
        return tuple(e for e in self.edges if popcount(e) == 1)

    @property
    def max_order(self) -> int:
        return max((popcount(e) for e in self.edges), default=0)

    def edge_orders(self) -> "EdgeOrderProfile":
        return EdgeOrderProfile(dict(Counter(popcount(e) for e in self.edges)))

    def edge_vertex_sets(self) -> list[tuple[int, ...]]:
        return [mask_to_vertices(e) for e in self.edges]

    def with_edges(self, edges: Iterable[int], name: str | None = None) -> "Hypergraph":
        return Hypergraph(self.n, tuple(edges), name)

    def serialize(self) -> str:
        """Canonical one-line form, ``vertices=4; edges={1,2,3},{2,3,4}``."""
        body = ",".join("{" + ",".join(map(str, mask_to_vertices(e))) + "}" for e in self.edges)
        return f"vertices={self.n}; edges={body}"

    def __str__(self):
        return self.serialize()


@dataclass(frozen=True)
class EdgeOrderProfile:
    counts: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, k: int) -> int:
        return self.counts.get(k, 0)


# -- parsing ----------------------------------------------------------------

_EDGE_RE = re.compile(r"\{([^{}]*)\}")


def _parse_edges(rhs: str, n: int, offset: int = 0) -> list[int]:
    rhs_stripped = rhs.strip()
    if not rhs_stripped:
        return []
    masks: list[int] = []
    pos = 0
    text = rhs
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        m = _EDGE_RE.match(text, pos)
        if m is None:
            raise HypergraphError(f"expected '{{...}}' at column {offset + pos + 1}: {text[pos:pos + 12]!r}")
        items = [s.strip() for s in m.group(1).split(",")]
        if items == [""]:
            raise HypergraphError(f"empty edge at column {offset + pos + 1}")
        verts = []
        for s in items:
            if not s.isdigit():
                raise HypergraphError(f"bad vertex index {s!r} at column {offset + pos + 1}")
            v = int(s)
            if v < 1 or v > n:
                raise HypergraphError(
                    f"vertex {v} out of range 1..{n} at column {offset + pos + 1}")
            if v in verts:
                raise HypergraphError(f"vertex {v} repeated in edge at column {offset + pos + 1}")
            verts.append(v)
        mask = vertices_to_mask(verts)
        if mask in masks:
            raise HypergraphError(
                f"duplicate edge {{{','.join(items)}}} at column {offset + pos + 1}")
        masks.append(mask)
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            return masks
        if text[pos] != ",":
            raise HypergraphError(f"expected ',' between edges at column {offset + pos + 1}")
        pos += 1


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def _parse_fields(pairs: list[tuple[str, str, int]], default_name: str | None = None) -> Hypergraph:
    fields: dict[str, tuple[str, int]] = {}
    for key, value, line_no in pairs:
        if key in fields:
            raise HypergraphError(f"line {line_no}: field {key!r} given twice")
        if key not in ("name", "vertices", "edges"):
            raise HypergraphError(f"line {line_no}: unknown field {key!r}")
        fields[key] = (value, line_no)
    if "vertices" not in fields:
        raise HypergraphError("missing 'vertices=' field")
    vtext, vline = fields["vertices"]
    if not vtext.strip().isdigit() or int(vtext) < 1:
        raise HypergraphError(f"line {vline}: vertices must be a positive integer, got {vtext.strip()!r}")
    n = int(vtext)
    edges: list[int] = []
    if "edges" in fields:
        etext, eline = fields["edges"]
        try:
            edges = _parse_edges(etext, n)
        except HypergraphError as exc:
            raise HypergraphError(f"line {eline}: {exc}") from None
    name = fields["name"][0].strip() if "name" in fields else default_name
    return Hypergraph(n, tuple(edges), name or None)


def _split_assignments(chunk: str, line_no: int) -> list[tuple[str, str, int]]:
    # ';' separates fields on a line; braces never contain ';'
    out = []
    for part in chunk.split(";"):
        if not part.strip():
            continue
        if "=" not in part:
            raise HypergraphError(f"line {line_no}: expected key=value, got {part.strip()!r}")
        key, value = part.split("=", 1)
        out.append((key.strip(), value, line_no))
    return out


def parse_hypergraph(text: str) -> Hypergraph:
    """Parse one catalog entry (single- or multi-line)."""
    pairs: list[tuple[str, str, int]] = []
    for line_no, line in enumerate(text.splitlines() or [text], start=1):
        line = _strip_comment(line)
        if line.strip():
            pairs.extend(_split_assignments(line, line_no))
    return _parse_fields(pairs)


def parse_catalog(text: str) -> list[Hypergraph]:
    """Parse a catalog: blank-line separated records of name/vertices/edges."""
    records: list[Hypergraph] = []
    block: list[tuple[str, str, int]] = []
    names: set[str] = set()

    def flush():
        if not block:
            return
        first = block[0][2]
        try:
            h = _parse_fields(block)
        except HypergraphError as exc:
            raise HypergraphError(f"record starting at line {first}: {exc}") from None
        if h.name is not None:
            if h.name in names:
                raise HypergraphError(f"record starting at line {first}: duplicate name {h.name!r}")
            names.add(h.name)
        records.append(h)
        block.clear()

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            # a comment-only line does not end a record
            if not raw.strip():
                flush()
            continue
        block.extend(_split_assignments(line, line_no))
    flush()
    return records


def serialize_catalog(hypergraphs: Iterable[Hypergraph]) -> str:
    blocks = []
    for h in hypergraphs:
        lines = []
        if h.name:
            lines.append(f"name={h.name}")
        lines.append(f"vertices={h.n}")
        lines.append("edges=" + h.serialize().split("edges=", 1)[1])
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# -- enumeration ------------------------------------------------------------

def check_randomizable(h: Hypergraph) -> int:
    m = len(h.randomizable_edges)
    if m > MAX_RANDOMIZABLE_EDGES:
        raise CapacityError(
            f"{m} randomizable edges exceed the cap of {MAX_RANDOMIZABLE_EDGES}")
    return m


def spanning_subhypergraphs(h: Hypergraph) -> Iterator[Hypergraph]:
    """All partial hypergraphs of ``h`` obtained by deleting edges of order >= 2.

    Subset bit ``j`` keeps the ``j``-th randomizable edge; subsets are visited
    in ascending bitmask order, so subset 0 is the edgeless (loops-only) state
    and the last one is ``h`` itself.
    """
    check_randomizable(h)
    rand = h.randomizable_edges
    loops = h.loops
    for subset in range(1 << len(rand)):
        kept = tuple(e for j, e in enumerate(rand) if subset >> j & 1)
        yield Hypergraph(h.n, loops + kept)


# -- families ---------------------------------------------------------------

def clover(n: int) -> Hypergraph:
    """Wheel of order-3 petals: center ``n`` joined to consecutive rim pairs."""
    if n < 3:
        raise HypergraphError(f"clover needs n >= 3, got {n}")
    center = n
    rim = n - 1
    edges = {
        vertices_to_mask((center, i, (i % rim) + 1))
        for i in range(1, rim + 1)
    }
    return Hypergraph(n, tuple(edges), f"Cl_{n}")


def flower(n: int) -> Hypergraph:
    """Disjoint order-3 petals ``{2j-1, 2j, n}`` sharing only the center ``n``."""
    if n < 3 or n % 2 == 0:
        raise HypergraphError(f"flower needs odd n >= 3, got {n}")
    edges = [vertices_to_mask((2 * j - 1, 2 * j, n)) for j in range(1, (n - 1) // 2 + 1)]
    return Hypergraph(n, tuple(edges), f"Fl_{n}")


def _complete_uniform(k: int, n: int) -> Hypergraph:
    from itertools import combinations
    if k < 1 or k > n:
        raise HypergraphError(f"complete-{k}-uniform needs 1 <= k <= n, got n={n}")
    edges = [vertices_to_mask(c) for c in combinations(range(1, n + 1), k)]
    return Hypergraph(n, tuple(edges), f"K{k}_{n}")


def _star(n: int) -> Hypergraph:
    if n < 2:
        raise HypergraphError(f"star needs n >= 2, got {n}")
    return Hypergraph(n, tuple(vertices_to_mask((1, j)) for j in range(2, n + 1)), f"star_{n}")


def _single_edge(n: int) -> Hypergraph:
    if n < 1:
        raise HypergraphError(f"single-edge needs n >= 1, got {n}")
    return Hypergraph(n, ((1 << n) - 1,), f"single_edge_{n}")


def _edgeless(n: int) -> Hypergraph:
    return Hypergraph(n, (), f"empty_{n}")


FAMILIES = ("clover", "flower", "star", "single-edge", "edgeless", "complete-k-uniform")

_UNIFORM_RE = re.compile(r"complete-(\d+)-uniform$")


def family(name: str, n: int) -> Hypergraph:
    """Look up a generator by name; ``complete-<k>-uniform`` takes any k."""
    simple = {
        "clover": clover,
        "flower": flower,
        "star": _star,
        "single-edge": _single_edge,
        "edgeless": _edgeless,
    }
    if name in simple:
        return simple[name](n)
    m = _UNIFORM_RE.match(name)
    if m:
        return _complete_uniform(int(m.group(1)), n)
    raise HypergraphError(f"unknown family {name!r}; known: {', '.join(FAMILIES)}")
