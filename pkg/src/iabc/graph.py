"""Directed graphs, the f-absorption relation, propagation and the partition check.

Nodes are 0-based integers ``0..n-1``. Node sets are plain ``frozenset[int]``;
every public function accepts any iterable of ints where a set is expected.

The central question answered here is whether a graph admits a 4-way
partition ``(F, L, C, R)`` of its nodes with ``|F| <= f``, ``L`` and ``R``
non-empty, such that neither ``C | R`` nor ``L | C`` can push ``f + 1``
in-links into a single node of ``L`` (respectively ``R``). Such a partition
is a certificate that no iterative approximate Byzantine consensus algorithm
tolerating ``f`` faults exists on the graph; its absence means the
trimmed-mean iteration in :mod:`iabc.engine` is guaranteed to converge.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from . import kernels

__all__ = [
    "ENUMERATION_GUARD",
    "CheckVerdict",
    "Digraph",
    "EnumerationLimitError",
    "GraphError",
    "GraphFormatError",
    "PartitionWitness",
    "PropagationResult",
    "arrow",
    "check_condition",
    "find_witness",
    "graph_from_dict",
    "graph_to_dict",
    "in_neighbors",
    "in_set",
    "is_violating",
    "iter_witnesses",
    "load_graph",
    "dump_graph",
    "min_in_degree_ok",
    "out_neighbors",
    "propagate",
]

#: Largest n enumerated by :func:`check_condition` without ``force=True``.
ENUMERATION_GUARD = 15

NodeSet = frozenset


class GraphError(ValueError):
    """Domain error: bad node, bad set arguments, or an invalid graph."""


class GraphFormatError(GraphError):
    """Graph file could not be parsed; ``line`` points at the offending text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class EnumerationLimitError(GraphError):
    """Raised when exhaustive witness search is refused for a large graph."""


@dataclass(frozen=True)
class Digraph:
    """A simple directed graph on nodes ``0..n-1``.

    ``edges`` holds ordered pairs ``(src, dst)`` meaning ``src`` can send to
    ``dst``. Self-loops are excluded; every node implicitly hears itself.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool):
            raise GraphError(f"node count must be an int, got {self.n!r}")
        if self.n < 2:
            raise GraphError(f"a graph needs at least 2 nodes, got n={self.n}")
        edges = []
        for e in self.edges:
            src, dst = (int(x) for x in e)
            edges.append((src, dst))
        seen = set()
        for src, dst in edges:
            if not (0 <= src < self.n and 0 <= dst < self.n):
                raise GraphError(f"edge ({src}, {dst}) has an endpoint outside 0..{self.n - 1}")
            if src == dst:
                raise GraphError(f"self-loop ({src}, {dst}) is not allowed")
            if (src, dst) in seen:
                raise GraphError(f"duplicate edge ({src}, {dst})")
            seen.add((src, dst))
        object.__setattr__(self, "edges", frozenset(seen))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Digraph":
        """Build a graph, rejecting duplicates in ``edges`` (a set would hide them)."""
        return cls(n, _EdgeList(edges))

    @cached_property
    def _in_adj(self) -> tuple[frozenset, ...]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for src, dst in self.edges:
            adj[dst].add(src)
        return tuple(frozenset(s) for s in adj)

    @cached_property
    def _out_adj(self) -> tuple[frozenset, ...]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for src, dst in self.edges:
            adj[src].add(dst)
        return tuple(frozenset(s) for s in adj)

    @cached_property
    def in_masks(self) -> tuple[int, ...]:
        """Bitmask of in-neighbours per node (bit ``j`` set iff ``(j, i)`` is an edge)."""
        return tuple(sum(1 << j for j in s) for s in self._in_adj)

    @property
    def nodes(self) -> range:
        return range(self.n)

    def in_neighbors(self, i: int) -> frozenset:
        return self._in_adj[self._node(i)]

    def out_neighbors(self, i: int) -> frozenset:
        return self._out_adj[self._node(i)]

    def in_degree(self, i: int) -> int:
        return len(self.in_neighbors(i))

    def has_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self.edges

    def _node(self, i: int) -> int:
        if not isinstance(i, int) or not 0 <= i < self.n:
            raise GraphError(f"node {i!r} is outside 0..{self.n - 1}")
        return i

    def node_set(self, nodes: Iterable[int]) -> frozenset:
        """Validate and freeze a collection of node ids."""
        return frozenset(self._node(int(i)) for i in nodes)


class _EdgeList(tuple):
    """Edge sequence that keeps duplicates visible to ``Digraph`` validation."""

    def __new__(cls, edges):
        return super().__new__(cls, (tuple(e) for e in edges))


def in_neighbors(g: Digraph, i: int) -> frozenset:
    """Nodes with an edge into ``i``."""
    return g.in_neighbors(i)


def out_neighbors(g: Digraph, i: int) -> frozenset:
    """Nodes that ``i`` has an edge to."""
    return g.out_neighbors(i)


def _pair(g: Digraph, a: Iterable[int], b: Iterable[int]) -> tuple[frozenset, frozenset]:
    a, b = g.node_set(a), g.node_set(b)
    if not a or not b:
        raise GraphError("both node sets must be non-empty")
    if a & b:
        raise GraphError(f"node sets overlap on {sorted(a & b)}")
    return a, b


def _check_f(f: int) -> int:
    if not isinstance(f, int) or f < 0:
        raise GraphError(f"fault bound must be a non-negative int, got {f!r}")
    return f


def in_set(g: Digraph, f: int, a: Iterable[int], b: Iterable[int]) -> frozenset:
    """Nodes of ``b`` that have at least ``f + 1`` in-neighbours inside ``a``.

    Empty exactly when ``arrow(g, f, a, b)`` is false.
    """
    _check_f(f)
    a, b = _pair(g, a, b)
    return frozenset(v for v in b if len(g.in_neighbors(v) & a) > f)


def arrow(g: Digraph, f: int, a: Iterable[int], b: Iterable[int]) -> bool:
    """True iff some node of ``b`` has more than ``f`` in-links from ``a``."""
    _check_f(f)
    a, b = _pair(g, a, b)
    return any(len(g.in_neighbors(v) & a) > f for v in b)


@dataclass(frozen=True)
class PropagationResult:
    """Outcome of greedily growing ``A`` into ``B``.

    ``a_seq[t]`` / ``b_seq[t]`` are the sets after ``t`` absorption steps.
    When ``propagates`` is true the last ``b_seq`` entry is empty and
    ``steps`` is the propagation length. Otherwise the sequences stop at the
    first stalled pair: ``b_seq[-1]`` is non-empty and ``a_seq[-1]`` cannot
    absorb any node of it.
    """

    propagates: bool
    a_seq: tuple[frozenset, ...]
    b_seq: tuple[frozenset, ...]

    @property
    def steps(self) -> int:
        return len(self.a_seq) - 1

    @property
    def stalled_pair(self) -> tuple[frozenset, frozenset] | None:
        if self.propagates:
            return None
        return self.a_seq[-1], self.b_seq[-1]


def propagate(g: Digraph, f: int, a: Iterable[int], b: Iterable[int]) -> PropagationResult:
    """Absorb ``in(A_t => B_t)`` into ``A`` until ``B`` is exhausted or nothing moves."""
    _check_f(f)
    a, b = _pair(g, a, b)
    a_seq, b_seq = [a], [b]
    while b:
        gained = frozenset(v for v in b if len(g.in_neighbors(v) & a) > f)
        if not gained:
            return PropagationResult(False, tuple(a_seq), tuple(b_seq))
        a, b = a | gained, b - gained
        a_seq.append(a)
        b_seq.append(b)
    return PropagationResult(True, tuple(a_seq), tuple(b_seq))


@dataclass(frozen=True)
class PartitionWitness:
    """A candidate ``(F, L, C, R)`` partition of the node set."""

    F: frozenset
    L: frozenset
    C: frozenset
    R: frozenset

    def __post_init__(self):
        for name in "FLCR":
            object.__setattr__(self, name, frozenset(int(x) for x in getattr(self, name)))

    def validate(self, g: Digraph, f: int) -> None:
        parts = (self.F, self.L, self.C, self.R)
        for part in parts:
            g.node_set(part)
        total = sum(len(p) for p in parts)
        union = frozenset().union(*parts)
        if total != len(union):
            raise GraphError("witness sets are not pairwise disjoint")
        if union != frozenset(g.nodes):
            missing = sorted(set(g.nodes) - union)
            raise GraphError(f"witness does not cover nodes {missing}")
        if len(self.F) > f:
            raise GraphError(f"|F| = {len(self.F)} exceeds f = {f}")
        if not self.L or not self.R:
            raise GraphError("L and R must be non-empty")

    def to_dict(self) -> dict:
        return {k: sorted(getattr(self, k)) for k in "FLCR"}

    @classmethod
    def from_dict(cls, d: dict) -> "PartitionWitness":
        return cls(*(d.get(k, []) for k in "FLCR"))


def is_violating(g: Digraph, f: int, w: PartitionWitness) -> bool:
    """True iff neither ``C|R => L`` nor ``L|C => R`` holds for the witness."""
    _check_f(f)
    w.validate(g, f)
    return not arrow(g, f, w.C | w.R, w.L) and not arrow(g, f, w.L | w.C, w.R)


@dataclass(frozen=True)
class CheckVerdict:
    """Result of :func:`check_condition`; ``witness`` is set iff violated."""

    witness: PartitionWitness | None = None

    @property
    def satisfied(self) -> bool:
        return self.witness is None

    def __str__(self) -> str:
        return "SATISFIES" if self.satisfied else "VIOLATED"


def min_in_degree_ok(g: Digraph, f: int) -> bool:
    """Every node has at least ``2f + 1`` in-neighbours (vacuous when ``f == 0``)."""
    _check_f(f)
    return f == 0 or all(g.in_degree(i) >= 2 * f + 1 for i in g.nodes)


def _low_degree_witness(g: Digraph, f: int) -> PartitionWitness | None:
    # L = {i}; split N_i^- into F (ceil half, lowest ids) and H (rest); R = V - F - L.
    for i in g.nodes:
        preds = sorted(g.in_neighbors(i))
        if len(preds) > 2 * f:
            continue
        faulty = frozenset(preds[: (len(preds) + 1) // 2])
        rest = frozenset(g.nodes) - faulty - {i}
        if not rest:
            continue
        w = PartitionWitness(faulty, frozenset({i}), frozenset(), rest)
        if is_violating(g, f, w):
            return w
    return None


def _mask_to_set(mask: int) -> frozenset:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return frozenset(out)


def _fault_sets(n: int, f: int) -> Iterator[tuple[int, ...]]:
    for size in range(min(f, n) + 1):
        yield from combinations(range(n), size)


def _scan(g: Digraph, f: int, faulty: Iterable[int]) -> PartitionWitness | None:
    faulty = frozenset(faulty)
    fmask = sum(1 << v for v in faulty)
    hit = kernels.scan_assignments(g.in_masks, g.n, f, fmask)
    if hit is None:
        return None
    lmask, rmask = hit
    free = (1 << g.n) - 1 & ~fmask
    return PartitionWitness(faulty, _mask_to_set(lmask), _mask_to_set(free & ~lmask & ~rmask), _mask_to_set(rmask))


def _guard(g: Digraph, force: bool) -> None:
    if g.n > ENUMERATION_GUARD and not force:
        raise EnumerationLimitError(
            f"exhaustive check refused for n={g.n} > {ENUMERATION_GUARD}; pass force=True (--force) to override"
        )


def find_witness(g: Digraph, f: int, faulty: Iterable[int], *, force: bool = False) -> PartitionWitness | None:
    """First violating witness (canonical order) whose F is exactly ``faulty``."""
    _check_f(f)
    _guard(g, force)
    faulty = g.node_set(faulty)
    if len(faulty) > f:
        raise GraphError(f"|faulty| = {len(faulty)} exceeds f = {f}")
    return _scan(g, f, faulty)


def iter_witnesses(g: Digraph, f: int) -> Iterator[PartitionWitness]:
    """Every candidate witness in canonical order, violating or not.

    F runs over subsets of size ``0..f`` (by size, then lexicographically).
    For each F the free nodes ``r_0 < r_1 < ...`` receive base-3 digits
    (0 -> L, 1 -> C, 2 -> R) with ``r_0`` the least significant digit;
    assignments with an empty L or R are skipped.
    """
    for faulty in _fault_sets(g.n, f):
        free = [v for v in g.nodes if v not in faulty]
        for x in range(3 ** len(free)):
            parts: tuple[list[int], list[int], list[int]] = ([], [], [])
            for v in free:
                x, d = divmod(x, 3)
                parts[d].append(v)
            if parts[0] and parts[2]:
                yield PartitionWitness(frozenset(faulty), *map(frozenset, parts))


def check_condition(g: Digraph, f: int, *, force: bool = False) -> CheckVerdict:
    """Decide whether ``g`` tolerates ``f`` Byzantine faults.

    Returns a verdict carrying the first violating witness in the order
    documented on :func:`iter_witnesses`. If some node has at most ``2f``
    in-neighbours (``f > 0``), the single-node witness built from that
    node's in-neighbourhood is returned without enumerating.

    Raises:
        EnumerationLimitError: ``g.n`` exceeds :data:`ENUMERATION_GUARD`
            and ``force`` is false.
    """
    _check_f(f)
    _guard(g, force)
    if f > 0 and not min_in_degree_ok(g, f):
        w = _low_degree_witness(g, f)
        if w is not None:
            return CheckVerdict(w)
    for faulty in _fault_sets(g.n, f):
        w = _scan(g, f, faulty)
        if w is not None:
            return CheckVerdict(w)
    return CheckVerdict(None)


# --- JSON ------------------------------------------------------------------

_EDGE_RE = re.compile(r"\[[^\[\]]*\]")


def graph_to_dict(g: Digraph) -> dict:
    return {"n": g.n, "edges": [list(e) for e in sorted(g.edges)]}


def graph_from_dict(d: dict) -> Digraph:
    return load_graph(json.dumps(d))


def dump_graph(g: Digraph) -> str:
    """Graph JSON with one edge per line, so loader errors point at a line."""
    edges = ",\n".join(f"    [{s}, {t}]" for s, t in sorted(g.edges))
    return '{\n  "n": %d,\n  "edges": [\n%s\n  ]\n}\n' % (g.n, edges)


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def load_graph(text: str) -> Digraph:
    """Parse ``{"n": <int>, "edges": [[from, to], ...]}``.

    Errors carry the 1-based line of the offending edge.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict) or "n" not in doc or "edges" not in doc:
        raise GraphFormatError('expected an object with "n" and "edges"', 1)
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        m = re.search(r'"n"\s*:', text)
        raise GraphFormatError(f'"n" must be an integer >= 2, got {n!r}', _line_of(text, m.start()) if m else None)
    raw = doc["edges"]
    if not isinstance(raw, list):
        raise GraphFormatError('"edges" must be a list', None)

    anchor = re.search(r'"edges"\s*:\s*\[', text)
    start = anchor.end() if anchor else 0
    positions = [m.start() for m in _EDGE_RE.finditer(text, start)]

    def where(k: int) -> int | None:
        return _line_of(text, positions[k]) if k < len(positions) else None

    seen: dict[tuple[int, int], int] = {}
    for k, e in enumerate(raw):
        if (
            not isinstance(e, list)
            or len(e) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in e)
        ):
            raise GraphFormatError(f"edge #{k} must be a pair of integers, got {e!r}", where(k))
        src, dst = e
        if not (0 <= src < n and 0 <= dst < n):
            raise GraphFormatError(f"edge #{k} ({src}, {dst}) has an endpoint outside 0..{n - 1}", where(k))
        if src == dst:
            raise GraphFormatError(f"edge #{k} ({src}, {dst}) is a self-loop", where(k))
        if (src, dst) in seen:
            raise GraphFormatError(
                f"edge #{k} ({src}, {dst}) duplicates edge #{seen[(src, dst)]}", where(k)
            )
        seen[(src, dst)] = k
    return Digraph(n, frozenset(seen))
