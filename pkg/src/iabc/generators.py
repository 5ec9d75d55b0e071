"""Topology constructors: complete graphs, chord rings, hypercubes and core networks.

"Chord" here is the circulant digraph where node ``i`` links to the next
``2f + 1`` nodes around the ring. It is named after, but is not the same as,
the Chord DHT overlay.
"""
from __future__ import annotations

from .graph import Digraph, GraphError

__all__ = ["GENERATORS", "chord", "complete", "core_network", "hypercube"]


def _require_ring(n: int, f: int) -> None:
    if f < 1:
        raise GraphError(f"f must be >= 1, got {f}")
    if n <= 3 * f:
        raise GraphError(f"need n > 3f, got n={n}, f={f}")


def complete(n: int) -> Digraph:
    """All ``n * (n - 1)`` directed edges."""
    if n < 2:
        raise GraphError(f"complete graph needs n >= 2, got {n}")
    return Digraph(n, frozenset((i, j) for i in range(n) for j in range(n) if i != j))


def chord(n: int, f: int) -> Digraph:
    """Edges ``(i, (i + k) mod n)`` for ``k = 1..2f+1``; in- and out-degree ``2f + 1``."""
    _require_ring(n, f)
    return Digraph(n, frozenset((i, (i + k) % n) for i in range(n) for k in range(1, 2 * f + 2)))


def hypercube(d: int) -> Digraph:
    """The ``d``-dimensional binary cube with both directions on every link."""
    if d < 1:
        raise GraphError(f"hypercube dimension must be >= 1, got {d}")
    n = 1 << d
    return Digraph(n, frozenset((i, i ^ (1 << b)) for i in range(n) for b in range(d)))


def core_network(n: int, f: int) -> Digraph:
    """Clique on ``K = {0..2f}`` plus bidirectional links from every other node to all of K.

    Nodes outside K are not linked to one another.
    """
    _require_ring(n, f)
    core = range(2 * f + 1)
    edges = {(i, j) for i in core for j in core if i != j}
    for v in range(2 * f + 1, n):
        for u in core:
            edges.add((v, u))
            edges.add((u, v))
    return Digraph(n, frozenset(edges))


GENERATORS = {
    "complete": complete,
    "chord": chord,
    "hypercube": hypercube,
    "core": core_network,
}
