"""Byzantine message strategies.

Each strategy decides, per round, what a faulty node sends on each of its
outgoing edges. Strategies see the whole fault-free state (the failure model
grants full knowledge) and draw randomness only from a stream keyed by
``(seed, round, sender[, recipient])``, so evaluation order never matters.

Available strategies:

``Split``
    The partition-freezing attack: send ``m_minus`` to L, ``M_plus`` to R and
    an in-range value to C. On a graph violating the partition condition this
    pins L at its input ``m`` and R at ``M`` forever.
``Fixed``
    Each faulty node sends one constant to everybody.
``RandomInRange``
    One uniform draw in ``[mu0 - 1, U0 + 1]`` per (round, sender), sent to all
    of the sender's out-neighbours.
``MismatchRandom``
    An independent draw in the same range for every recipient.
"""
from __future__ import annotations

import math
import sys
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import ClassVar, Mapping, Sequence

import numpy as np

from .diagnostics import ConfigError, Diagnostic, error, warning
from .graph import Digraph, PartitionWitness, check_condition, find_witness

__all__ = [
    "ADVERSARIES",
    "Adversary",
    "AdversaryContext",
    "Fixed",
    "MismatchRandom",
    "RandomInRange",
    "Split",
    "SplitArrangementWarning",
    "adversary_from_dict",
    "emit",
    "resolve_split",
    "split_from_witness",
    "split_inputs",
]

_U64 = (1 << 64) - 1


class SplitArrangementWarning(UserWarning):
    """Inputs do not place L strictly below R, so the split attack may not freeze them."""


@dataclass(frozen=True)
class AdversaryContext:
    """What a faulty node knows when choosing round ``t`` messages."""

    t: int
    state: Mapping[int, float]  # fault-free v[t-1]
    graph: Digraph
    f: int
    seed: int
    low: float  # min fault-free input
    high: float  # max fault-free input

    def rng(self, *key: int) -> np.random.Generator:
        return np.random.default_rng([self.seed & _U64, self.t, *key])


def _finite(x: float) -> float:
    x = float(x)
    if math.isnan(x):
        raise ValueError("adversary produced NaN")
    if math.isinf(x):
        return math.copysign(sys.float_info.max, x)
    return x


class Adversary:
    """Base class; subclasses implement :meth:`_emit`."""

    kind: ClassVar[str] = ""

    def emit(self, ctx: AdversaryContext, src: int, dst: int) -> float:
        return _finite(self._emit(ctx, src, dst))

    def _emit(self, ctx: AdversaryContext, src: int, dst: int) -> float:
        raise NotImplementedError

    def diagnostics(self, graph: Digraph, faulty: frozenset, inputs: Sequence[float]) -> list[Diagnostic]:
        return []

    def to_dict(self) -> dict:
        raise NotImplementedError


def emit(adv: Adversary, ctx: AdversaryContext, src: int, dst: int) -> float:
    """Value faulty node ``src`` sends to ``dst`` in round ``ctx.t``."""
    return adv.emit(ctx, src, dst)


@dataclass(frozen=True)
class Split(Adversary):
    L: frozenset
    C: frozenset
    R: frozenset
    m_minus: float
    M_plus: float
    c_value: float | None = None  # defaults to the midpoint of m_minus and M_plus

    kind: ClassVar[str] = "split"

    def __post_init__(self):
        for name in ("L", "C", "R"):
            object.__setattr__(self, name, frozenset(int(x) for x in getattr(self, name)))

    @property
    def center(self) -> float:
        return (self.m_minus + self.M_plus) / 2 if self.c_value is None else self.c_value

    def _emit(self, ctx, src, dst):
        if dst in self.R:
            return self.M_plus
        if dst in self.C:
            return self.center
        # L, and faulty recipients whose messages are never read
        return self.m_minus

    def diagnostics(self, graph, faulty, inputs):
        out = []
        parts = (self.L, self.C, self.R, frozenset(faulty))
        union = frozenset().union(*parts)
        if sum(len(p) for p in parts) != len(union) or union != frozenset(graph.nodes):
            out.append(error("split-partition", "split L/C/R together with the faulty set must partition all nodes"))
            return out
        if not self.L or not self.R:
            out.append(error("split-partition", "split L and R must be non-empty"))
        honest = [inputs[i] for i in graph.nodes if i not in faulty and i < len(inputs)]
        if honest and not self.m_minus < min(honest):
            out.append(warning("split-range", f"m_minus={self.m_minus} is not below every fault-free input"))
        if honest and not self.M_plus > max(honest):
            out.append(warning("split-range", f"M_plus={self.M_plus} is not above every fault-free input"))
        return out

    def to_dict(self):
        d = {
            "kind": self.kind,
            "L": sorted(self.L),
            "C": sorted(self.C),
            "R": sorted(self.R),
            "m_minus": self.m_minus,
            "M_plus": self.M_plus,
        }
        if self.c_value is not None:
            d["c_value"] = self.c_value
        return d


@dataclass(frozen=True)
class Fixed(Adversary):
    values: Mapping[int, float] = field(default_factory=dict)

    kind: ClassVar[str] = "fixed"

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType({int(k): float(v) for k, v in self.values.items()}))

    def _emit(self, ctx, src, dst):
        return self.values[src]

    def diagnostics(self, graph, faulty, inputs):
        missing = sorted(set(faulty) - set(self.values))
        if missing:
            return [error("fixed-values", f"no fixed value configured for faulty nodes {missing}")]
        return []

    def to_dict(self):
        return {"kind": self.kind, "values": {str(k): v for k, v in sorted(self.values.items())}}


@dataclass(frozen=True)
class RandomInRange(Adversary):
    kind: ClassVar[str] = "random"

    def _emit(self, ctx, src, dst):
        return ctx.rng(src).uniform(ctx.low - 1.0, ctx.high + 1.0)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class MismatchRandom(Adversary):
    kind: ClassVar[str] = "mismatch"

    def _emit(self, ctx, src, dst):
        return ctx.rng(src, dst).uniform(ctx.low - 1.0, ctx.high + 1.0)

    def to_dict(self):
        return {"kind": self.kind}


ADVERSARIES = {cls.kind: cls for cls in (Split, Fixed, RandomInRange, MismatchRandom)}


def split_from_witness(w: PartitionWitness, inputs: Sequence[float]) -> Split:
    """Split attack for a violating witness: ``m`` = min input on L, ``M`` = max on R.

    Sends ``m - 1`` to L, ``M + 1`` to R and ``(m + M) / 2`` to C. Warns with
    :class:`SplitArrangementWarning` when L's inputs are not all below R's.
    """
    m = min(inputs[i] for i in w.L)
    M = max(inputs[i] for i in w.R)
    if max(inputs[i] for i in w.L) > min(inputs[i] for i in w.R):
        warnings.warn("some L input exceeds some R input; the split attack presumes L below R", SplitArrangementWarning, stacklevel=2)
    if m >= M:
        warnings.warn(f"m = {m} is not below M = {M}; nothing to keep apart", SplitArrangementWarning, stacklevel=2)
    return Split(w.L, w.C, w.R, m - 1.0, M + 1.0, (m + M) / 2)


def split_inputs(w: PartitionWitness, n: int, m: float = 0.0, M: float = 1.0) -> list[float]:
    """Inputs arranged for the split attack: ``m`` on L and F, ``M`` on R, midpoint on C."""
    mid = (m + M) / 2
    return [M if i in w.R else mid if i in w.C else m for i in range(n)]


def resolve_split(graph: Digraph, f: int, faulty: frozenset | None, *, force: bool = False) -> PartitionWitness:
    """Violating witness for a split attack.

    With ``faulty`` given, the first witness whose F equals it; otherwise the
    first witness overall.
    """
    if faulty is None:
        verdict = check_condition(graph, f, force=force)
        if verdict.satisfied:
            raise ConfigError([error("split-witness", "graph satisfies the condition; no split witness exists")])
        return verdict.witness
    w = find_witness(graph, f, faulty, force=force)
    if w is None:
        raise ConfigError([error("split-witness", f"no violating witness has F = {sorted(faulty)}")])
    return w


def adversary_from_dict(d: Mapping, *, graph: Digraph | None = None, f: int | None = None,
                        faulty: frozenset | None = None, inputs: Sequence[float] | None = None) -> Adversary:
    """Inverse of ``to_dict``; ``{"kind": "split", "from_witness": true}`` needs graph, f, faulty and inputs."""
    kind = d.get("kind")
    if kind not in ADVERSARIES:
        raise ValueError(f"unknown adversary kind {kind!r}; expected one of {sorted(ADVERSARIES)}")
    if kind == "split":
        if d.get("from_witness"):
            if graph is None or f is None or inputs is None:
                raise ValueError("from_witness needs the graph, f, faulty set and inputs")
            return split_from_witness(resolve_split(graph, f, faulty), inputs)
        return Split(d["L"], d.get("C", []), d["R"], float(d["m_minus"]), float(d["M_plus"]),
                     None if d.get("c_value") is None else float(d["c_value"]))
    if kind == "fixed":
        return Fixed(d.get("values", {}))
    return ADVERSARIES[kind]()
