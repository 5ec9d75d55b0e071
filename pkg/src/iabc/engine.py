"""Synchronous-round executor for the trimmed-mean consensus iteration.

Every round, each fault-free node sends its state to its out-neighbours,
faulty nodes send whatever the adversary chooses (possibly a different value
per recipient), and each fault-free node drops the ``f`` smallest and ``f``
largest received values and averages the survivors with its own state.

Faulty nodes carry no state of their own; they exist only as message sources.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

from .adversaries import Adversary, AdversaryContext, adversary_from_dict
from .diagnostics import ConfigError, Diagnostic, error, warning
from .graph import ENUMERATION_GUARD, Digraph, check_condition, graph_from_dict, graph_to_dict

__all__ = [
    "RoundRecord",
    "SimConfig",
    "Trace",
    "TRACE_FORMAT",
    "run",
    "update_value",
    "validate_config",
]

log = logging.getLogger(__name__)

TRACE_FORMAT = "iabc-trace/1"


def update_value(own: float, received: Sequence[tuple[int, float]], f: int) -> tuple[float, frozenset]:
    """One trimmed-mean step.

    ``received`` holds ``(sender, value)`` pairs. Values are ordered by
    ``(value, sender)``; the first ``f`` and last ``f`` are dropped, and the
    result is the plain mean of ``own`` and the survivors, summed own-first
    and then by ascending sender id.

    Returns ``(new_value, kept_senders)``.
    """
    if f < 0:
        raise ValueError(f"f must be >= 0, got {f}")
    if len(received) < 2 * f:
        raise ValueError(f"cannot trim 2f={2 * f} values from {len(received)} received")
    if not math.isfinite(own) or not all(math.isfinite(v) for _, v in received):
        raise ValueError("non-finite value in update")
    ordered = sorted(received, key=lambda p: (p[1], p[0]))
    survivors = sorted(ordered[f : len(ordered) - f])
    total = own
    lo = hi = own
    for _, v in survivors:
        total += v
        lo = min(lo, v)
        hi = max(hi, v)
    # the clamp only absorbs rounding; a convex combination never leaves [lo, hi]
    new = min(max(total / (len(survivors) + 1), lo), hi)
    return new, frozenset(s for s, _ in survivors)


@dataclass(frozen=True)
class SimConfig:
    graph: Digraph
    f: int
    faulty: frozenset
    inputs: tuple
    adversary: Adversary
    max_rounds: int = 1000
    epsilon: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "faulty", frozenset(int(i) for i in self.faulty))
        object.__setattr__(self, "inputs", tuple(float(x) for x in self.inputs))

    @property
    def honest(self) -> tuple[int, ...]:
        return tuple(i for i in self.graph.nodes if i not in self.faulty)

    def to_dict(self) -> dict:
        return {
            "graph": graph_to_dict(self.graph),
            "f": self.f,
            "faulty": sorted(self.faulty),
            "inputs": list(self.inputs),
            "adversary": self.adversary.to_dict(),
            "max_rounds": self.max_rounds,
            "epsilon": self.epsilon,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SimConfig":
        graph = d["graph"] if isinstance(d["graph"], Digraph) else graph_from_dict(d["graph"])
        f = int(d["f"])
        faulty = frozenset(int(i) for i in d.get("faulty", []))
        inputs = [float(x) for x in d["inputs"]]
        adv = d["adversary"]
        if not isinstance(adv, Adversary):
            adv = adversary_from_dict(adv, graph=graph, f=f, faulty=faulty, inputs=inputs)
        return cls(
            graph=graph,
            f=f,
            faulty=faulty,
            inputs=tuple(inputs),
            adversary=adv,
            max_rounds=int(d.get("max_rounds", 1000)),
            epsilon=float(d.get("epsilon", 1e-6)),
            seed=int(d.get("seed", 0)),
        )


def validate_config(config: SimConfig, *, check_graph: bool = True) -> list[Diagnostic]:
    """Errors and warnings for a config; never raises.

    ``check_graph=False`` skips the exhaustive partition check behind the
    "condition violated" warning.
    """
    g, f = config.graph, config.f
    out: list[Diagnostic] = []
    if not isinstance(f, int) or f < 0:
        return [error("fault-bound", f"f must be a non-negative int, got {f!r}")]
    bad = sorted(i for i in config.faulty if not 0 <= i < g.n)
    if bad:
        out.append(error("faulty-range", f"faulty nodes {bad} outside 0..{g.n - 1}"))
    if len(config.faulty) > f:
        out.append(error("faulty-count", f"{len(config.faulty)} faulty nodes exceed f = {f}"))
    if len(config.inputs) != g.n:
        out.append(error("inputs-length", f"expected {g.n} inputs, got {len(config.inputs)}"))
    nonfinite = [i for i, x in enumerate(config.inputs) if not math.isfinite(x)]
    if nonfinite:
        out.append(error("inputs-finite", f"non-finite inputs at nodes {nonfinite}"))
    if config.max_rounds < 1:
        out.append(error("max-rounds", f"max_rounds must be >= 1, got {config.max_rounds}"))
    if not (math.isfinite(config.epsilon) and config.epsilon > 0):
        out.append(error("epsilon", f"epsilon must be a positive finite number, got {config.epsilon}"))
    if len(config.honest) == 0:
        out.append(error("no-honest", "every node is faulty"))
    for i in config.honest:
        d = g.in_degree(i)
        if d < 2 * f:
            out.append(error("in-degree", f"fault-free node {i} has in-degree {d} < 2f = {2 * f}"))
    if f > 0:
        low = [i for i in g.nodes if g.in_degree(i) < 2 * f + 1]
        if low:
            out.append(warning("in-degree", f"nodes {low} have fewer than 2f+1 = {2 * f + 1} in-neighbours; the condition cannot hold"))
    if any(d.is_error for d in out):
        return out
    out.extend(config.adversary.diagnostics(g, config.faulty, config.inputs))
    if check_graph and g.n <= ENUMERATION_GUARD:
        verdict = check_condition(g, f)
        if not verdict.satisfied:
            out.append(warning("condition", f"graph violates the partition condition for f={f} (witness {verdict.witness.to_dict()}); convergence is not guaranteed"))
    return out


@dataclass(frozen=True)
class RoundRecord:
    """Everything that happened in round ``t``; keyed by fault-free node unless noted."""

    t: int
    received: Mapping[int, tuple]  # i -> ((sender, value), ...) by sender id
    kept: Mapping[int, frozenset]
    states: Mapping[int, float]
    adversary_msgs: Mapping[int, tuple]  # faulty j -> ((recipient, value), ...)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "received": {str(i): [[s, v] for s, v in r] for i, r in sorted(self.received.items())},
            "kept": {str(i): sorted(k) for i, k in sorted(self.kept.items())},
            "states": {str(i): v for i, v in sorted(self.states.items())},
            "adversary_msgs": {str(j): [[d, v] for d, v in m] for j, m in sorted(self.adversary_msgs.items())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RoundRecord":
        return cls(
            t=int(d["t"]),
            received=_frozen({int(i): tuple((int(s), float(v)) for s, v in r) for i, r in d.get("received", {}).items()}),
            kept=_frozen({int(i): frozenset(int(x) for x in k) for i, k in d["kept"].items()}) if "kept" in d else _frozen({}),
            states=_frozen({int(i): float(v) for i, v in d["states"].items()}),
            adversary_msgs=_frozen({int(j): tuple((int(t), float(v)) for t, v in m) for j, m in d.get("adversary_msgs", {}).items()}),
        )


def _frozen(d: dict) -> Mapping:
    return MappingProxyType(d)


@dataclass(frozen=True)
class Trace:
    config: SimConfig
    initial: tuple  # v_i[0] for every node; faulty entries are unused
    rounds: tuple

    @property
    def honest(self) -> tuple[int, ...]:
        return self.config.honest

    def states_at(self, t: int) -> Mapping[int, float]:
        """Fault-free states at the end of round ``t`` (``t = 0`` gives the inputs)."""
        if t == 0:
            return {i: self.initial[i] for i in self.honest}
        return self.rounds[t - 1].states

    def gap_at(self, t: int) -> float:
        vals = self.states_at(t).values()
        return max(vals) - min(vals)

    def to_dict(self) -> dict:
        return {
            "format": TRACE_FORMAT,
            "config": self.config.to_dict(),
            "initial": list(self.initial),
            "rounds": [r.to_dict() for r in self.rounds],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Trace":
        if d.get("format", TRACE_FORMAT) != TRACE_FORMAT:
            raise ValueError(f"unsupported trace format {d.get('format')!r}")
        config = SimConfig.from_dict(d["config"])
        rounds = tuple(RoundRecord.from_dict(r) for r in d["rounds"])
        for k, r in enumerate(rounds, start=1):
            if r.t != k:
                raise ValueError(f"round records are not consecutive: expected t={k}, got t={r.t}")
            if set(r.states) != set(config.honest):
                raise ValueError(f"round {r.t} states do not cover exactly the fault-free nodes")
        return cls(config, tuple(float(x) for x in d["initial"]), rounds)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "Trace":
        return cls.from_dict(json.loads(text))

    def states_csv(self) -> str:
        """``round,node,value`` rows for fault-free nodes, round 0 included."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "node", "value"])
        for t in range(len(self.rounds) + 1):
            for i, v in sorted(self.states_at(t).items()):
                w.writerow([t, i, repr(v)])
        return buf.getvalue()


def run(config: SimConfig, *, check_graph: bool = True) -> Trace:
    """Execute rounds until the fault-free gap is at most ``epsilon`` or ``max_rounds`` is hit.

    Raises:
        ConfigError: ``validate_config`` reported errors.
    """
    diags = validate_config(config, check_graph=check_graph)
    if any(d.is_error for d in diags):
        raise ConfigError(diags)
    for d in diags:
        log.warning("%s", d)

    g, f, faulty = config.graph, config.f, config.faulty
    honest = config.honest
    faulty_order = sorted(faulty)
    preds = {i: sorted(g.in_neighbors(i)) for i in honest}
    succs = {j: sorted(g.out_neighbors(j)) for j in faulty_order}
    prev = {i: config.inputs[i] for i in honest}
    low, high = min(prev.values()), max(prev.values())

    rounds: list[RoundRecord] = []
    for t in range(1, config.max_rounds + 1):
        ctx = AdversaryContext(t, MappingProxyType(dict(prev)), g, f, config.seed, low, high)
        adv_msgs = {j: tuple((d, config.adversary.emit(ctx, j, d)) for d in succs[j]) for j in faulty_order}
        lookup = {j: dict(m) for j, m in adv_msgs.items()}
        received, kept, states = {}, {}, {}
        for i in honest:
            r = tuple((j, lookup[j][i] if j in faulty else prev[j]) for j in preds[i])
            states[i], kept[i] = update_value(prev[i], r, f)
            received[i] = r
        rounds.append(RoundRecord(t, _frozen(received), _frozen(kept), _frozen(states), _frozen(adv_msgs)))
        prev = states
        if max(prev.values()) - min(prev.values()) <= config.epsilon:
            break
    return Trace(config, config.inputs, tuple(rounds))

