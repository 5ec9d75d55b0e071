"""Post-hoc checks of a recorded execution against the convergence guarantees.

All checks are omniscient: they read the faulty set from the trace's config
and compute ``U[t]`` / ``mu[t]`` (max / min state) over fault-free nodes only.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

from .engine import Trace
from .graph import ENUMERATION_GUARD, Digraph, GraphError, check_condition

__all__ = [
    "AnalysisReport",
    "GEOMETRIC_RTOL",
    "LEMMA_RTOL",
    "alpha",
    "check_geometric_bound",
    "check_lemma_bounds",
    "check_validity",
    "contraction_factor",
    "report",
]

LEMMA_RTOL = 1e-12
GEOMETRIC_RTOL = 1e-9
# absolute slack, in units of the input scale, for gaps at the rounding floor
_ULP_SLACK = 16 * 2.0**-52


def _weight(g: Digraph, f: int, i: int) -> float:
    return 1.0 / (g.in_degree(i) + 1 - 2 * f)


def alpha(g: Digraph, f: int) -> float:
    """Smallest per-node averaging weight ``1 / (|N_i^-| + 1 - 2f)``.

    Raises:
        GraphError: some node has fewer than ``2f`` in-neighbours.
    """
    short = [i for i in g.nodes if g.in_degree(i) < 2 * f]
    if short:
        raise GraphError(f"nodes {short} have in-degree below 2f = {2 * f}")
    return min(_weight(g, f, i) for i in g.nodes)


def contraction_factor(g: Digraph, f: int) -> float:
    """Guaranteed gap shrink per ``n - f - 1`` rounds: ``1 - alpha^(n-f-1) / 2``."""
    return 1.0 - alpha(g, f) ** (g.n - f - 1) / 2.0


def _bounds(trace: Trace) -> list[tuple[float, float]]:
    out = []
    for t in range(len(trace.rounds) + 1):
        vals = trace.states_at(t).values()
        out.append((min(vals), max(vals)))
    return out


def check_validity(trace: Trace) -> bool:
    """Every fault-free state stays within the previous round's fault-free range."""
    prev_lo, prev_hi = _bounds(trace)[0]
    for rec in trace.rounds:
        if any(not prev_lo <= v <= prev_hi for v in rec.states.values()):
            return False
        prev_lo, prev_hi = min(rec.states.values()), max(rec.states.values())
    return True


def check_lemma_bounds(trace: Trace) -> tuple[bool, bool]:
    """Per-node lower/upper contraction inequalities.

    For round ``t``, fault-free ``i`` and every fault-free ``j`` in ``{i} | kept_i``::

        v_i[t] - mu[t-1]  >= a_i * (v_j[t-1] - mu[t-1])
        U[t-1] - v_i[t]   >= a_i * (U[t-1] - v_j[t-1])

    each allowed a slack of ``1e-12 * max(1, gap[t-1])``.

    Raises:
        ValueError: a round record lacks the kept set of some fault-free node.
    """
    g, f = trace.config.graph, trace.config.f
    honest = set(trace.honest)
    lower_ok = upper_ok = True
    for rec in trace.rounds:
        prev = trace.states_at(rec.t - 1)
        lo, hi = min(prev.values()), max(prev.values())
        tol = LEMMA_RTOL * max(1.0, abs(hi - lo))
        for i, v in rec.states.items():
            if i not in rec.kept:
                raise ValueError(f"round {rec.t} has no kept set for node {i}")
            a = _weight(g, f, i)
            for j in rec.kept[i] | {i}:
                if j not in honest:
                    continue
                if v - lo < a * (prev[j] - lo) - tol:
                    lower_ok = False
                if hi - v < a * (hi - prev[j]) - tol:
                    upper_ok = False
    return lower_ok, upper_ok


def check_geometric_bound(trace: Trace) -> bool:
    """``gap[k*b] <= factor^k * gap[0]`` for every complete block, ``b = n - f - 1``.

    Only meaningful when the graph satisfies the partition condition; the
    caller is responsible for that. Relative slack 1e-9 plus a few ulps of the
    input scale so that gaps stuck at the rounding floor do not fail.
    """
    g, f = trace.config.graph, trace.config.f
    block = g.n - f - 1
    factor = contraction_factor(g, f)
    gap0 = trace.gap_at(0)
    if gap0 == 0:
        return all(trace.gap_at(t) == 0 for t in range(len(trace.rounds) + 1))
    scale = max(abs(x) for x in trace.states_at(0).values())
    for k in range(1, len(trace.rounds) // block + 1):
        bound = factor**k * gap0
        if trace.gap_at(k * block) > bound * (1 + GEOMETRIC_RTOL) + _ULP_SLACK * scale:
            return False
    return True


@dataclass(frozen=True)
class AnalysisReport:
    """Series (index ``t = 0..T``) and verdicts for one trace.

    ``alpha``/``contraction_factor`` are ``None`` when some node has in-degree
    below ``2f``. ``geometric_bound_ok`` is ``None`` when the bound does not
    apply: the graph is known to violate the partition condition, or alpha is
    undefined. ``condition_satisfied`` is ``None`` for graphs past the
    enumeration guard.
    """

    u_series: list
    mu_series: list
    gap_series: list
    validity_ok: bool
    lemma_psi_ok: bool
    lemma_Psi_ok: bool
    alpha: float | None
    contraction_factor: float | None
    geometric_bound_ok: bool | None
    converged_round: int | None
    condition_satisfied: bool | None = None

    @property
    def ok(self) -> bool:
        """No applicable invariant check failed."""
        return self.validity_ok and self.lemma_psi_ok and self.lemma_Psi_ok and self.geometric_bound_ok is not False

    def to_dict(self) -> dict:
        return asdict(self)

    def bound_series(self, block: int) -> list[float | None]:
        if self.contraction_factor is None:
            return [None] * len(self.gap_series)
        g0 = self.gap_series[0]
        return [self.contraction_factor ** (t // block) * g0 for t in range(len(self.gap_series))]


def report(trace: Trace) -> AnalysisReport:
    g, f = trace.config.graph, trace.config.f
    bounds = _bounds(trace)
    u = [hi for _, hi in bounds]
    mu = [lo for lo, _ in bounds]
    gap = [hi - lo for lo, hi in bounds]
    psi_ok, Psi_ok = check_lemma_bounds(trace)
    try:
        a, factor = alpha(g, f), contraction_factor(g, f)
    except GraphError:
        a = factor = None
    satisfied = check_condition(g, f).satisfied if g.n <= ENUMERATION_GUARD else None
    geo = check_geometric_bound(trace) if factor is not None and satisfied is not False else None
    eps = trace.config.epsilon
    converged = next((t for t in range(1, len(gap)) if gap[t] <= eps), None)
    return AnalysisReport(
        u_series=u,
        mu_series=mu,
        gap_series=gap,
        validity_ok=check_validity(trace),
        lemma_psi_ok=psi_ok,
        lemma_Psi_ok=Psi_ok,
        alpha=a,
        contraction_factor=factor,
        geometric_bound_ok=geo,
        converged_round=converged,
        condition_satisfied=satisfied,
    )


def report_csv(rep: AnalysisReport, block: int) -> str:
    """``t,U,mu,gap,bound`` rows; ``bound`` is the block-wise geometric envelope."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "U", "mu", "gap", "bound"])
    for t, (hi, lo, gp, b) in enumerate(zip(rep.u_series, rep.mu_series, rep.gap_series, rep.bound_series(block))):
        w.writerow([t, repr(hi), repr(lo), repr(gp), "" if b is None or not math.isfinite(b) else repr(b)])
    return buf.getvalue()
