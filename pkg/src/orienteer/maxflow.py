"""Exact max-flow / min-cut on small capacitated digraphs.

The kernel is a preflow push-relabel; a compiled extension is used when it
built, with a pure-Python twin as fallback.  Selection happens at import and
can be forced to the fallback by setting ORIENTEER_PURE_PYTHON=1 before the
first import.  ``benchmarks/maxflow_backends.py`` compares the two.

The min cut returned is the source side of the final residual graph's
reachability from the source; it is one minimum cut among possibly many, and
it is deterministic given the arc insertion order.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

if os.environ.get("ORIENTEER_PURE_PYTHON"):
    from . import _pushrelabel_py as _kernel
else:
    try:
        from . import _pushrelabel as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _pushrelabel_py as _kernel

KERNEL_COMPILED = bool(_kernel.COMPILED)


@dataclass
class FlowNetwork:
    """Capacitated digraph under construction; arcs keep insertion order."""

    node_count: int
    source: int
    sink: int
    tails: list = field(default_factory=list)
    heads: list = field(default_factory=list)
    capacities: list = field(default_factory=list)

    def __post_init__(self):
        n = self.node_count
        if not (0 <= self.source < n and 0 <= self.sink < n):
            raise ValueError("source/sink out of range")
        if self.source == self.sink:
            raise ValueError("source equals sink")

    def add_arc(self, tail, head, capacity):
        if not (0 <= tail < self.node_count and 0 <= head < self.node_count):
            raise ValueError(f"arc ({tail}, {head}) out of range")
        if not capacity >= 0 or math.isnan(capacity):
            raise ValueError(f"negative or NaN capacity on ({tail}, {head})")
        self.tails.append(tail)
        self.heads.append(head)
        self.capacities.append(float(capacity))


@dataclass(frozen=True)
class MinCutResult:
    """Max-flow value and the source-side vertex set of one minimum cut."""

    flow_value: float
    source_side: frozenset


def max_flow_min_cut(net: FlowNetwork) -> MinCutResult:
    value, side = _kernel.max_flow(
        net.node_count, net.tails, net.heads, net.capacities, net.source, net.sink
    )
    return MinCutResult(
        flow_value=float(value),
        source_side=frozenset(v for v in range(net.node_count) if side[v]),
    )
