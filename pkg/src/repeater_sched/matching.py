"""Exact maximum-weight matching (not necessarily perfect) on small graphs.

Two exact solvers sit behind :func:`max_weight_matching`: a blossom solver for
general graphs and an assignment-based path for graphs with a known
bipartition. :func:`brute_force_matching` enumerates every matching and is
kept as a test oracle.

Edges with non-positive weight are dropped before solving; they can never
increase the total. Totals agree with the brute-force optimum to within
``WEIGHT_TOL`` on graphs with weights of order one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from scipy.optimize import linear_sum_assignment

WEIGHT_TOL = 1e-9
BRUTE_FORCE_MAX_NODES = 16


class GraphFormatError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedGraph:
    node_count: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if self.node_count < 0:
            raise GraphFormatError("node_count must be non-negative")
        edges = tuple((int(u), int(v), float(w)) for u, v, w in self.edges)
        seen = set()
        for u, v, w in edges:
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise GraphFormatError(f"edge ({u}, {v}) out of range for {self.node_count} nodes")
            if u == v:
                raise GraphFormatError(f"self-loop on node {u}")
            if not math.isfinite(w):
                raise GraphFormatError(f"edge ({u}, {v}) has non-finite weight {w}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphFormatError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", edges)

    def weight_map(self) -> dict[tuple[int, int], float]:
        return {(min(u, v), max(u, v)): w for u, v, w in self.edges}

    def to_dict(self) -> dict:
        return {"nodes": self.node_count, "edges": [[u, v, w] for u, v, w in self.edges]}

    @classmethod
    def from_dict(cls, doc) -> "WeightedGraph":
        if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
            raise GraphFormatError("graph document needs 'nodes' and 'edges'")
        nodes = doc["nodes"]
        if isinstance(nodes, bool) or not isinstance(nodes, int):
            raise GraphFormatError("'nodes' must be an integer")
        edges = []
        for e in doc["edges"]:
            if not isinstance(e, (list, tuple)) or len(e) != 3:
                raise GraphFormatError(f"edge must be a [u, v, w] triple, got {e!r}")
            u, v, w = e
            if any(isinstance(x, bool) or not isinstance(x, int) for x in (u, v)):
                raise GraphFormatError(f"edge endpoints must be integers, got {e!r}")
            if isinstance(w, bool) or not isinstance(w, (int, float)):
                raise GraphFormatError(f"edge weight must be a number, got {e!r}")
            edges.append((u, v, w))
        return cls(nodes, tuple(edges))

    @classmethod
    def from_json(cls, text: str) -> "WeightedGraph":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(doc)


@dataclass(frozen=True)
class Matching:
    matched_edges: tuple[tuple[int, int], ...] = ()
    total_weight: float = 0.0

    def mate(self) -> dict[int, int]:
        out = {}
        for u, v in self.matched_edges:
            out[u] = v
            out[v] = u
        return out

    def to_dict(self) -> dict:
        return {"matched_edges": [list(e) for e in self.matched_edges], "total_weight": self.total_weight}


def _finish(g: WeightedGraph, pairs: Iterable[tuple[int, int]]) -> Matching:
    weights = g.weight_map()
    edges = sorted((min(u, v), max(u, v)) for u, v in pairs)
    return Matching(tuple(edges), math.fsum(weights[e] for e in edges))


def _positive_edges(g: WeightedGraph) -> list[tuple[int, int, float]]:
    return [(u, v, w) for u, v, w in g.edges if w > 0]


def _blossom(g: WeightedGraph) -> list[tuple[int, int]]:
    nxg = nx.Graph()
    nxg.add_weighted_edges_from(_positive_edges(g))
    return list(nx.max_weight_matching(nxg, maxcardinality=False))


def _assignment(g: WeightedGraph, left: Sequence[int]) -> list[tuple[int, int]]:
    left = sorted(set(left))
    right = sorted(set(range(g.node_count)) - set(left))
    lpos = {u: i for i, u in enumerate(left)}
    rpos = {v: j for j, v in enumerate(right)}
    profit = np.zeros((len(left), len(right)))
    for u, v, w in _positive_edges(g):
        if u in lpos and v in rpos:
            profit[lpos[u], rpos[v]] = w
        elif v in lpos and u in rpos:
            profit[lpos[v], rpos[u]] = w
        else:
            raise GraphFormatError(f"edge ({u}, {v}) does not cross the bipartition")
    if profit.size == 0:
        return []
    rows, cols = linear_sum_assignment(profit, maximize=True)
    # zero-profit assignments stand for "unmatched"
    return [(left[i], right[j]) for i, j in zip(rows, cols) if profit[i, j] > 0]


def max_weight_matching(g: WeightedGraph, left: Sequence[int] | None = None) -> Matching:
    """Maximum-weight matching of ``g``.

    If ``left`` is given, the graph must be bipartite with ``left`` on one side
    and every other node on the other; an assignment solver is used then.
    Otherwise a general blossom solver runs. Ties between optimal matchings are
    broken arbitrarily.
    """
    pos = _positive_edges(g)
    ends = [x for u, v, _ in pos for x in (u, v)]
    if len(ends) == len(set(ends)):
        # positive edges are already disjoint, hence optimal
        pairs = [(u, v) for u, v, _ in pos]
    elif left is None:
        pairs = _blossom(g)
    else:
        pairs = _assignment(g, left)
    return _finish(g, pairs)


def brute_force_matching(g: WeightedGraph) -> Matching:
    """Enumerate every matching and return one of maximum weight."""
    n = g.node_count
    if n > BRUTE_FORCE_MAX_NODES:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_NODES} nodes, got {n}")
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for u, v, w in _positive_edges(g):
        adj[u].append((v, w))
        adj[v].append((u, w))

    best_w = 0.0
    best: list[tuple[int, int]] = []
    used = [False] * n
    chosen: list[tuple[int, int]] = []

    def rec(i: int, acc: float) -> None:
        nonlocal best_w, best
        while i < n and used[i]:
            i += 1
        if i == n:
            if acc > best_w:
                best_w, best = acc, list(chosen)
            return
        used[i] = True
        rec(i + 1, acc)
        for j, w in adj[i]:
            if not used[j]:
                used[j] = True
                chosen.append((i, j))
                rec(i + 1, acc + w)
                chosen.pop()
                used[j] = False
        used[i] = False

    rec(0, 0.0)
    return _finish(g, best)


def validate_matching(g: WeightedGraph, m: Matching, tol: float = WEIGHT_TOL) -> bool:
    weights = g.weight_map()
    seen: set[int] = set()
    total = []
    for u, v in m.matched_edges:
        key = (min(u, v), max(u, v))
        if key not in weights or u in seen or v in seen:
            return False
        seen.update((u, v))
        total.append(weights[key])
    return abs(math.fsum(total) - m.total_weight) <= tol
