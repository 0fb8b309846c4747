"""Agent graphs and the strategy vectors they induce.

A topology is the undirected simple graph on agents 1..H.  The regulator is
not stored: it occupies slot 0 of every derived vector and matrix and is
adjacent to every agent by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import linalg
from .errors import GraphParseError


@dataclass(frozen=True)
class Topology:
    """Undirected simple graph on agents 1..agent_count (1-indexed)."""

    agent_count: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.agent_count < 1:
            raise ValueError(f"agent_count must be positive, got {self.agent_count}")
        object.__setattr__(self, "edges", frozenset(self.edges))
        for e in self.edges:
            if len(e) != 2:
                raise ValueError(f"edge {e!r} is not a pair")
            i, j = e
            if i == j:
                raise ValueError(f"self-loop on agent {i}")
            if not (1 <= i < j <= self.agent_count):
                raise ValueError(f"edge {e!r} out of range or not ordered (i < j)")

    @property
    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))

    def neighbors(self, i: int) -> set[int]:
        if not 1 <= i <= self.agent_count:
            raise ValueError(f"agent index {i} out of range 1..{self.agent_count}")
        out = set()
        for a, b in self.edges:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return out

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))


def topology(agent_count: int, edges=()) -> Topology:
    """Build a Topology from any iterable of (i, j) pairs (order-insensitive)."""
    norm = set()
    for e in edges:
        i, j = e
        if i == j:
            raise ValueError(f"self-loop on agent {i}")
        norm.add((min(i, j), max(i, j)))
    return Topology(agent_count, frozenset(norm))


def parse_topology(text: str) -> Topology:
    """Parse the line-oriented graph format.

    Line 1: ``agents <H>``.  Then ``edge <i> <j>`` lines (1-indexed).  Blank
    lines and ``#`` comments are ignored.  Errors carry line numbers.
    """
    agent_count = None
    edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "agents":
            if agent_count is not None:
                raise GraphParseError("duplicate 'agents' directive", line=lineno)
            if len(parts) != 2:
                raise GraphParseError("'agents' takes exactly one count", line=lineno)
            try:
                agent_count = int(parts[1])
            except ValueError:
                raise GraphParseError(f"bad agent count {parts[1]!r}", line=lineno) from None
            if agent_count < 1:
                raise GraphParseError(f"agent count must be positive, got {agent_count}",
                                      line=lineno)
        elif parts[0] == "edge":
            if agent_count is None:
                raise GraphParseError("'edge' before 'agents'", line=lineno)
            if len(parts) != 3:
                raise GraphParseError("'edge' takes exactly two endpoints", line=lineno)
            try:
                i, j = int(parts[1]), int(parts[2])
            except ValueError:
                raise GraphParseError(f"bad edge endpoints {parts[1]!r} {parts[2]!r}",
                                      line=lineno) from None
            if i == j:
                raise GraphParseError(f"self-loop on agent {i}", line=lineno)
            if not (1 <= i <= agent_count and 1 <= j <= agent_count):
                raise GraphParseError(f"edge ({i}, {j}) out of range 1..{agent_count}",
                                      line=lineno)
            pair = (min(i, j), max(i, j))
            if pair in edges:
                raise GraphParseError(f"duplicate edge ({pair[0]}, {pair[1]})", line=lineno)
            edges.add(pair)
        else:
            raise GraphParseError(f"unknown directive {parts[0]!r}", line=lineno)
    if agent_count is None:
        raise GraphParseError("missing 'agents' directive", line=1)
    return Topology(agent_count, frozenset(edges))


def parse_topology_json(text: str) -> Topology:
    """Parse the JSON graph format: {"agents": H, "edges": [[i, j], ...]}."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"bad JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    if not isinstance(data, dict) or "agents" not in data:
        raise GraphParseError("JSON graph must be an object with an 'agents' key")
    agent_count = data["agents"]
    if not isinstance(agent_count, int) or agent_count < 1:
        raise GraphParseError(f"'agents' must be a positive integer, got {agent_count!r}")
    raw_edges = data.get("edges", [])
    edges: set[tuple[int, int]] = set()
    for e in raw_edges:
        if not (isinstance(e, (list, tuple)) and len(e) == 2
                and all(isinstance(x, int) for x in e)):
            raise GraphParseError(f"edge {e!r} must be a pair of integers")
        i, j = e
        if i == j:
            raise GraphParseError(f"self-loop on agent {i}")
        if not (1 <= i <= agent_count and 1 <= j <= agent_count):
            raise GraphParseError(f"edge ({i}, {j}) out of range 1..{agent_count}")
        pair = (min(i, j), max(i, j))
        if pair in edges:
            raise GraphParseError(f"duplicate edge ({pair[0]}, {pair[1]})")
        edges.add(pair)
    return Topology(agent_count, frozenset(edges))


def load_topology(path) -> Topology:
    """Read a graph file, dispatching on the ``.json`` extension."""
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    if p.suffix.lower() == ".json":
        return parse_topology_json(text)
    return parse_topology(text)


def strategy_vector(top: Topology, i: int) -> np.ndarray:
    """Closed-neighborhood indicator of agent i with the regulator slot set.

    Slot 0 (regulator) and slot i (self) are always 1; slot j is 1 exactly
    when {i, j} is an edge.  Length is agent_count + 1.
    """
    if not 1 <= i <= top.agent_count:
        raise ValueError(f"agent index {i} out of range 1..{top.agent_count}")
    v = np.zeros(top.agent_count + 1, dtype=np.int64)
    v[0] = 1
    v[i] = 1
    for j in top.neighbors(i):
        v[j] = 1
    return v


def laplacian(top: Topology) -> np.ndarray:
    """Graph Laplacian D - A over the agents only (regulator excluded)."""
    h = top.agent_count
    lap = np.zeros((h, h))
    for a, b in top.edges:
        lap[a - 1, a - 1] += 1.0
        lap[b - 1, b - 1] += 1.0
        lap[a - 1, b - 1] -= 1.0
        lap[b - 1, a - 1] -= 1.0
    return lap


def classic_controllable(top: Topology, leader: int, tol="auto") -> bool:
    """Leader-follower baseline without game effects.

    True iff the pair (L(G), e_leader) has a full-rank reachability matrix,
    i.e. the single-leader consensus dynamics can steer every agent.
    """
    if not 1 <= leader <= top.agent_count:
        raise ValueError(f"leader {leader} out of range 1..{top.agent_count}")
    h = top.agent_count
    lap = laplacian(top)
    col = np.zeros(h)
    col[leader - 1] = 1.0
    cols = [col]
    for _ in range(h - 1):
        cols.append(lap @ cols[-1])
    return linalg.rank(np.column_stack(cols), tol) == h
