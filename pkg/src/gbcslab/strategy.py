"""Strategy matrix and the strategy-equivalent partition (SEP).

The strategy matrix S sums the outer products of all agents' strategy
vectors; entry (i, j) counts the agents whose closed neighborhood (with the
regulator slot) contains both i and j.  S plays the role the Laplacian plays
in plain consensus networks: it is the topology's fingerprint inside the game
dynamics, and its equitable-style partition drives the controllability tests.

Partitions are plain tuples of cells; each cell is a sorted tuple of indices
in 0..H, cells ordered by their smallest member, with the regulator always
isolated as the singleton cell (0,).
"""

from __future__ import annotations

import numpy as np

from .topology import Topology, strategy_vector

Partition = tuple[tuple[int, ...], ...]


def strategy_matrix(top: Topology) -> np.ndarray:
    """Integer sum of outer products of all strategy vectors, (H+1)x(H+1)."""
    h = top.agent_count
    s = np.zeros((h + 1, h + 1), dtype=np.int64)
    for i in range(1, h + 1):
        v = strategy_vector(top, i)
        s += np.outer(v, v)
    return s


def common_neighbor_matrix(top: Topology) -> np.ndarray:
    """The strategy matrix read directly off the graph, no outer products.

    Entry (i, j) counts agents k with both i and j in k's closed neighborhood
    (the regulator slot counts as belonging to every such neighborhood).
    Serves as the combinatorial oracle for ``strategy_matrix``.
    """
    h = top.agent_count
    closed = []
    for k in range(1, h + 1):
        nb = top.neighbors(k)
        nb.add(k)
        nb.add(0)
        closed.append(frozenset(nb))
    s = np.zeros((h + 1, h + 1), dtype=np.int64)
    for i in range(h + 1):
        for j in range(i, h + 1):
            count = sum(1 for nb in closed if i in nb and j in nb)
            s[i, j] = count
            s[j, i] = count
    return s


def cell_strategy_count(s: np.ndarray, i: int, cell) -> int:
    """Total strategies agent/regulator i receives from the given cell."""
    members = tuple(cell)
    if not members:
        raise ValueError("cell must be nonempty")
    n = s.shape[0]
    if not 0 <= i < n:
        raise ValueError(f"index {i} out of range 0..{n - 1}")
    for k in members:
        if not 0 <= k < n:
            raise ValueError(f"cell member {k} out of range 0..{n - 1}")
    return int(sum(int(s[i, k]) for k in members))


def coarsest_sep(s: np.ndarray) -> Partition:
    """Coarsest strategy-equivalent partition of {0..H} by signature refinement.

    Starts from {{0}, {1..H}} (regulator pre-isolated) and repeatedly splits
    cells whose members receive different strategy totals from some current
    cell, until a fixpoint.  Comparisons are exact: S is integral.
    """
    s = np.asarray(s)
    n = s.shape[0]
    if s.shape != (n, n):
        raise ValueError(f"strategy matrix must be square, got {s.shape}")
    cells: list[tuple[int, ...]] = [(0,)]
    if n > 1:
        cells.append(tuple(range(1, n)))
    while True:
        signatures = {
            i: tuple(cell_strategy_count(s, i, c) for c in cells) for i in range(n)
        }
        refined: list[tuple[int, ...]] = []
        for c in cells:
            groups: dict[tuple, list[int]] = {}
            for i in c:
                groups.setdefault(signatures[i], []).append(i)
            refined.extend(tuple(sorted(g)) for g in groups.values())
        refined.sort(key=lambda c: c[0])
        if refined == cells:
            return tuple(cells)
        cells = refined


def has_nontrivial_cell(partition: Partition) -> bool:
    """True iff some cell holds at least two members."""
    return any(len(c) >= 2 for c in partition)


def is_equitable(s: np.ndarray, partition) -> bool:
    """Check the SEP property directly: within every cell, all members receive
    the same strategy total from every cell."""
    for c in partition:
        members = tuple(c)
        for other in partition:
            counts = {cell_strategy_count(s, i, other) for i in members}
            if len(counts) > 1:
                return False
    return True
