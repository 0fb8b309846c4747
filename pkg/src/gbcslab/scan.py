"""Exhaustive small-graph scans for the partition-sufficiency conjecture.

The structural test is proven in one direction only: a nontrivial strategy
partition (plus the terminal row equality) forces uncontrollability.  The
open question is the converse, that every uncontrollable game hides such a
partition.  The scan enumerates all labeled agent graphs of a given size,
runs both tests, and classifies each graph:

* ``consistent``: the tests agree with the proven direction;
* ``THEOREM_VIOLATION``: structurally uncontrollable yet full rank - this
  contradicts the proven direction and always indicates an implementation
  bug, never new mathematics;
* ``CONJECTURE_COUNTEREXAMPLE``: no structural certificate yet rank
  deficient - a genuine counterexample to the conjectured converse, worth
  reporting loudly but not an error.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .controllability import game_controllable, sep_uncontrollability_check
from .errors import InvariantError, NumericError
from .lqgame import default_params
from .strategy import has_nontrivial_cell
from .topology import Topology, topology

THREADS_ENV = "GBCS_LAB_THREADS"

CONSISTENT = "consistent"
THEOREM_VIOLATION = "THEOREM_VIOLATION"
CONJECTURE_COUNTEREXAMPLE = "CONJECTURE_COUNTEREXAMPLE"
NUMERIC_FAILURE = "numeric_failure"


def edge_pairs(h: int) -> list[tuple[int, int]]:
    """All agent pairs (i, j), i < j, in lexicographic order; bit k of a graph
    mask refers to pair k of this list."""
    return list(itertools.combinations(range(1, h + 1), 2))


def mask_to_topology(h: int, mask: int) -> Topology:
    pairs = edge_pairs(h)
    return topology(h, (pairs[k] for k in range(len(pairs)) if mask >> k & 1))


def topology_to_mask(top: Topology) -> int:
    index = {pair: k for k, pair in enumerate(edge_pairs(top.agent_count))}
    mask = 0
    for e in top.sorted_edges:
        mask |= 1 << index[e]
    return mask


def canonical_mask(h: int, mask: int) -> int:
    """Smallest edge mask reachable by relabeling agents (brute force over h!)."""
    pairs = edge_pairs(h)
    index = {pair: k for k, pair in enumerate(pairs)}
    best = mask
    for perm in itertools.permutations(range(1, h + 1)):
        remapped = 0
        for k, (i, j) in enumerate(pairs):
            if mask >> k & 1:
                a, b = perm[i - 1], perm[j - 1]
                remapped |= 1 << index[(min(a, b), max(a, b))]
        best = min(best, remapped)
    return best


def enumerate_graphs(h: int, dedup_iso: bool = False):
    """All labeled agent graphs on h agents in increasing edge-mask order.

    With ``dedup_iso`` only the lexicographically minimal representative of
    each isomorphism class is kept.
    """
    if not 1 <= h <= 7:
        raise ValueError(f"agent count must be in 1..7, got {h}")
    n_pairs = h * (h - 1) // 2
    for mask in range(1 << n_pairs):
        if dedup_iso and canonical_mask(h, mask) != mask:
            continue
        yield mask_to_topology(h, mask)


@dataclass(frozen=True)
class ScanRecord:
    graph_id: int
    h: int
    edges: tuple[tuple[int, int], ...]
    sep_nontrivial: bool
    t_rows_equal: bool
    thm2_uncontrollable: bool
    controllable: bool
    projected_rank: int
    classification: str


def classify(thm2_uncontrollable: bool, controllable: bool) -> str:
    if thm2_uncontrollable and controllable:
        return THEOREM_VIOLATION
    if not thm2_uncontrollable and not controllable:
        return CONJECTURE_COUNTEREXAMPLE
    return CONSISTENT


def _scan_one(top: Topology, overrides, rank_tol, t_tol) -> ScanRecord:
    graph_id = topology_to_mask(top)
    try:
        p = default_params(top, **(overrides or {}))
        sep = sep_uncontrollability_check(top, p, t_tol)
        game = game_controllable(p, rank_tol)
    except NumericError:
        return ScanRecord(
            graph_id=graph_id, h=top.agent_count, edges=top.sorted_edges,
            sep_nontrivial=False, t_rows_equal=False, thm2_uncontrollable=False,
            controllable=False, projected_rank=-1, classification=NUMERIC_FAILURE)
    label = classify(sep.uncontrollable, game.controllable)
    record = ScanRecord(
        graph_id=graph_id,
        h=top.agent_count,
        edges=top.sorted_edges,
        sep_nontrivial=has_nontrivial_cell(sep.partition),
        t_rows_equal=sep.t_rows_equal,
        thm2_uncontrollable=sep.uncontrollable,
        controllable=game.controllable,
        projected_rank=game.projected_rank,
        classification=label,
    )
    if classify(record.thm2_uncontrollable, record.controllable) != record.classification:
        raise InvariantError(f"classification mismatch on graph {graph_id}")
    return record


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(0, int(raw))
    except ValueError:
        return 0


def conjecture_scan(h: int, overrides=None, rank_tol="auto", t_tol: float = 1e-9,
                    dedup_iso: bool = False, max_agents: int = 6):
    """Classify every enumerated graph on h agents; returns (records, summary).

    Records are ordered by graph id regardless of how the per-graph work was
    scheduled.  ``max_agents`` guards against accidentally launching an
    enormous enumeration; raise it explicitly for h = 7.
    """
    if h > max_agents:
        raise ValueError(
            f"h = {h} exceeds the scan guard ({max_agents}); pass max_agents explicitly")
    graphs = list(enumerate_graphs(h, dedup_iso))
    workers = _worker_count()
    if workers >= 2:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(
                lambda top: _scan_one(top, overrides, rank_tol, t_tol), graphs))
    else:
        records = [_scan_one(top, overrides, rank_tol, t_tol) for top in graphs]
    records.sort(key=lambda r: r.graph_id)
    summary = {CONSISTENT: 0, THEOREM_VIOLATION: 0, CONJECTURE_COUNTEREXAMPLE: 0,
               NUMERIC_FAILURE: 0}
    for rec in records:
        summary[rec.classification] += 1
    return records, summary


def _format_edges(edges) -> str:
    return ";".join(f"{i}-{j}" for i, j in edges)


def scan_csv(records) -> str:
    """Render scan records as CSV with a fixed column order."""
    lines = ["graph_id,h,edges,sep_nontrivial,t_rows_equal,thm2_uncontrollable,"
             "controllable,projected_rank,classification"]
    for r in records:
        lines.append(",".join([
            str(r.graph_id), str(r.h), _format_edges(r.edges),
            str(r.sep_nontrivial).lower(), str(r.t_rows_equal).lower(),
            str(r.thm2_uncontrollable).lower(), str(r.controllable).lower(),
            str(r.projected_rank), r.classification,
        ]))
    return "\n".join(lines) + "\n"
