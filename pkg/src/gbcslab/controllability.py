"""Controllability of the game system, algebraic and graph-theoretic.

Two routes to a verdict:

* direct: the reachability (Kalman) matrix of the augmented pair, and the
  projected full-row-rank test on the state block;
* structural: the strategy-equivalent partition of the strategy matrix plus
  a row test on the terminal coupling block.

The terminal block enters the row test and the rank test with its columns
aggregated over the partition cells.  Column-by-column the block is only
cell-permutation symmetric, so literal rows are generically unequal even on
perfectly symmetric graphs; summed over each cell the rows become exactly
cell-constant whenever the partition structure is present, which is the form
under which the structural test provably implies rank deficiency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import ConsistencyError, InvariantError
from .lqgame import AugmentedSystem, GbcsParams, assemble_augmented
from .strategy import Partition, coarsest_sep, has_nontrivial_cell
from .topology import Topology, strategy_vector


def kalman_matrix(sys: AugmentedSystem) -> np.ndarray:
    """Reachability matrix: columns b_bar, A_bar b_bar, ..., A_bar^(d-1) b_bar."""
    dim = sys.a_bar.shape[0]
    cols = np.empty((dim, dim))
    col = sys.b_bar
    for k in range(dim):
        cols[:, k] = col
        if k + 1 < dim:
            col = sys.a_bar @ col
    return cols


def projected_powers(p: GbcsParams) -> np.ndarray:
    """State-block rows of the reachability columns: [I 0] A_bar^k b_bar.

    Shape (n, (H+1)^2) with k running over all augmented-dimension powers.
    """
    sys = assemble_augmented(p)
    return kalman_matrix(sys)[:p.n, :]


def kalman_blocks_recursive(p: GbcsParams) -> np.ndarray:
    """Reachability columns rebuilt block-by-block from the closed recursion.

    ``blocks[row, col]`` is the n-vector in block row ``row`` (0 = state,
    i = player i's costate) of reachability column ``col``.  Even columns
    multiply forward by the drift; odd columns fold the couplings back in and
    zero every costate block.  Requires q_i a = a^T q_i for every player
    (the cancellation behind the odd-column zeros), which holds automatically
    for identity drift and symmetric costs.
    """
    n, h = p.n, p.h
    for i in range(h):
        defect = float(np.abs(p.q[i] @ p.a - p.a.T @ p.q[i]).max())
        if defect > 1e-12:
            raise ConsistencyError(
                f"recursion precondition violated: |q[{i}] a - a^T q[{i}]| = {defect:.3e}")
    ncols = (h + 1) ** 2
    blocks = np.zeros((h + 1, ncols, n))
    blocks[0, 0] = p.b_regulator
    couplings = [p.coupling(i) for i in range(1, h + 1)]
    a2 = p.a @ p.a
    for col in range(1, ncols):
        if (col + 1) % 2 == 0:  # even 1-based column index
            blocks[0, col] = p.a @ blocks[0, col - 1]
            for row in range(1, h + 1):
                blocks[row, col] = p.q[row - 1] @ blocks[0, col - 1]
        else:
            acc = a2 @ blocks[0, col - 2]
            for i in range(h):
                acc = acc + couplings[i] @ (p.q[i] @ blocks[0, col - 2])
            blocks[0, col] = acc
    return blocks


def recursion_matches_kalman(p: GbcsParams, tol: float = 1e-9):
    """Compare the recursion against the directly computed reachability matrix.

    Returns (matches, max_abs_deviation).
    """
    n, h = p.n, p.h
    blocks = kalman_blocks_recursive(p)
    direct = kalman_matrix(assemble_augmented(p))
    stacked = np.empty_like(direct)
    for col in range((h + 1) ** 2):
        for row in range(h + 1):
            stacked[row * n:(row + 1) * n, col] = blocks[row, col]
    deviation = float(np.abs(stacked - direct).max())
    return deviation <= tol, deviation


def t_matrix(p: GbcsParams, system: AugmentedSystem | None = None) -> np.ndarray:
    """Terminal coupling block, (H+1) x H.

    The state rows of exp(-A_bar T) applied to the stack
    (I; -q_1T; ...; -q_HT), keeping the agent columns.  Row r describes how
    node r's free backward flow is loaded by the terminal costate conditions.
    A prebuilt ``system`` may be supplied (reuse across calls, or substitution
    in tests).
    """
    n, h = p.n, p.h
    sys = assemble_augmented(p) if system is None else system
    e = linalg.expm(-sys.a_bar * p.horizon)
    stack = np.vstack([np.eye(n)] + [-qt for qt in p.q_terminal])
    selector = np.vstack([np.zeros((1, h)), np.eye(h)])
    return e[:n, :] @ stack @ selector


def strategy_matrix_from_params(p: GbcsParams) -> np.ndarray:
    """Integer strategy matrix rebuilt from the agent input columns.

    Valid whenever the columns are 0/1 indicators (always true for games
    built from a topology); anything else cannot define a partition and is
    rejected.
    """
    total = np.zeros((p.n, p.n))
    for b in p.b_agents:
        if np.abs(b - np.round(b)).max() > 1e-9 or np.any((np.round(b) != 0) & (np.round(b) != 1)):
            raise ConsistencyError(
                "agent input columns are not 0/1 indicators; no strategy matrix exists")
        total += np.outer(np.round(b), np.round(b))
    return total.astype(np.int64)


def cell_indicator(partition: Partition, h: int) -> np.ndarray:
    """H x (#agent cells) membership matrix over the agent columns."""
    agent_cells = [c for c in partition if 0 not in c]
    z = np.zeros((h, len(agent_cells)))
    for col, cell in enumerate(agent_cells):
        for member in cell:
            z[member - 1, col] = 1.0
    return z


def aggregated_t_matrix(p: GbcsParams, partition: Partition) -> np.ndarray:
    """Terminal block with columns summed over partition cells."""
    return t_matrix(p) @ cell_indicator(partition, p.h)


@dataclass(frozen=True)
class SepCheckResult:
    partition: Partition
    cell_deviations: tuple[float, ...]
    t_rows_equal: bool
    uncontrollable: bool


def _cell_row_deviations(mat: np.ndarray, partition: Partition) -> tuple[float, ...]:
    devs = []
    for cell in partition:
        worst = 0.0
        members = tuple(cell)
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                worst = max(worst, float(np.abs(mat[members[a]] - mat[members[b]]).max()))
        devs.append(worst)
    return tuple(devs)


def sep_uncontrollability_check(top: Topology, p: GbcsParams,
                                t_tol: float = 1e-9) -> SepCheckResult:
    """The structural uncontrollability test.

    Computes the coarsest strategy-equivalent partition and, for every
    nontrivial cell, the worst pairwise row deviation of the cell-aggregated
    terminal block.  The verdict requires both a nontrivial cell and all
    nontrivial cells passing the row test; breaking either (for instance by
    an asymmetric terminal weight) withdraws it.
    """
    for i in range(1, top.agent_count + 1):
        expected = strategy_vector(top, i).astype(float)
        if not np.array_equal(expected, p.b_agents[i - 1]):
            raise ConsistencyError(
                f"agent {i} input column does not match the topology's strategy vector")
    s = strategy_matrix_from_params(p)
    partition = coarsest_sep(s)
    t_cells = aggregated_t_matrix(p, partition)
    devs = _cell_row_deviations(t_cells, partition)
    nontrivial = has_nontrivial_cell(partition)
    rows_equal = all(
        dev <= t_tol for cell, dev in zip(partition, devs) if len(cell) >= 2
    )
    return SepCheckResult(
        partition=partition,
        cell_deviations=devs,
        t_rows_equal=bool(rows_equal),
        uncontrollable=bool(nontrivial and rows_equal),
    )


def _unit_columns(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=0)
    norms = np.where(norms == 0.0, 1.0, norms)
    return m / norms


@dataclass(frozen=True)
class GameRankResult:
    controllable: bool
    projected_rank: int
    threshold: float
    rank_without_b: int


def game_controllable(p: GbcsParams, rank_tol="auto") -> GameRankResult:
    """Full-row-rank test of the stacked matrix [projected powers | terminal].

    The terminal block is aggregated over the strategy partition (identity
    aggregation when the partition is trivial).  Columns are scaled to unit
    norm before the rank decision: reachability columns grow geometrically
    with the power index, and a single absolute threshold across raw scales
    would drown genuine directions (scaling columns never changes the rank of
    the exact matrix).  ``rank_without_b`` reports the same test with the
    zeroth power column dropped, for comparison.
    """
    s = strategy_matrix_from_params(p)
    partition = coarsest_sep(s)
    proj = projected_powers(p)
    g = np.hstack([proj, aggregated_t_matrix(p, partition)])
    result = linalg.rank_detail(_unit_columns(g), rank_tol)
    without_b = linalg.rank(_unit_columns(g[:, 1:]), rank_tol)
    return GameRankResult(
        controllable=bool(result.rank == p.n),
        projected_rank=int(result.rank),
        threshold=float(result.threshold),
        rank_without_b=int(without_b),
    )


def kalman_rank(sys: AugmentedSystem, rank_tol="auto") -> int:
    """Rank of the full reachability matrix, columns normalized first."""
    return linalg.rank(_unit_columns(kalman_matrix(sys)), rank_tol)


@dataclass(frozen=True)
class ControllabilityReport:
    """Everything the analysis concluded about one game, with its tolerances."""

    agents: int
    edges: tuple[tuple[int, int], ...]
    strategy_matrix: np.ndarray
    sep_cells: Partition
    t_row_deviation_per_cell: tuple[float, ...]
    thm2_applies: bool
    thm2_uncontrollable: bool
    kalman_rank: int
    projected_rank: int
    controllable: bool
    rank_tolerance: float
    t_rows_tolerance: float
    params_digest: str


def analyze(top: Topology, p: GbcsParams | None = None, rank_tol="auto",
            t_tol: float = 1e-9) -> ControllabilityReport:
    """Run every test on one topology and cross-check the verdict chain."""
    from .lqgame import default_params

    if p is None:
        p = default_params(top)
    sep = sep_uncontrollability_check(top, p, t_tol)
    game = game_controllable(p, rank_tol)
    k_rank = kalman_rank(assemble_augmented(p), rank_tol)
    report = ControllabilityReport(
        agents=top.agent_count,
        edges=top.sorted_edges,
        strategy_matrix=strategy_matrix_from_params(p),
        sep_cells=sep.partition,
        t_row_deviation_per_cell=sep.cell_deviations,
        thm2_applies=sep.uncontrollable,
        thm2_uncontrollable=sep.uncontrollable,
        kalman_rank=k_rank,
        projected_rank=game.projected_rank,
        controllable=game.controllable,
        rank_tolerance=game.threshold,
        t_rows_tolerance=float(t_tol),
        params_digest=p.digest(),
    )
    if report.thm2_applies and not report.thm2_uncontrollable:
        raise InvariantError("structural test applies but did not conclude uncontrollable")
    if report.thm2_uncontrollable and report.controllable:
        raise InvariantError(
            "structural uncontrollability contradicts the rank test "
            f"(agents={report.agents}, edges={report.edges})")
    return report


def report_json(report: ControllabilityReport) -> str:
    """Serialize a report with the stable key set."""
    payload = {
        "agents": report.agents,
        "edges": [list(e) for e in report.edges],
        "strategy_matrix": [[int(x) for x in row] for row in report.strategy_matrix],
        "sep_cells": [list(c) for c in report.sep_cells],
        "t_row_deviation_per_cell": list(report.t_row_deviation_per_cell),
        "thm2_applies": report.thm2_applies,
        "thm2_uncontrollable": report.thm2_uncontrollable,
        "kalman_rank": report.kalman_rank,
        "projected_rank": report.projected_rank,
        "controllable": report.controllable,
        "tolerances": {"rank": report.rank_tolerance, "t_rows": report.t_rows_tolerance},
        "params_digest": report.params_digest,
    }
    return json.dumps(payload, indent=2)
