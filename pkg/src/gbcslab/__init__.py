"""Game-based control systems on graphs.

A regulator and H agents share a scalar-per-node state; the agents settle
into an open-loop equilibrium and the regulator steers the resulting joint
dynamics.  The package builds the game from an agent graph, solves the
equilibrium machinery (boundary-value problem, Riccati equations, deviation
certification), and decides controllability both algebraically and straight
off the topology through the strategy matrix and its equivalent partition.
"""

__version__ = "0.1.0"

from .controllability import (ControllabilityReport, GameRankResult, SepCheckResult,
                              aggregated_t_matrix, analyze, game_controllable,
                              kalman_blocks_recursive, kalman_matrix, kalman_rank,
                              projected_powers, recursion_matches_kalman, report_json,
                              sep_uncontrollability_check, t_matrix)
from .errors import (ConsistencyError, FiniteEscapeError, GbcsError, GraphParseError,
                     InvariantError, NoEquilibriumError, NumericError,
                     SingularMatrixError)
from .lqgame import (AugmentedSystem, DeviationReport, GbcsParams, RiccatiSolution,
                     Trajectory, assemble_augmented, bvp_operators, cost,
                     default_params, equilibrium_trajectory, existence_matrix,
                     hamiltonian_matrix, lifted_terminal_weights, nash_deviation_check,
                     riccati_solve, simulate, solve_bvp, trajectory_csv,
                     write_trajectory_csv)
from .rational import rank_exact
from .scan import (ScanRecord, canonical_mask, conjecture_scan, enumerate_graphs,
                   mask_to_topology, scan_csv, topology_to_mask)
from .strategy import (cell_strategy_count, coarsest_sep, common_neighbor_matrix,
                       has_nontrivial_cell, is_equitable, strategy_matrix)
from .topology import (Topology, classic_controllable, laplacian, load_topology,
                       parse_topology, parse_topology_json, strategy_vector, topology)

__all__ = [
    "AugmentedSystem", "ControllabilityReport", "ConsistencyError", "DeviationReport",
    "FiniteEscapeError", "GameRankResult", "GbcsError", "GbcsParams", "GraphParseError",
    "InvariantError", "NoEquilibriumError", "NumericError", "RiccatiSolution",
    "ScanRecord", "SepCheckResult", "SingularMatrixError", "Topology", "Trajectory",
    "aggregated_t_matrix", "analyze", "assemble_augmented", "bvp_operators",
    "canonical_mask", "cell_strategy_count", "classic_controllable", "coarsest_sep",
    "common_neighbor_matrix", "conjecture_scan", "cost", "default_params",
    "enumerate_graphs", "equilibrium_trajectory", "existence_matrix",
    "game_controllable", "hamiltonian_matrix", "has_nontrivial_cell", "is_equitable",
    "kalman_blocks_recursive", "kalman_matrix", "kalman_rank", "laplacian",
    "lifted_terminal_weights", "load_topology", "mask_to_topology",
    "nash_deviation_check", "parse_topology", "parse_topology_json",
    "projected_powers", "rank_exact", "recursion_matches_kalman", "report_json",
    "riccati_solve", "scan_csv", "sep_uncontrollability_check", "simulate",
    "solve_bvp", "strategy_matrix", "strategy_vector", "t_matrix", "topology",
    "topology_to_mask", "trajectory_csv", "write_trajectory_csv",
]
