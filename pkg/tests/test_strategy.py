import itertools

import numpy as np
import pytest

from gbcslab.strategy import (cell_strategy_count, coarsest_sep, common_neighbor_matrix,
                              has_nontrivial_cell, is_equitable, strategy_matrix)
from gbcslab.topology import topology

PATH3 = topology(3, [(1, 2), (2, 3)])
STAR3 = topology(3, [(1, 2), (1, 3)])
PATH3_S = [[3, 2, 3, 2], [2, 2, 2, 1], [3, 2, 3, 2], [2, 1, 2, 2]]


def all_labeled_graphs(h):
    pairs = list(itertools.combinations(range(1, h + 1), 2))
    for mask in range(2 ** len(pairs)):
        yield topology(h, [pairs[k] for k in range(len(pairs)) if mask >> k & 1])


class TestStrategyMatrix:
    def test_two_agents_edgeless(self):
        assert strategy_matrix(topology(2, [])).tolist() == [[2, 1, 1], [1, 1, 0], [1, 0, 1]]

    def test_two_agents_joined(self):
        assert strategy_matrix(topology(2, [(1, 2)])).tolist() == [[2, 2, 2]] * 3

    def test_three_agent_path(self):
        assert strategy_matrix(PATH3).tolist() == PATH3_S

    def test_regulator_corner_counts_agents(self):
        for top in (PATH3, STAR3, topology(4, [])):
            assert strategy_matrix(top)[0, 0] == top.agent_count

    def test_first_row_and_column_equal_diagonal(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            h = int(rng.integers(1, 7))
            pairs = list(itertools.combinations(range(1, h + 1), 2))
            top = topology(h, [p for p in pairs if rng.random() < 0.5])
            s = strategy_matrix(top)
            assert np.array_equal(s, s.T)
            assert np.array_equal(s[0], np.diag(s))
            assert np.array_equal(s[:, 0], np.diag(s))


class TestCommonNeighborOracle:
    def test_two_agents_edgeless(self):
        want = [[2, 1, 1], [1, 1, 0], [1, 0, 1]]
        assert common_neighbor_matrix(topology(2, [])).tolist() == want

    def test_single_agent(self):
        assert common_neighbor_matrix(topology(1, [])).tolist() == [[1, 1], [1, 1]]

    def test_three_agent_path(self):
        assert common_neighbor_matrix(PATH3).tolist() == PATH3_S

    def test_equivalence_exhaustive_small(self):
        for h in range(1, 6):
            for top in all_labeled_graphs(h):
                assert np.array_equal(strategy_matrix(top), common_neighbor_matrix(top))


class TestCellStrategyCount:
    def test_path_cell(self):
        s = strategy_matrix(PATH3)
        assert cell_strategy_count(s, 1, (1, 3)) == 3
        assert cell_strategy_count(s, 3, (1, 3)) == 3

    def test_singleton_cell_is_diagonal(self):
        s = strategy_matrix(PATH3)
        for i in range(4):
            assert cell_strategy_count(s, i, (i,)) == s[i, i]

    def test_empty_cell_rejected(self):
        with pytest.raises(ValueError):
            cell_strategy_count(strategy_matrix(PATH3), 1, ())

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            cell_strategy_count(strategy_matrix(PATH3), 1, (9,))


class TestCoarsestSep:
    def test_path_pairs_the_endpoints(self):
        assert coarsest_sep(strategy_matrix(PATH3)) == ((0,), (1, 3), (2,))

    def test_star_pairs_the_leaves(self):
        assert coarsest_sep(strategy_matrix(STAR3)) == ((0,), (1,), (2, 3))

    def test_single_agent_all_trivial(self):
        assert coarsest_sep(strategy_matrix(topology(1, []))) == ((0,), (1,))

    def test_complete_graph_one_cell(self):
        top = topology(4, list(itertools.combinations(range(1, 5), 2)))
        part = coarsest_sep(strategy_matrix(top))
        assert part == ((0,), (1, 2, 3, 4))
        assert has_nontrivial_cell(part)

    def test_output_is_equitable(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            h = int(rng.integers(1, 7))
            pairs = list(itertools.combinations(range(1, h + 1), 2))
            top = topology(h, [p for p in pairs if rng.random() < 0.5])
            s = strategy_matrix(top)
            assert is_equitable(s, coarsest_sep(s))

    def test_full_row_sums_equal_within_cells(self):
        for h in range(1, 6):
            for top in all_labeled_graphs(h):
                s = strategy_matrix(top)
                rows = s.sum(axis=1)
                for cell in coarsest_sep(s):
                    assert len({int(rows[i]) for i in cell}) == 1

    def test_automorphic_agents_share_a_cell(self):
        cases = [PATH3, STAR3, topology(4, [(1, 2), (3, 4)]),
                 topology(5, [(1, 2), (2, 3), (3, 4), (4, 5)])]
        for top in cases:
            s = strategy_matrix(top)
            part = coarsest_sep(s)
            cell_of = {i: idx for idx, c in enumerate(part) for i in c}
            h = top.agent_count
            for perm in itertools.permutations(range(1, h + 1)):
                mapping = {i + 1: perm[i] for i in range(h)}
                mapped = {(min(mapping[a], mapping[b]), max(mapping[a], mapping[b]))
                          for a, b in top.edges}
                if mapped != set(top.edges):
                    continue
                for i in range(1, h + 1):
                    assert cell_of[i] == cell_of[mapping[i]]

    def test_coarseness_merging_any_two_agent_cells_breaks_equitability(self):
        for top in (PATH3, STAR3, topology(4, [(1, 2), (2, 3), (3, 4)]),
                    topology(5, [(1, 2), (1, 3), (2, 3), (3, 4), (4, 5)])):
            s = strategy_matrix(top)
            part = coarsest_sep(s)
            agent_cells = [c for c in part if 0 not in c]
            for a_idx in range(len(agent_cells)):
                for b_idx in range(a_idx + 1, len(agent_cells)):
                    merged = [c for k, c in enumerate(agent_cells) if k not in (a_idx, b_idx)]
                    merged.append(tuple(sorted(agent_cells[a_idx] + agent_cells[b_idx])))
                    merged.append((0,))
                    assert not is_equitable(s, merged)

    def test_relabeling_gives_relabeled_cells(self):
        top = topology(4, [(1, 2), (2, 3)])
        mapping = {1: 3, 2: 4, 3: 2, 4: 1}
        relabeled = topology(4, [(mapping[a], mapping[b]) for a, b in top.edges])
        part = coarsest_sep(strategy_matrix(top))
        part_rel = coarsest_sep(strategy_matrix(relabeled))
        mapped = sorted(
            tuple(sorted(0 if i == 0 else mapping[i] for i in cell)) for cell in part)
        assert mapped == sorted(part_rel)

    def test_refinement_terminates_within_h_rounds(self):
        # the partition can only be refined agent_count times before it is
        # all singletons, so the fixpoint exists; spot-check convergence cost
        top = topology(6, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)])
        part = coarsest_sep(strategy_matrix(top))
        assert sum(len(c) for c in part) == 7


class TestHasNontrivialCell:
    def test_examples(self):
        assert has_nontrivial_cell(((0,), (1, 3), (2,)))
        assert not has_nontrivial_cell(((0,), (1,), (2,)))
