import numpy as np
import pytest

from gbcslab import linalg
from gbcslab.errors import FiniteEscapeError, NoEquilibriumError
from gbcslab.lqgame import (AugmentedSystem, GbcsParams, _riccati_backward,
                            assemble_augmented, bvp_operators, cost, default_params,
                            equilibrium_trajectory, existence_matrix,
                            hamiltonian_matrix, lifted_terminal_weights,
                            nash_deviation_check, riccati_solve, simulate, solve_bvp,
                            Trajectory, trajectory_csv)
from gbcslab.topology import topology

EDGELESS1 = topology(1, [])
EDGELESS2 = topology(2, [])
PAIR2 = topology(2, [(1, 2)])
PATH3 = topology(3, [(1, 2), (2, 3)])


def series_expm(a, terms=80):
    out = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, terms + 1):
        term = term @ a / k
        out = out + term
    return out


def still_params(top, **extra):
    """Params with zero drift and zero running costs (nilpotent dynamics)."""
    h = top.agent_count
    n = h + 1
    base = dict(a=np.zeros((n, n)), q=tuple(np.zeros((n, n)) for _ in range(h)))
    base.update(extra)
    return default_params(top, **base)


class TestDefaultParams:
    def test_single_agent(self):
        p = default_params(EDGELESS1)
        assert p.n == 2
        assert p.b_agents[0].tolist() == [1, 1]
        assert p.b_regulator.tolist() == [1, 1]
        assert np.array_equal(p.a, np.eye(2))
        assert np.array_equal(p.q[0], np.eye(2))
        assert np.array_equal(p.q_terminal[0], np.eye(2))
        assert p.r == (1.0,)
        assert p.horizon == 1.0

    def test_two_agents_edgeless_columns(self):
        p = default_params(EDGELESS2)
        assert p.b_agents[0].tolist() == [1, 1, 0]
        assert p.b_agents[1].tolist() == [1, 0, 1]

    def test_horizon_override(self):
        p = default_params(EDGELESS1, horizon=2.0)
        assert p.horizon == 2.0
        assert np.array_equal(p.a, np.eye(2))

    def test_unknown_override_rejected(self):
        with pytest.raises(ValueError, match="unknown parameter"):
            default_params(EDGELESS1, bogus=1)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            default_params(EDGELESS2, a=np.eye(2))

    def test_asymmetric_cost_rejected(self):
        bad = np.eye(2)
        bad[0, 1] = 1e-6
        with pytest.raises(ValueError, match="symmetric"):
            default_params(EDGELESS1, q=(bad,))

    def test_nonpositive_action_weight_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            default_params(EDGELESS1, r=(0.0,))

    def test_digest_is_stable_and_sensitive(self):
        p1 = default_params(EDGELESS2)
        p2 = default_params(EDGELESS2)
        p3 = default_params(EDGELESS2, horizon=2.0)
        assert p1.digest() == p2.digest()
        assert p1.digest() != p3.digest()

    def test_lifted_terminal_weights(self):
        w = lifted_terminal_weights(2)
        assert len(w) == 2
        assert w[0].tolist() == [[0, 0, 0], [0, 1, 0], [0, 0, 1]]


class TestAssembleAugmented:
    def test_single_agent_blocks(self):
        sys = assemble_augmented(default_params(EDGELESS1))
        ones = np.ones((2, 2))
        want = np.block([[np.eye(2), ones], [np.eye(2), -np.eye(2)]])
        assert np.array_equal(sys.a_bar, want)
        assert sys.b_bar.tolist() == [1, 1, 0, 0]

    def test_input_column_lands_on_state_block(self):
        for top in (EDGELESS2, PATH3):
            p = default_params(top)
            sys = assemble_augmented(p)
            top_block = (sys.a_bar @ sys.b_bar)[:p.n]
            assert top_block == pytest.approx(p.a @ p.b_regulator)

    def test_costate_blocks_are_uncoupled(self):
        p = default_params(EDGELESS2)
        sys = assemble_augmented(p)
        n = p.n
        assert np.array_equal(sys.a_bar[n:2 * n, 2 * n:3 * n], np.zeros((n, n)))
        assert np.array_equal(sys.a_bar[2 * n:3 * n, n:2 * n], np.zeros((n, n)))

    def test_block_map_is_exhaustive(self):
        # every block of the augmented matrix is drift, coupling, cost, or
        # negative transposed drift; everything else is zero
        rng = np.random.default_rng(12)
        a = rng.standard_normal((4, 4))
        q_list = []
        for _ in range(3):
            m = rng.standard_normal((4, 4))
            q_list.append((m + m.T) / 2)
        p = default_params(PATH3, a=a, q=tuple(q_list),
                           c=rng.standard_normal(4), r=(1.0, 2.0, 0.5))
        sys = assemble_augmented(p)
        n, h = p.n, p.h
        for bi in range(h + 1):
            for bj in range(h + 1):
                block = sys.a_bar[bi * n:(bi + 1) * n, bj * n:(bj + 1) * n]
                if bi == 0 and bj == 0:
                    want = p.a
                elif bi == 0:
                    want = p.coupling(bj)
                elif bj == 0:
                    want = p.q[bi - 1]
                elif bi == bj:
                    want = -p.a.T
                else:
                    want = np.zeros((n, n))
                assert np.array_equal(block, want), (bi, bj)
        assert np.array_equal(sys.b_bar[n:], np.zeros(n * h))


class TestHamiltonianMatrix:
    def test_single_agent_blocks(self):
        m = hamiltonian_matrix(default_params(EDGELESS1))
        ones = np.ones((2, 2))
        want = np.block([[np.eye(2), -ones], [-np.eye(2), -np.eye(2)]])
        assert np.array_equal(m, want)

    def test_zero_costs_leave_only_drift_diagonal(self):
        p = still_params(EDGELESS2)
        m = hamiltonian_matrix(p)
        n = p.n
        for i in range(1, 3):
            row = m[i * n:(i + 1) * n].copy()
            row[:, i * n:(i + 1) * n] -= -p.a.T
            assert np.abs(row).max() == 0

    def test_nonzero_coupling_column_is_assembled_as_written(self):
        c = np.array([0.5, -0.25])
        p = default_params(EDGELESS1, c=c)
        m = hamiltonian_matrix(p)
        want = -np.outer(p.b_agents[0], p.b_agents[0] + c)
        assert np.array_equal(m[:2, 2:], want)
        assert np.abs(want + want.T).max() > 0  # genuinely non-symmetric block

    def test_mirrors_augmented_matrix_under_costate_sign_flip(self):
        p = default_params(PATH3)
        n, h = p.n, p.h
        flip = np.diag(np.concatenate([np.ones(n), -np.ones(n * h)]))
        sys = assemble_augmented(p)
        assert np.array_equal(flip @ hamiltonian_matrix(p) @ flip, sys.a_bar)


class TestRiccati:
    def test_zero_costs_zero_terminal_stays_zero(self):
        p = still_params(EDGELESS2, q_terminal=tuple(np.zeros((3, 3)) for _ in range(2)))
        sol = riccati_solve(p, steps=50)
        for k in sol.k:
            assert np.abs(k).max() == 0

    def test_scalar_pure_integration(self):
        # K' = -q with zero drift and coupling: backward from 0 over one unit
        times, ks, asym = _riccati_backward(
            np.zeros((1, 1)), np.zeros((1, 1)), np.eye(1), np.zeros((1, 1)),
            tf=1.0, steps=50)
        assert ks[-1][0, 0] == 0.0
        assert abs(ks[0][0, 0] - 1.0) < 1e-12
        assert asym == 0.0

    def test_terminal_node_is_exact(self):
        p = default_params(PATH3)
        sol = riccati_solve(p, steps=40)
        for i, k in enumerate(sol.k):
            assert np.array_equal(k[-1], p.q_terminal[i])

    def test_self_convergence_under_step_doubling(self):
        p = default_params(EDGELESS1)
        k_coarse = riccati_solve(p, steps=200).k[0][0]
        k_fine = riccati_solve(p, steps=400).k[0][0]
        assert np.abs(k_coarse - k_fine).max() < 1e-8

    def test_symmetry_drift_small(self):
        for top in (EDGELESS1, PAIR2, PATH3):
            sol = riccati_solve(default_params(top), steps=100)
            assert sol.max_asymmetry <= 1e-9
            for k in sol.k:
                assert np.abs(k - k.transpose(0, 2, 1)).max() <= 1e-12

    def test_interior_residual_is_second_order(self):
        # centered differences of the samples should satisfy the equation to
        # O(h^2); halving the step shrinks the defect by about 4
        p = default_params(EDGELESS1)

        def max_residual(steps):
            sol = riccati_solve(p, steps=steps)
            times, k = sol.times, sol.k[0]
            h = times[1] - times[0]
            s = p.coupling(1)
            worst = 0.0
            for idx in range(1, steps):
                dk = (k[idx + 1] - k[idx - 1]) / (2 * h)
                rhs = -p.a.T @ k[idx] - k[idx] @ p.a + k[idx] @ s @ k[idx] - p.q[0]
                worst = max(worst, np.abs(dk - rhs).max())
            return worst

        ratio = max_residual(80) / max_residual(160)
        assert 3.0 <= ratio <= 5.0

    def test_finite_escape_reported_with_time(self):
        with pytest.raises(FiniteEscapeError, match="t ="):
            _riccati_backward(np.zeros((1, 1)), np.array([[-40.0]]),
                              np.zeros((1, 1)), np.array([[2.0]]), tf=1.0, steps=400)

    def test_rejects_too_few_steps(self):
        with pytest.raises(ValueError):
            riccati_solve(default_params(EDGELESS1), steps=5)


class TestExistenceMatrix:
    def test_nilpotent_closed_form(self):
        p = still_params(EDGELESS2)
        coupling_sum = sum(p.coupling(i) for i in (1, 2))
        want = np.eye(3) + p.horizon * coupling_sum  # identity terminal weights
        assert np.abs(existence_matrix(p) - want).max() < 1e-10

    def test_tiny_horizon_is_identity(self):
        p = default_params(EDGELESS2, horizon=1e-12)
        assert np.abs(existence_matrix(p) - np.eye(3)).max() < 1e-9

    def test_against_series_oracle(self):
        p = default_params(EDGELESS1)
        m = hamiltonian_matrix(p)
        stack = np.vstack([np.eye(2), p.q_terminal[0]])
        want = (series_expm(-m * p.horizon) @ stack)[:2, :]
        assert np.abs(existence_matrix(p) - want).max() < 1e-10


class TestSolveBvp:
    def test_static_problem_pulls_terminal_weights_back(self):
        # zero dynamics: adjoints are constant at their terminal values
        n = 3
        qt = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 1.0]])
        p = still_params(EDGELESS2,
                         b_agents=(np.zeros(n), np.zeros(n)),
                         q_terminal=(qt, np.eye(n)))
        x0 = np.array([1.0, -2.0, 0.5])
        y0 = solve_bvp(p, x0, np.zeros(11))
        assert y0[:3] == pytest.approx(x0)
        assert y0[3:6] == pytest.approx(qt @ x0)
        assert y0[6:9] == pytest.approx(np.eye(3) @ x0)

    def test_zero_coupling_makes_answer_independent_of_z(self):
        p = default_params(EDGELESS2)  # c = 0
        x0 = np.array([1.0, 0.5, -0.5])
        y_a = solve_bvp(p, x0, np.zeros(21))
        y_b = solve_bvp(p, x0, np.full(21, 5.0))
        assert np.array_equal(y_a, y_b)

    def test_boundary_residual_by_forward_integration(self):
        p = default_params(EDGELESS1)
        x0 = np.array([1.0, 0.0])
        z = np.zeros(201)
        y0 = solve_bvp(p, x0, z)
        m, forcing, pmat, qmat = bvp_operators(p)
        _, ys = linalg.rk4_integrate(lambda t, y: m @ y, y0, 0.0, p.horizon, 2000)
        residual = pmat @ y0 + qmat @ ys[-1]
        residual[:2] -= x0
        assert np.abs(residual).max() <= 1e-7

    def test_boundary_residual_with_forcing(self):
        # nonzero coupling column exercises the convolution path
        c = np.array([0.4, -0.3])
        p = default_params(EDGELESS1, c=c)
        x0 = np.array([0.5, 1.0])
        grid = np.linspace(0.0, 1.0, 401)
        z = np.sin(2.0 * np.pi * grid) + 0.5
        y0 = solve_bvp(p, x0, z)
        m, forcing, pmat, qmat = bvp_operators(p)

        def zfun(t):
            return np.sin(2.0 * np.pi * t) + 0.5

        _, ys = linalg.rk4_integrate(lambda t, y: m @ y + forcing * zfun(t),
                                     y0, 0.0, p.horizon, 4000)
        residual = pmat @ y0 + qmat @ ys[-1]
        residual[:2] -= x0
        assert np.abs(residual).max() <= 1e-7

    def test_singular_boundary_operator_raises(self):
        # zero drift and running cost with terminal weight -I/2 makes the
        # existence matrix I - (1/2) * ones exactly singular
        p = still_params(EDGELESS1, q_terminal=(-0.5 * np.eye(2),))
        assert abs(np.linalg.det(existence_matrix(p))) < 1e-12
        with pytest.raises(NoEquilibriumError):
            solve_bvp(p, np.array([1.0, 0.0]), np.zeros(11))

    def test_bad_inputs(self):
        p = default_params(EDGELESS1)
        with pytest.raises(ValueError):
            solve_bvp(p, np.array([1.0]), np.zeros(11))  # wrong x0 length
        with pytest.raises(ValueError):
            solve_bvp(p, np.array([1.0, 0.0]), np.zeros(1))  # too few samples


class TestSimulate:
    def test_rest_stays_at_rest(self):
        p = default_params(EDGELESS2)
        traj = simulate(p, np.zeros(3), np.zeros(21), steps=20)
        assert np.abs(traj.states).max() == 0
        assert np.abs(traj.actions).max() == 0

    def test_zero_system_seam_gives_linear_drift(self):
        p = default_params(EDGELESS1)
        dim = p.n * (p.h + 1)
        frozen = AugmentedSystem(h=p.h, n=p.n, a_bar=np.zeros((dim, dim)),
                                 b_bar=np.concatenate([p.b_regulator, np.zeros(p.n)]))
        u = np.full(41, 2.0)
        traj = simulate(p, np.array([1.0, 0.0]), u, steps=40, system=frozen)
        y0 = traj.states[0]
        want_end = y0 + frozen.b_bar * 2.0 * p.horizon
        assert traj.states[-1] == pytest.approx(want_end, abs=1e-12)

    def test_step_doubling_self_convergence(self):
        p = default_params(PAIR2)
        u = np.ones(401)
        end_coarse = simulate(p, np.array([1.0, 0.0, 0.0]), u, steps=200).states[-1]
        end_fine = simulate(p, np.array([1.0, 0.0, 0.0]), u, steps=400).states[-1]
        assert np.abs(end_coarse - end_fine).max() < 1e-7

    def test_equilibrium_terminal_costate_condition(self):
        # unforced equilibrium flow satisfies psi_i(T) = -q_iT X(T)
        for top in (EDGELESS1, PAIR2, PATH3):
            p = default_params(top)
            n = p.n
            x0 = np.linspace(1.0, 0.5, n)
            traj = equilibrium_trajectory(p, x0, np.zeros(201), steps=800)
            x_end = traj.states[-1, :n]
            for i in range(1, p.h + 1):
                psi_end = traj.states[-1, i * n:(i + 1) * n]
                assert np.abs(psi_end + p.q_terminal[i - 1] @ x_end).max() < 1e-6

    def test_recorded_actions_follow_costates(self):
        p = default_params(PAIR2)
        u = np.ones(101)
        traj = simulate(p, np.array([1.0, 0.5, -0.5]), u, steps=100)
        n = p.n
        for i in (1, 2):
            psi = traj.states[:, i * n:(i + 1) * n]
            want = psi @ (p.b_agents[i - 1] + p.c) / p.r[i - 1]
            assert np.array_equal(traj.actions[:, i - 1], want)


class TestCost:
    def test_zero_trajectory_costs_nothing(self):
        p = default_params(EDGELESS2)
        traj = simulate(p, np.zeros(3), np.zeros(21), steps=20)
        assert cost(p, traj, 1) == 0.0
        assert cost(p, traj, 2) == 0.0

    def test_constant_state_running_term(self):
        p = default_params(EDGELESS1, q_terminal=(np.zeros((2, 2)),))
        xbar = np.array([2.0, -1.0])
        times = np.linspace(0.0, 1.0, 41)
        states = np.tile(np.concatenate([xbar, np.zeros(2)]), (41, 1))
        traj = Trajectory(times=times, states=states, u=np.zeros(41),
                          actions=np.zeros((41, 1)))
        assert cost(p, traj, 1) == pytest.approx(0.5 * float(xbar @ xbar) * 1.0)

    def test_terminal_term_uses_agent_block_only(self):
        p = default_params(EDGELESS1, q=(np.zeros((2, 2)),))
        times = np.linspace(0.0, 1.0, 11)
        states = np.zeros((11, 4))
        states[-1, 0] = 7.0   # regulator terminal state must not be charged
        states[-1, 1] = 3.0
        traj = Trajectory(times=times, states=states, u=np.zeros(11),
                          actions=np.zeros((11, 1)))
        assert cost(p, traj, 1) == pytest.approx(0.5 * 3.0 ** 2)

    def test_quadrature_against_trapezoid(self):
        p = default_params(EDGELESS1)
        times = np.linspace(0.0, 1.0, 201)
        states = np.column_stack([
            np.sin(times), np.cos(times), np.zeros_like(times), np.zeros_like(times)])
        actions = np.sin(3 * times)[:, None]
        traj = Trajectory(times=times, states=states, u=np.zeros_like(times),
                          actions=actions)
        running = states[:, 0] ** 2 + states[:, 1] ** 2 + actions[:, 0] ** 2
        x_f = states[-1, 1:2]
        trapezoid = 0.5 * np.trapezoid(running, times) + 0.5 * float(x_f @ x_f)
        assert abs(cost(p, traj, 1) - trapezoid) < 1e-6

    def test_player_index_checked(self):
        p = default_params(EDGELESS1)
        traj = simulate(p, np.zeros(2), np.zeros(21), steps=20)
        with pytest.raises(ValueError):
            cost(p, traj, 2)


class TestNashDeviationCheck:
    def test_zero_eps_gives_exact_zeros(self):
        p = default_params(EDGELESS1, q_terminal=lifted_terminal_weights(1))
        report = nash_deviation_check(p, np.array([1.0, 0.0]), np.zeros(51),
                                      trials=3, eps=0.0, steps=120)
        assert np.abs(report.deltas).max() == 0.0
        assert report.certified

    def test_certified_without_regulator_input(self):
        p = default_params(EDGELESS1, q_terminal=lifted_terminal_weights(1))
        report = nash_deviation_check(p, np.array([1.0, 0.0]), np.zeros(101),
                                      trials=8, eps=1e-2, steps=300)
        assert report.min_delta >= -1e-6
        assert report.certified

    def test_certified_with_regulator_input(self):
        p = default_params(PAIR2, q_terminal=lifted_terminal_weights(2))
        report = nash_deviation_check(p, np.array([1.0, 0.5, -0.3]), np.ones(101),
                                      trials=8, eps=1e-2, steps=300)
        assert report.min_delta >= -1e-6
        assert report.certified

    def test_regulator_charging_terminal_weights_break_certification(self):
        # identity terminal weights charge the regulator slot, which the
        # agent-block terminal cost cannot see; a genuine first-order
        # improvement then exists and the check must say so
        p = default_params(EDGELESS1)  # q_terminal = identity
        report = nash_deviation_check(p, np.array([1.0, 0.0]), np.zeros(101),
                                      trials=8, eps=1e-2, steps=300)
        assert report.min_delta < -1e-4
        assert not report.certified

    def test_deterministic_given_seed(self):
        p = default_params(EDGELESS1, q_terminal=lifted_terminal_weights(1))
        kwargs = dict(trials=4, eps=1e-3, steps=120, seed=7)
        a = nash_deviation_check(p, np.array([1.0, 0.0]), np.zeros(41), **kwargs)
        b = nash_deviation_check(p, np.array([1.0, 0.0]), np.zeros(41), **kwargs)
        assert np.array_equal(a.deltas, b.deltas)

    def test_argument_validation(self):
        p = default_params(EDGELESS1)
        with pytest.raises(ValueError):
            nash_deviation_check(p, np.zeros(2), np.zeros(11), trials=0, eps=1e-2)
        with pytest.raises(ValueError):
            nash_deviation_check(p, np.zeros(2), np.zeros(11), trials=1, eps=-1.0)


class TestTrajectoryCsv:
    def test_header_and_significant_digits(self):
        p = default_params(PAIR2)
        traj = simulate(p, np.array([1.0, 0.0, 0.0]), np.ones(21), steps=20)
        text = trajectory_csv(p, traj)
        lines = text.splitlines()
        assert lines[0] == ("t,x_r,x_1,x_2,psi_1_r,psi_1_1,psi_1_2,"
                            "psi_2_r,psi_2_1,psi_2_2,u,u_1,u_2")
        assert len(lines) == 22
        first = lines[1].split(",")
        assert len(first) == 13
        # round-trip at full precision
        assert float(first[1]) == traj.states[0, 0]

    def test_write(self, tmp_path):
        from gbcslab.lqgame import write_trajectory_csv
        p = default_params(EDGELESS1)
        traj = simulate(p, np.array([1.0, 0.0]), np.zeros(21), steps=20)
        out = tmp_path / "traj.csv"
        write_trajectory_csv(p, traj, out)
        assert out.read_text().startswith("t,x_r,x_1,psi_1_r,psi_1_1,u,u_1")
