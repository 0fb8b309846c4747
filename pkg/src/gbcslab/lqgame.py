"""Finite-horizon linear-quadratic game machinery on a regulator-agents graph.

One regulator steers the scalar-per-node state X = (x_r, x_1, ..., x_H); the
H agents respond with open-loop equilibrium actions.  Two equivalent costate
sign conventions appear in the formulas and both are kept, each where it is
simplest:

* adjoint convention (phi): u_i = -r_i^{-1} (b_i + c)^T phi_i,
  phi_i' = -q_i x - a^T phi_i, phi_i(T) = q_iT x(T).  Used by
  ``hamiltonian_matrix``, ``existence_matrix`` and ``solve_bvp``.
* flipped convention (psi = -phi): u_i = r_i^{-1} (b_i + c)^T psi_i,
  psi_i' = q_i X - a^T psi_i, psi_i(T) = -q_iT X(T).  Used by the augmented
  system (``assemble_augmented``), ``simulate`` and ``Trajectory``.

``solve_bvp`` returns adjoint-convention costates; the simulation entry
points flip the sign once at the boundary.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from . import linalg
from .errors import FiniteEscapeError, NoEquilibriumError, SingularMatrixError
from .topology import Topology, strategy_vector

RICCATI_BLOWUP = 1e12


@dataclass(frozen=True)
class GbcsParams:
    """All data of one game: dynamics, couplings, costs, horizon.

    ``b_agents[i-1]`` is agent i's input column (the strategy vector when the
    game comes from a topology).  ``b_regulator`` is the regulator's column in
    the augmented input; ``c`` is the regulator coupling that enters the
    equilibrium action formula and the boundary-value forcing.
    """

    h: int
    a: np.ndarray
    b_agents: tuple[np.ndarray, ...]
    b_regulator: np.ndarray
    c: np.ndarray
    q: tuple[np.ndarray, ...]
    q_terminal: tuple[np.ndarray, ...]
    r: tuple[float, ...]
    horizon: float

    def __post_init__(self):
        n = self.h + 1
        if self.h < 1:
            raise ValueError(f"need at least one agent, got h={self.h}")
        a = linalg.as_matrix(self.a, "a", square=True)
        if a.shape != (n, n):
            raise ValueError(f"a must be {n}x{n}, got {a.shape}")
        b_agents = tuple(linalg.as_vector(b, f"b_agents[{k}]") for k, b in enumerate(self.b_agents))
        if len(b_agents) != self.h:
            raise ValueError(f"need {self.h} agent input columns, got {len(b_agents)}")
        for k, b in enumerate(b_agents):
            if b.shape != (n,):
                raise ValueError(f"b_agents[{k}] must have length {n}, got {b.shape}")
        b_reg = linalg.as_vector(self.b_regulator, "b_regulator")
        c = linalg.as_vector(self.c, "c")
        if b_reg.shape != (n,) or c.shape != (n,):
            raise ValueError(f"b_regulator and c must have length {n}")
        q = tuple(linalg.as_matrix(m, f"q[{k}]", square=True) for k, m in enumerate(self.q))
        q_terminal = tuple(linalg.as_matrix(m, f"q_terminal[{k}]", square=True)
                           for k, m in enumerate(self.q_terminal))
        if len(q) != self.h or len(q_terminal) != self.h:
            raise ValueError(f"need {self.h} cost matrices in q and q_terminal")
        for name, mats in (("q", q), ("q_terminal", q_terminal)):
            for k, m in enumerate(mats):
                if m.shape != (n, n):
                    raise ValueError(f"{name}[{k}] must be {n}x{n}, got {m.shape}")
                if np.abs(m - m.T).max() > 1e-12:
                    raise ValueError(f"{name}[{k}] is not symmetric within 1e-12")
        r = tuple(float(x) for x in self.r)
        if len(r) != self.h:
            raise ValueError(f"need {self.h} action weights, got {len(r)}")
        if any(x <= 0 for x in r):
            raise ValueError("all action weights r must be positive")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        for arr in (a, b_reg, c) + b_agents + q + q_terminal:
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b_agents", b_agents)
        object.__setattr__(self, "b_regulator", b_reg)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "q_terminal", q_terminal)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def n(self) -> int:
        """State dimension: regulator plus agents."""
        return self.h + 1

    def coupling(self, i: int) -> np.ndarray:
        """S_i = b_i r_i^{-1} (b_i + c)^T, agent i's feedback block (i is 1-based)."""
        b = self.b_agents[i - 1]
        return np.outer(b, b + self.c) / self.r[i - 1]

    def digest(self) -> str:
        """Short stable hash of every numeric field, for report provenance."""
        hasher = hashlib.sha256()
        for arr in (self.a, self.b_regulator, self.c, *self.b_agents, *self.q,
                    *self.q_terminal):
            hasher.update(np.ascontiguousarray(arr, dtype=float).tobytes())
        hasher.update(np.asarray(self.r, dtype=float).tobytes())
        hasher.update(np.asarray([self.horizon], dtype=float).tobytes())
        return hasher.hexdigest()[:16]


def default_params(top: Topology, **overrides) -> GbcsParams:
    """Game data for a topology with the standard simplifications.

    Drift is the identity, the regulator coupling c is zero, action weights
    are 1, agent input columns are the strategy vectors, the regulator column
    is all ones, and all cost weights are identity with horizon 1.  Any field
    can be overridden by keyword.
    """
    h = top.agent_count
    n = h + 1
    fields = dict(
        h=h,
        a=np.eye(n),
        b_agents=tuple(strategy_vector(top, i).astype(float) for i in range(1, h + 1)),
        b_regulator=np.ones(n),
        c=np.zeros(n),
        q=tuple(np.eye(n) for _ in range(h)),
        q_terminal=tuple(np.eye(n) for _ in range(h)),
        r=tuple(1.0 for _ in range(h)),
        horizon=1.0,
    )
    unknown = set(overrides) - set(fields)
    if unknown:
        raise ValueError(f"unknown parameter overrides: {sorted(unknown)}")
    fields.update(overrides)
    if "h" in overrides and overrides["h"] != h:
        raise ValueError("h cannot be overridden away from the topology's agent count")
    return GbcsParams(**fields)


def lifted_terminal_weights(h: int, agent_block=None) -> tuple[np.ndarray, ...]:
    """Terminal weights that charge only the agent sub-state.

    Embeds an HxH weight (identity by default) into an (H+1)x(H+1) matrix
    with a zero regulator row and column.  These are the weights under which
    the terminal cost read off the agent block coincides with the terminal
    condition the equilibrium boundary-value problem enforces, which is what
    a clean unilateral-deviation certification needs.
    """
    block = np.eye(h) if agent_block is None else linalg.as_matrix(agent_block, square=True)
    if block.shape != (h, h):
        raise ValueError(f"agent_block must be {h}x{h}, got {block.shape}")
    w = np.zeros((h + 1, h + 1))
    w[1:, 1:] = block
    return tuple(w.copy() for _ in range(h))


@dataclass(frozen=True)
class AugmentedSystem:
    """Joint state-costate dynamics (a_bar, b_bar) under the flipped convention."""

    h: int
    n: int
    a_bar: np.ndarray
    b_bar: np.ndarray

    def __post_init__(self):
        dim = self.n * (self.h + 1)
        if self.a_bar.shape != (dim, dim) or self.b_bar.shape != (dim,):
            raise ValueError("augmented system blocks have inconsistent shapes")


def assemble_augmented(p: GbcsParams) -> AugmentedSystem:
    """Block layout: row 0 = [a, S_1, ..., S_H]; row i = [q_i, ..., -a^T, ...].

    The input column b_bar carries the regulator column on the state block and
    zeros on every costate block.
    """
    n, h = p.n, p.h
    dim = n * (h + 1)
    a_bar = np.zeros((dim, dim))
    a_bar[:n, :n] = p.a
    for j in range(1, h + 1):
        a_bar[:n, j * n:(j + 1) * n] = p.coupling(j)
    for i in range(1, h + 1):
        a_bar[i * n:(i + 1) * n, :n] = p.q[i - 1]
        a_bar[i * n:(i + 1) * n, i * n:(i + 1) * n] = -p.a.T
    b_bar = np.zeros(dim)
    b_bar[:n] = p.b_regulator
    a_bar.setflags(write=False)
    b_bar.setflags(write=False)
    return AugmentedSystem(h=h, n=n, a_bar=a_bar, b_bar=b_bar)


def hamiltonian_matrix(p: GbcsParams) -> np.ndarray:
    """State-adjoint system matrix of the equilibrium conditions.

    Row 0 = [a, -S_1, ..., -S_H]; row i = [-q_i, ..., -a^T at the diagonal].
    This is the adjoint-convention mirror of the augmented matrix.
    """
    n, h = p.n, p.h
    dim = n * (h + 1)
    m = np.zeros((dim, dim))
    m[:n, :n] = p.a
    for j in range(1, h + 1):
        m[:n, j * n:(j + 1) * n] = -p.coupling(j)
    for i in range(1, h + 1):
        m[i * n:(i + 1) * n, :n] = -p.q[i - 1]
        m[i * n:(i + 1) * n, i * n:(i + 1) * n] = -p.a.T
    return m


def existence_matrix(p: GbcsParams) -> np.ndarray:
    """The n x n boundary map whose invertibility is equivalent to existence
    (and uniqueness) of an open-loop equilibrium action for every start state.

    Computed as the state row-block of exp(-M T) applied to the stack
    (I; q_1T; ...; q_HT) in the adjoint convention.
    """
    n, h = p.n, p.h
    m = hamiltonian_matrix(p)
    stack = np.vstack([np.eye(n)] + [qt for qt in p.q_terminal])
    e = linalg.expm(-m * p.horizon)
    return e[:n, :] @ stack


def bvp_operators(p: GbcsParams):
    """(M, N, P, Q) of the two-point boundary problem y' = M y + N z,
    P y(0) + Q y(T) = (x0; 0; ...; 0), in the adjoint convention."""
    n, h = p.n, p.h
    dim = n * (h + 1)
    m = hamiltonian_matrix(p)
    forcing = np.zeros(dim)
    forcing[:n] = p.c
    pmat = np.zeros((dim, dim))
    pmat[:n, :n] = np.eye(n)
    qmat = np.zeros((dim, dim))
    for i in range(1, h + 1):
        qmat[i * n:(i + 1) * n, :n] = -p.q_terminal[i - 1]
        qmat[i * n:(i + 1) * n, i * n:(i + 1) * n] = np.eye(n)
    return m, forcing, pmat, qmat


def _as_input_samples(z, name: str) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size < 2:
        raise ValueError(f"{name} must be a 1-D array of at least 2 uniform-grid samples")
    if not np.all(np.isfinite(z)):
        raise ValueError(f"{name} contains non-finite samples")
    return z


def _interp_uniform(samples: np.ndarray, t: float, tf: float) -> float:
    """Linear interpolation of uniform-grid samples on [0, tf]."""
    m = samples.size - 1
    pos = min(max(t / tf, 0.0), 1.0) * m
    k = min(int(pos), m - 1)
    frac = pos - k
    return samples[k] * (1.0 - frac) + samples[k + 1] * frac


def solve_bvp(p: GbcsParams, x0, z) -> np.ndarray:
    """Initial state-adjoint stack y(0) of the equilibrium boundary problem.

    ``z`` is the regulator input sampled on a uniform grid over [0, horizon];
    it forces the problem through the coupling column c (with c = 0 the
    answer is independent of z).  The convolution of the forcing with the
    transition matrix is integrated by composite Simpson on the z grid.

    Raises NoEquilibriumError when the boundary operator is singular, which
    by the existence theory means some start states admit no (unique)
    open-loop equilibrium.
    """
    n = p.n
    x0 = linalg.as_vector(x0, "x0")
    if x0.shape != (n,):
        raise ValueError(f"x0 must have length {n}, got {x0.shape}")
    z = _as_input_samples(z, "z")
    m, forcing, pmat, qmat = bvp_operators(p)
    tf = p.horizon
    dim = m.shape[0]
    rhs = np.zeros(dim)
    rhs[:n] = x0

    if np.any(forcing != 0.0) and np.any(z != 0.0):
        # w = int_0^T exp(M (T - s)) N z(s) ds, nodes built by stepping the
        # transition matrix backward across the uniform z grid.
        grid = np.linspace(0.0, tf, z.size)
        step = linalg.expm(m * (tf / (z.size - 1)))
        nodes = np.empty((z.size, dim))
        trans = np.eye(dim)
        for k in range(z.size - 1, -1, -1):
            nodes[k] = trans @ forcing * z[k]
            if k > 0:
                trans = trans @ step
        w = simpson(nodes, x=grid, axis=0)
    else:
        w = np.zeros(dim)

    e_back = linalg.expm(-m * tf)
    try:
        v, _ = linalg.solve_linear(pmat @ e_back + qmat, rhs - qmat @ w)
    except SingularMatrixError as exc:
        raise NoEquilibriumError(
            f"equilibrium boundary operator is singular over horizon {tf:g}: {exc}") from exc
    return e_back @ v


@dataclass(frozen=True)
class Trajectory:
    """Sampled joint trajectory in the flipped (psi) convention.

    ``states`` rows are (X; psi_1; ...; psi_H); ``u`` is the regulator input
    at the grid nodes; ``actions[:, i-1]`` is agent i's action series.
    """

    times: np.ndarray
    states: np.ndarray
    u: np.ndarray
    actions: np.ndarray

    def __post_init__(self):
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be 1-D and strictly increasing")
        k = self.times.size
        if self.states.shape[0] != k or self.u.shape != (k,) or self.actions.shape[0] != k:
            raise ValueError("trajectory arrays disagree on the number of samples")


def _actions_from_states(p: GbcsParams, states: np.ndarray) -> np.ndarray:
    n = p.n
    cols = []
    for i in range(1, p.h + 1):
        psi = states[:, i * n:(i + 1) * n]
        cols.append(psi @ (p.b_agents[i - 1] + p.c) / p.r[i - 1])
    return np.column_stack(cols)


def _flip_costates(p: GbcsParams, y: np.ndarray) -> np.ndarray:
    out = y.copy()
    out[p.n:] = -out[p.n:]
    return out


def simulate(p: GbcsParams, x0, u, steps: int,
             system: AugmentedSystem | None = None) -> Trajectory:
    """Drive the augmented system with the regulator input u.

    The initial costates come from ``solve_bvp`` (with z = u) through the
    sign-flip adapter; the augmented linear system is then integrated forward
    by fixed-step RK4 with u linearly interpolated between its grid samples.
    Recorded agent actions are r_i^{-1} (b_i + c)^T psi_i(t).  A prebuilt
    ``system`` may be supplied (reuse across calls, or substitution in tests).
    """
    if steps < 10:
        raise ValueError(f"steps must be >= 10, got {steps}")
    u = _as_input_samples(u, "u")
    sys = assemble_augmented(p) if system is None else system
    y0 = _flip_costates(p, solve_bvp(p, x0, u))
    tf = p.horizon

    def rhs(t, y):
        return sys.a_bar @ y + sys.b_bar * _interp_uniform(u, t, tf)

    times, states = linalg.rk4_integrate(rhs, y0, 0.0, tf, steps)
    u_nodes = np.array([_interp_uniform(u, t, tf) for t in times])
    return Trajectory(times=times, states=states, u=u_nodes,
                      actions=_actions_from_states(p, states))


def equilibrium_trajectory(p: GbcsParams, x0, z, steps: int) -> Trajectory:
    """The closed equilibrium flow for a given regulator schedule z.

    Unlike ``simulate`` (which drives the augmented system through the
    regulator column b_regulator), this integrates the same dynamics the
    boundary-value problem is written in, with z entering through the
    coupling column c, so the terminal costate conditions hold along the
    result.  This is the trajectory deviation checks certify.
    """
    if steps < 10:
        raise ValueError(f"steps must be >= 10, got {steps}")
    z = _as_input_samples(z, "z")
    sys = assemble_augmented(p)
    y0 = _flip_costates(p, solve_bvp(p, x0, z))
    tf = p.horizon
    forcing = np.zeros(sys.a_bar.shape[0])
    forcing[:p.n] = p.c

    def rhs(t, y):
        return sys.a_bar @ y + forcing * _interp_uniform(z, t, tf)

    times, states = linalg.rk4_integrate(rhs, y0, 0.0, tf, steps)
    z_nodes = np.array([_interp_uniform(z, t, tf) for t in times])
    return Trajectory(times=times, states=states, u=z_nodes,
                      actions=_actions_from_states(p, states))


def cost(p: GbcsParams, traj: Trajectory, i: int) -> float:
    """Player i's cost along a trajectory.

    Running term: (1/2) integral of X^T q_i X + r_i u_i^2, by composite
    Simpson on the trajectory grid.  Terminal term: (1/2) x_F^T W x_F on the
    agent sub-state x_F = X(T)[1:], with W the agent block of q_terminal[i].
    """
    if not 1 <= i <= p.h:
        raise ValueError(f"player index {i} out of range 1..{p.h}")
    n = p.n
    if traj.states.shape[1] < n:
        raise ValueError("trajectory state dimension does not match the game")
    x = traj.states[:, :n]
    ui = traj.actions[:, i - 1]
    qi = p.q[i - 1]
    running = np.einsum("kj,jl,kl->k", x, qi, x) + p.r[i - 1] * ui ** 2
    integral = float(simpson(running, x=traj.times))
    x_final = x[-1, 1:]
    w = p.q_terminal[i - 1][1:, 1:]
    return 0.5 * integral + 0.5 * float(x_final @ w @ x_final)


# --- Riccati equations ---------------------------------------------------


@dataclass(frozen=True)
class RiccatiSolution:
    """Backward solutions K_i(t) on a shared grid, terminal node exact."""

    times: np.ndarray
    k: tuple[np.ndarray, ...]
    max_asymmetry: float


def _riccati_backward(a, s_tilde, q, q_term, tf, steps):
    """Backward RK4 on K' = -a^T K - K a + K s K - q from K(tf) = q_term.

    Symmetrizes after every step and reports the largest asymmetry removed.
    Raises FiniteEscapeError naming the time at which entries pass 1e12.
    """
    n = a.shape[0]
    times = np.linspace(0.0, tf, steps + 1)
    out = np.empty((steps + 1, n, n))
    out[steps] = q_term
    h = -tf / steps
    max_asym = 0.0
    at = a.T

    def f(k):
        return -at @ k - k @ a + k @ s_tilde @ k - q

    k = q_term.copy()
    for idx in range(steps, 0, -1):
        k1 = f(k)
        k2 = f(k + (h / 2.0) * k1)
        k3 = f(k + (h / 2.0) * k2)
        k4 = f(k + h * k3)
        k = k + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        asym = float(np.abs(k - k.T).max()) / 2.0
        max_asym = max(max_asym, asym)
        k = (k + k.T) / 2.0
        if not np.all(np.isfinite(k)) or np.abs(k).max() > RICCATI_BLOWUP:
            raise FiniteEscapeError(
                f"Riccati solution escaped at t = {times[idx - 1]:g}")
        out[idx - 1] = k
    return times, out, max_asym


def riccati_solve(p: GbcsParams, steps: int) -> RiccatiSolution:
    """Solve all H coupled-form Riccati equations backward from the horizon.

    Player i's equation uses its own coupling S_i; the equations do not
    interact, so they are integrated independently on a shared grid.
    """
    if steps < 10:
        raise ValueError(f"steps must be >= 10, got {steps}")
    times = None
    ks = []
    worst = 0.0
    for i in range(1, p.h + 1):
        times, k, asym = _riccati_backward(
            p.a, p.coupling(i), p.q[i - 1], p.q_terminal[i - 1], p.horizon, steps)
        ks.append(k)
        worst = max(worst, asym)
    return RiccatiSolution(times=times, k=tuple(ks), max_asymmetry=worst)


# --- equilibrium certification -------------------------------------------


@dataclass(frozen=True)
class DeviationReport:
    """Unilateral-deviation audit of an equilibrium trajectory.

    ``deltas[i-1, t]`` is J_i(deviation) - J_i(equilibrium) for trial t of
    player i.  ``certified`` means no trial improved its player's cost by
    more than the threshold.
    """

    deltas: np.ndarray
    min_delta: float
    certified: bool
    eps: float
    seed: int
    threshold: float


def _fourier_perturbation(coeffs: np.ndarray, tf: float):
    """Smooth test signal: low-order random Fourier polynomial on [0, tf]."""
    modes = coeffs.size // 2

    def pert(t):
        w = 2.0 * np.pi * t / tf
        total = 0.0
        for k in range(modes):
            total += coeffs[2 * k] * np.cos(k * w) + coeffs[2 * k + 1] * np.sin(k * w)
        return total

    return pert


def nash_deviation_check(p: GbcsParams, x0, z, trials: int, eps: float,
                         seed: int = 0, steps: int = 400,
                         threshold: float = 1e-6) -> DeviationReport:
    """Certify the computed equilibrium by random unilateral deviations.

    For each player, the state is re-integrated with that player's action
    replaced by action + eps * perturbation (all other actions and the
    regulator schedule fixed as functions of time) and the player's cost is
    compared against the same-discretization baseline.  Perturbations are
    seeded random Fourier polynomials, so reports are reproducible.

    A clean certification presumes terminal weights that charge only the
    agent block (see ``lifted_terminal_weights``); with weights that also
    charge the regulator slot, the terminal cost read off the agent sub-state
    no longer matches the boundary conditions of the equilibrium, and genuine
    first-order cost decreases appear.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    z = _as_input_samples(z, "z")
    eq = equilibrium_trajectory(p, x0, z, steps)
    tf = p.horizon
    times = eq.times
    x0 = linalg.as_vector(x0, "x0")

    def deviated_state(i, pert):
        """Re-integrate the game state with player i's action perturbed."""

        def rhs(t, x):
            dx = p.a @ x + p.c * _interp_uniform(z, t, tf)
            for j in range(1, p.h + 1):
                uj = _interp_uniform(eq.actions[:, j - 1], t, tf)
                if j == i:
                    uj = uj + pert(t)
                dx = dx + p.b_agents[j - 1] * uj
            return dx

        _, xs = linalg.rk4_integrate(rhs, x0, 0.0, tf, steps)
        return xs

    def player_cost(i, xs, ui):
        qi = p.q[i - 1]
        running = np.einsum("kj,jl,kl->k", xs, qi, xs) + p.r[i - 1] * ui ** 2
        x_final = xs[-1, 1:]
        w = p.q_terminal[i - 1][1:, 1:]
        return 0.5 * float(simpson(running, x=times)) + 0.5 * float(x_final @ w @ x_final)

    rng = np.random.default_rng(seed)
    deltas = np.empty((p.h, trials))
    for i in range(1, p.h + 1):
        base_states = deviated_state(i, lambda t: 0.0)
        base_cost = player_cost(i, base_states, eq.actions[:, i - 1])
        for t_idx in range(trials):
            pert = _fourier_perturbation(rng.standard_normal(6), tf)
            xs = deviated_state(i, lambda t: eps * pert(t))
            ui = eq.actions[:, i - 1] + eps * np.array([pert(t) for t in times])
            deltas[i - 1, t_idx] = player_cost(i, xs, ui) - base_cost
    min_delta = float(deltas.min())
    return DeviationReport(deltas=deltas, min_delta=min_delta,
                           certified=bool(min_delta >= -threshold),
                           eps=float(eps), seed=int(seed), threshold=float(threshold))


# --- trajectory export ----------------------------------------------------


def trajectory_csv(p: GbcsParams, traj: Trajectory) -> str:
    """Render a trajectory as CSV: t, state, costates, regulator input, actions."""
    n, h = p.n, p.h
    header = ["t", "x_r"] + [f"x_{i}" for i in range(1, h + 1)]
    for i in range(1, h + 1):
        header += [f"psi_{i}_r"] + [f"psi_{i}_{j}" for j in range(1, h + 1)]
    header += ["u"] + [f"u_{i}" for i in range(1, h + 1)]
    lines = [",".join(header)]
    for k in range(traj.times.size):
        row = [traj.times[k], *traj.states[k], traj.u[k], *traj.actions[k]]
        lines.append(",".join(f"{x:.17g}" for x in row))
    return "\n".join(lines) + "\n"


def write_trajectory_csv(p: GbcsParams, traj: Trajectory, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(trajectory_csv(p, traj))
