"""Closed-loop network simulation and the two benchmark model builders.

Discrete dynamics iterate the Kronecker-assembled closed-loop matrix; the
continuous benchmarks (a supercapacitor voltage network and a DC microgrid of
identical DGUs) integrate with fixed-step RK4. Affine vector fields get an
exact per-step propagator so long horizons stay cheap.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .consensus import LimasModel
from .errors import DimensionMismatch, NonFiniteState
from .graph import WeightedGraph, laplacian

DIVERGENCE_LIMIT = 1e9


@dataclass(frozen=True)
class SimulationTrace:
    """Uniformly sampled trajectory with consensus diagnostics.

    `states` is (T, N*n) with agents stacked agent-major; `average` is the
    per-step mean agent state (T, n) and `consensus_error` the per-step
    max_i ||x_i - mean||_inf.
    """

    times: np.ndarray
    states: np.ndarray
    average: np.ndarray
    consensus_error: np.ndarray

    @property
    def consensus_value(self):
        """Average agent state at the final sample."""
        return self.average[-1]

    def deviation(self):
        """Per-step disagreement vector x - 1 kron mean, shape (T, N*n)."""
        n = self.average.shape[1]
        n_agents = self.states.shape[1] // n
        return self.states - np.tile(self.average, (1, n_agents))


@dataclass(frozen=True)
class AffineField:
    """Vector field x' = M x + offset with an exact RK4 one-step propagator."""

    m_mat: np.ndarray
    offset: np.ndarray

    def __call__(self, x):
        return self.m_mat @ x + self.offset

    def rk4_step_map(self, dt):
        """One-step matrices (R, s) with x+ = R x + s, exact for classical RK4."""
        n = self.m_mat.shape[0]
        eye = np.eye(n)
        hm = dt * self.m_mat
        r = eye + hm @ (eye + hm @ (eye + hm @ (eye + hm / 4.0) / 3.0) / 2.0)
        # The same truncated-exponential polynomial applied to the offset:
        # s = dt*(I + hM/2 + (hM)^2/6 + (hM)^3/24) offset.
        s = dt * (
            eye + hm @ (eye + hm @ (eye + hm / 4.0) / 3.0) / 2.0
        ) @ self.offset
        return r, s


@dataclass(frozen=True)
class SupercapParams:
    """Supercapacitor bank: identical cells with leakage, coupled by line resistances."""

    capacitance: float = 10.0
    leak_resistance: float = 5e3
    sample_time: float = 1e-4

    def __post_init__(self):
        if min(self.capacitance, self.leak_resistance, self.sample_time) <= 0.0:
            raise ValueError("capacitance, leak resistance and sample time must be positive")

    @property
    def a(self):
        return 1.0 - self.sample_time / (self.leak_resistance * self.capacitance)


@dataclass(frozen=True)
class DcmgParams:
    """DC microgrid of identical buck-converter DGUs with primary voltage loops."""

    r_t: float = 0.2
    c_t: float = 2.2e-3
    l_t: float = 1.8e-3
    r_load: float = 9.0
    k_pr: tuple = (-2.13, -0.16, 13.55)
    v_ref: float = 48.0
    sample_time: float = 1e-4

    def __post_init__(self):
        if min(self.r_t, self.c_t, self.l_t, self.r_load, self.sample_time) <= 0.0:
            raise ValueError("electrical parameters must be positive")
        if len(self.k_pr) != 3:
            raise DimensionMismatch("primary gain must have three entries")

    def a_ct(self):
        """Continuous-time closed-primary-loop DGU matrix (states V, I_t, v)."""
        k1, k2, k3 = self.k_pr
        return np.array(
            [
                [-1.0 / (self.r_load * self.c_t), 1.0 / self.c_t, 0.0],
                [(k1 - 1.0) / self.l_t, (k2 - self.r_t) / self.l_t, k3 / self.l_t],
                [-1.0, 0.0, 0.0],
            ]
        )


def closed_loop_matrix(model, gain):
    """Network closed-loop matrix I kron A - L_p kron A_p + L_c kron BK."""
    gain = np.asarray(gain, dtype=float).reshape(-1)
    if gain.shape[0] != model.order:
        raise DimensionMismatch(f"gain length {gain.shape[0]} does not match order {model.order}")
    n = model.n_agents
    bk = np.outer(model.b_vec, gain)
    return (
        np.kron(np.eye(n), model.a_mat)
        - np.kron(model.lap_p(), model.ap_mat)
        + np.kron(model.lap_c(), bk)
    )


def _make_trace(times, states, n):
    states = np.asarray(states)
    n_agents = states.shape[1] // n
    per_agent = states.reshape(states.shape[0], n_agents, n)
    average = per_agent.mean(axis=1)
    err = np.abs(per_agent - average[:, None, :]).max(axis=2).max(axis=1)
    return SimulationTrace(np.asarray(times), states, average, err)


def simulate_discrete(model, gain, x0, steps):
    """Iterate the discrete closed loop for `steps` steps (time unit = sample time)."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    m_cl = closed_loop_matrix(model, gain)
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.shape[0] != m_cl.shape[0]:
        raise DimensionMismatch(f"x0 length {x.shape[0]} does not match network size {m_cl.shape[0]}")
    states = np.empty((steps + 1, x.shape[0]))
    states[0] = x
    for t in range(steps):
        x = m_cl @ x
        if not np.all(np.isfinite(x)) or np.abs(x).max() > DIVERGENCE_LIMIT:
            raise NonFiniteState(f"state diverged at step {t + 1}")
        states[t + 1] = x
    times = np.arange(steps + 1, dtype=float)
    return _make_trace(times, states, model.order)


def simulate_continuous(deriv, x0, t_end, dt, order=None):
    """Fixed-step RK4 integration of `deriv` from 0 to `t_end`.

    `deriv` is a callable x -> dx/dt; an AffineField is advanced through its
    exact one-step propagator instead of four field evaluations per step.
    `order` is the per-agent state dimension for the consensus diagnostics
    (defaults to 1).
    """
    if dt <= 0.0 or t_end < dt:
        raise ValueError("need dt > 0 and t_end >= dt")
    x = np.asarray(x0, dtype=float).reshape(-1)
    steps = int(round(t_end / dt))
    states = np.empty((steps + 1, x.shape[0]))
    states[0] = x
    if isinstance(deriv, AffineField):
        r, s = deriv.rk4_step_map(dt)
        for t in range(steps):
            x = r @ x + s
            if not np.all(np.isfinite(x)) or np.abs(x).max() > DIVERGENCE_LIMIT:
                raise NonFiniteState(f"state diverged at t={(t + 1) * dt:g}")
            states[t + 1] = x
    else:
        for t in range(steps):
            k1 = deriv(x)
            k2 = deriv(x + 0.5 * dt * k1)
            k3 = deriv(x + 0.5 * dt * k2)
            k4 = deriv(x + dt * k3)
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)) or np.abs(x).max() > DIVERGENCE_LIMIT:
                raise NonFiniteState(f"state diverged at t={(t + 1) * dt:g}")
            states[t + 1] = x
    times = dt * np.arange(steps + 1)
    return _make_trace(times, states, order if order is not None else 1)


def build_supercap(params, g_p, g_c):
    """Scalar voltage-network model from the supercapacitor benchmark.

    Physical edge weights are conductances 1/R_ij of the given line
    resistances (stored as weights on `g_p`); both Laplacians are scaled by
    T_s/C so the discrete update is a I - L_p + k L_c acting on voltages.
    """
    scale = params.sample_time / params.capacitance
    return LimasModel(
        np.array([[params.a]]),
        np.array([[1.0]]),
        np.array([1.0]),
        g_p.scaled(scale),
        g_c.scaled(scale),
    )


def build_dcmg(params, g_p, g_c):
    """Third-order DGU network model from the microgrid benchmark.

    Forward-Euler discretization of the closed-primary-loop DGU dynamics:
    A = I + T_s A_ct, physical coupling only on the voltage state through
    A_p = diag(T_s/C_t, 0, 0), input channel B = [0, 0, T_s].
    """
    ts = params.sample_time
    a = np.eye(3) + ts * params.a_ct()
    a_p = np.diag([ts / params.c_t, 0.0, 0.0])
    b = np.array([0.0, 0.0, ts])
    return LimasModel(a, a_p, b, g_p, g_c)


def supercap_field(params, g_p, g_c, gain):
    """Continuous closed-loop voltage field of the supercapacitor network."""
    k = float(np.asarray(gain).reshape(-1)[0])
    n = g_p.n_nodes
    m = (
        -np.eye(n) / params.leak_resistance
        - laplacian(g_p)
        + k * laplacian(g_c)
    ) / params.capacitance
    return AffineField(m, np.zeros(n))


def dcmg_field(params, g_p, g_c, gain):
    """Continuous closed-loop field of the microgrid with the secondary controller.

    The secondary controller shifts each DGU's voltage reference by
    K (L_c x)_i, entering through the integrator state; the constant nominal
    reference appears as the affine offset.
    """
    gain = np.asarray(gain, dtype=float).reshape(-1)
    if gain.shape[0] != 3:
        raise DimensionMismatch(f"expected a 3-entry gain, got {gain.shape[0]}")
    n = g_p.n_nodes
    coupling = np.zeros((3, 3))
    coupling[0, 0] = 1.0 / params.c_t
    b_ct = np.array([0.0, 0.0, 1.0])
    m = (
        np.kron(np.eye(n), params.a_ct())
        - np.kron(laplacian(g_p), coupling)
        + np.kron(laplacian(g_c), np.outer(b_ct, gain))
    )
    offset = np.kron(np.ones(n), np.array([0.0, 0.0, params.v_ref]))
    return AffineField(m, offset)


def line_resistance_graph(g, resistances):
    """Replace edge weights by conductances 1/R of the given per-edge resistances."""
    resistances = np.asarray(resistances, dtype=float).reshape(-1)
    if np.any(resistances <= 0.0):
        raise ValueError("resistances must be positive")
    return g.with_weights(1.0 / resistances)


def draw_resistances(g, low, high, rng):
    """One uniform resistance per edge of `g`, in edge order."""
    return rng.uniform(low, high, size=len(g.edges))


def write_trace_csv(trace, path, n_agents, order):
    """Write `t, x_1_1, ..., x_N_n, consensus_error` rows."""
    header = ["t"]
    header += [f"x_{i}_{j}" for i in range(1, n_agents + 1) for j in range(1, order + 1)]
    header.append("consensus_error")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for t, row, err in zip(trace.times, trace.states, trace.consensus_error):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row] + [repr(float(err))])
