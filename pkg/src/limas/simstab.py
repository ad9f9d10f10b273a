"""LP-based simultaneous stabilization of single-input LTI systems.

A stabilizing controller for each pair is parameterized through its Ackermann
basis; requiring all parameterized gains to coincide yields a linear
feasibility problem. The equality constraints are eliminated through an
explicit right inverse and null-space basis, leaving a small inequality-only
LP whose feasibility certifies a common static gain.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .control import ackermann_basis, is_schur
from .errors import (
    BlockInversionFailure,
    DimensionMismatch,
    OrderTooLarge,
    SolverFailure,
)

MAX_ORDER = 16  # 2^m inequality rows per system; larger orders are impractical
DEFAULT_MIN_MARGIN = 1e-9

_IDENTITY_TOL = 1e-8  # acceptance threshold for the V V^+ = I and V Psi = 0 identities


@dataclass(frozen=True)
class SignMatrix:
    """All 2^m sign patterns of {-1,+1}^m, one per row, in binary-counting order."""

    m: int
    rows: np.ndarray


@dataclass(frozen=True)
class FullLp:
    """The raw feasibility problem: V c = v equality and H c <= h inequality."""

    v_mat: np.ndarray  # (M-1)m x Mm block bidiagonal
    v_vec: np.ndarray  # (M-1)m
    h_mat: np.ndarray  # M 2^m x Mm, I_M kron Gamma
    h_vec: np.ndarray  # all ones


@dataclass(frozen=True)
class ReducedLp:
    """Equality-free reduction: find w with a_ineq w <= b_ineq."""

    a_ineq: np.ndarray
    b_ineq: np.ndarray
    v_dagger: np.ndarray
    psi: np.ndarray
    v_last: np.ndarray  # v-row of the last pair, used for gain extraction


@dataclass(frozen=True)
class LpVerdict:
    """Outcome of the feasibility test with slack margin and extracted gain."""

    feasible: bool
    witness: np.ndarray | None
    margin: float
    gain: np.ndarray | None


def sign_matrix(m):
    """Sign-pattern matrix encoding |c_0| + ... + |c_{m-1}| <= 1 as 2^m inequalities."""
    if not 1 <= m <= MAX_ORDER:
        raise OrderTooLarge(f"order {m} outside supported range 1..{MAX_ORDER}")
    rows = np.array(list(itertools.product([-1.0, 1.0], repeat=m)))
    return SignMatrix(m, rows)


def build_full_lp(pairs):
    """Assemble the full LP matrices from the per-pair Ackermann bases."""
    if len(pairs) < 2:
        raise DimensionMismatch("need at least two systems")
    m = pairs[0].order
    if any(p.order != m for p in pairs):
        raise DimensionMismatch("all systems must share the same order")
    n_sys = len(pairs)
    bases = [ackermann_basis(p) for p in pairs]
    v_mat = np.zeros(((n_sys - 1) * m, n_sys * m))
    v_vec = np.zeros((n_sys - 1) * m)
    for l in range(n_sys - 1):
        rows = slice(l * m, (l + 1) * m)
        v_mat[rows, l * m:(l + 1) * m] = bases[l].v_mat.T
        v_mat[rows, (l + 1) * m:(l + 2) * m] = -bases[l + 1].v_mat.T
        v_vec[rows] = bases[l + 1].v_row - bases[l].v_row
    gamma = sign_matrix(m).rows
    h_mat = np.kron(np.eye(n_sys), gamma)
    h_vec = np.ones(n_sys * 2 ** m)
    return FullLp(v_mat, v_vec, h_mat, h_vec)


def reduce_lp(full, pairs):
    """Eliminate the equality constraints of the full LP.

    The right inverse of V is upper block triangular in the inverted basis
    blocks and its null space is spanned by the stacked inverses; both
    identities are verified numerically before the reduced problem is returned.
    """
    m = pairs[0].order
    n_sys = len(pairs)
    bases = [ackermann_basis(p) for p in pairs]
    inv_vt = []
    for l, basis in enumerate(bases):
        try:
            inv_vt.append(np.linalg.inv(basis.v_mat.T))
        except np.linalg.LinAlgError as exc:
            raise BlockInversionFailure(f"basis block {l + 1} is singular") from exc
    v_dagger = np.zeros((n_sys * m, (n_sys - 1) * m))
    for l in range(n_sys - 1):
        for j in range(l, n_sys - 1):
            v_dagger[l * m:(l + 1) * m, j * m:(j + 1) * m] = inv_vt[l]
    psi = np.vstack(inv_vt)
    right_identity = full.v_mat @ v_dagger
    null_residual = full.v_mat @ psi
    if (
        np.abs(right_identity - np.eye((n_sys - 1) * m)).max() > _IDENTITY_TOL
        or np.abs(null_residual).max() > _IDENTITY_TOL
    ):
        raise BlockInversionFailure("reduction identities violated; blocks too ill-conditioned")
    a_ineq = full.h_mat @ psi
    b_ineq = full.h_vec - full.h_mat @ (v_dagger @ full.v_vec)
    return ReducedLp(a_ineq, b_ineq, v_dagger, psi, bases[-1].v_row.copy())


def solve_feasibility(reduced, min_margin=DEFAULT_MIN_MARGIN):
    """Maximize the uniform inequality slack; feasible iff it exceeds `min_margin`.

    On feasibility the common gain is the last pair's v-row plus the witness.
    """
    n_rows, m = reduced.a_ineq.shape
    cost = np.zeros(m + 1)
    cost[-1] = -1.0  # maximize slack t
    a_ub = np.hstack([reduced.a_ineq, np.ones((n_rows, 1))])
    result = linprog(
        cost,
        A_ub=a_ub,
        b_ub=reduced.b_ineq,
        bounds=[(None, None)] * (m + 1),
        method="highs",
    )
    if not result.success:
        raise SolverFailure(f"LP backend failed: {result.message}")
    margin = float(-result.fun)
    if margin <= min_margin:
        return LpVerdict(False, None, margin, None)
    witness = result.x[:m]
    gain = reduced.v_last + witness
    return LpVerdict(True, witness, margin, gain)


def simultaneous_gain(pairs, min_margin=DEFAULT_MIN_MARGIN):
    """Convenience wrapper: build, reduce, and solve in one call."""
    full = build_full_lp(pairs)
    reduced = reduce_lp(full, pairs)
    return solve_feasibility(reduced, min_margin)


def verify_gain(pairs, gain, margin=1e-9):
    """Independent check that A + B K is Schur for every pair."""
    gain = np.asarray(gain, dtype=float).reshape(-1)
    for pair in pairs:
        if gain.shape[0] != pair.order:
            raise DimensionMismatch(
                f"gain length {gain.shape[0]} does not match order {pair.order}"
            )
        closed_loop = pair.a_mat + np.outer(pair.b_vec, gain)
        if not is_schur(closed_loop, margin):
            return False
    return True


def dump_reduced_lp(reduced, path):
    """Write the reduced inequality system (a_ineq | b_ineq) as CSV for cross-checks."""
    table = np.hstack([reduced.a_ineq, reduced.b_ineq.reshape(-1, 1)])
    header = ",".join(
        [f"w_{j + 1}" for j in range(reduced.a_ineq.shape[1])] + ["rhs"]
    )
    np.savetxt(path, table, delimiter=",", header=header, comments="")
