"""Single-input LTI primitives.

Controllability, Ackermann pole placement and its controller-parameterization
basis, Schur stability, the critical discount factor of an unstable plant, and
a fixed-point solver for the discounted (modified) algebraic Riccati equation.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, SigmaTooSmall, SingularControllability

_RANK_RTOL = 1e-10  # singular-value ratio below which the pair is deemed uncontrollable
SCHUR_MARGIN = 1e-9


@dataclass(frozen=True)
class SystemPair:
    """A controllable single-input pair (A, B); controllability is checked on build."""

    a_mat: np.ndarray
    b_vec: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a_mat, dtype=float))
        b = np.asarray(self.b_vec, dtype=float).reshape(-1)
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"A must be square, got {a.shape}")
        if b.shape[0] != a.shape[0]:
            raise ValueError(f"B length {b.shape[0]} does not match A size {a.shape[0]}")
        object.__setattr__(self, "a_mat", a)
        object.__setattr__(self, "b_vec", b)
        ctrb = controllability_matrix(self)
        svals = np.linalg.svd(ctrb, compute_uv=False)
        if svals[-1] <= _RANK_RTOL * svals[0]:
            ratio = svals[-1] / svals[0] if svals[0] > 0.0 else 0.0
            raise SingularControllability(
                f"controllability matrix rank-deficient (sigma ratio {ratio:g})"
            )

    @property
    def order(self):
        return self.a_mat.shape[0]


@dataclass(frozen=True)
class AckermannBasis:
    """Controller-parameterization basis: K = c^T V + v for coefficient vector c."""

    v_mat: np.ndarray  # m x m, rows -r A^j for j = 0..m-1
    v_row: np.ndarray  # 1 x m stored flat, -r A^m


@dataclass(frozen=True)
class MareSolution:
    """Positive-definite Riccati certificate with its strict-inequality residual."""

    p_mat: np.ndarray
    sigma: float
    residual: float  # largest eigenvalue of the Riccati expression, < 0


def controllability_matrix(pair):
    """Columns B, AB, ..., A^{m-1}B of the single-input pair."""
    a, b = pair.a_mat, pair.b_vec
    cols = [b]
    for _ in range(a.shape[0] - 1):
        cols.append(a @ cols[-1])
    return np.column_stack(cols)


def last_row_inverse(pair):
    """Last row of the inverse controllability matrix (flat 1-D vector).

    Satisfies r A^j B = 0 for j <= m-2 and r A^{m-1} B = 1.
    """
    ctrb = controllability_matrix(pair)
    svals = np.linalg.svd(ctrb, compute_uv=False)
    if svals[-1] <= _RANK_RTOL * svals[0]:
        raise SingularControllability("controllability matrix is singular at tolerance")
    m = pair.order
    e_last = np.zeros(m)
    e_last[-1] = 1.0
    return np.linalg.solve(ctrb.T, e_last)


def ackermann_basis(pair):
    """Build the placement basis (V, v) of the pair from its inverse-controllability row."""
    a = pair.a_mat
    r = last_row_inverse(pair)
    rows = []
    current = r.copy()
    for _ in range(pair.order):
        rows.append(-current)
        current = current @ a
    return AckermannBasis(np.array(rows), -current)


def ackermann_gain(pair, coeffs):
    """Gain placing the closed-loop characteristic polynomial at the given coefficients.

    `coeffs` are (c_0, ..., c_{m-1}) of the desired monic polynomial
    z^m + c_{m-1} z^{m-1} + ... + c_0.
    """
    coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
    if coeffs.shape[0] != pair.order:
        raise ValueError(f"expected {pair.order} coefficients, got {coeffs.shape[0]}")
    basis = ackermann_basis(pair)
    return coeffs @ basis.v_mat + basis.v_row


def is_schur(mat, margin=SCHUR_MARGIN):
    """True iff the spectral radius is strictly below 1 - margin."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    return bool(np.max(np.abs(np.linalg.eigvals(mat))) < 1.0 - margin)


def sigma_c(a_bar):
    """Critical discount factor 1 - 1/prod |unstable eigenvalues|^2 (0 if Schur)."""
    a_bar = np.atleast_2d(np.asarray(a_bar, dtype=float))
    moduli = np.abs(np.linalg.eigvals(a_bar))
    unstable = moduli[moduli > 1.0]
    if unstable.size == 0:
        return 0.0
    return float(1.0 - 1.0 / np.prod(unstable) ** 2)


def solve_mare(a_bar, b, sigma, tol=1e-10, max_iter=10000):
    """Solve the discounted Riccati inequality by fixed-point iteration.

    Iterates P <- A'PA - sigma A'PB(B'PB)^{-1}B'PA + eps*I from P = I; the
    small eps offset turns the strict matrix inequality into a constructive
    fixed-point target. Existence requires sigma above the critical value.
    """
    a_bar = np.atleast_2d(np.asarray(a_bar, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1, 1)
    if not 0.0 < sigma <= 1.0:
        raise ValueError(f"sigma must be in (0, 1], got {sigma}")
    critical = sigma_c(a_bar)
    if sigma <= critical:
        raise SigmaTooSmall(f"sigma {sigma:g} <= critical value {critical:g}")
    m = a_bar.shape[0]
    eps = 1e-6 * np.linalg.norm(a_bar, 2) ** 2
    p = np.eye(m)
    for _ in range(max_iter):
        pa = p @ a_bar
        pb = p @ b
        btpb = (b.T @ pb).item()
        if btpb < 1e-14 * np.linalg.norm(p, 2):
            raise NoConvergence("B'PB lost rank during iteration")
        gain_term = (a_bar.T @ pb) @ (pb.T @ a_bar) / btpb
        p_next = a_bar.T @ pa - sigma * gain_term + eps * np.eye(m)
        p_next = 0.5 * (p_next + p_next.T)
        if np.abs(p_next - p).max() <= tol * max(np.abs(p).max(), 1e-300):
            p = p_next
            break
        p = p_next
    else:
        raise NoConvergence(f"no fixed point within {max_iter} iterations")
    pb = p @ b
    btpb = (b.T @ pb).item()
    riccati = a_bar.T @ p @ a_bar - sigma * (a_bar.T @ pb) @ (pb.T @ a_bar) / btpb - p
    residual = float(np.max(np.linalg.eigvalsh(0.5 * (riccati + riccati.T))))
    if residual >= 0.0 or np.min(np.linalg.eigvalsh(p)) <= 0.0:
        raise NoConvergence(f"fixed point is not a strict certificate (residual {residual:g})")
    return MareSolution(p, float(sigma), residual)
