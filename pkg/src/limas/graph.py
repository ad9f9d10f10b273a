"""Weighted undirected graphs, Laplacian spectra, and simultaneous diagonalization.

Graphs use 1-based node indices, matching the agent numbering of the rest of
the package. All spectral quantities are computed with symmetric eigensolvers.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    CyberGraphDisconnected,
    DimensionMismatch,
    NotALaplacian,
    NotCommuting,
    NotSimultaneouslyDiagonalizable,
)

# Fixed stream for the random Laplacian combination used to break eigenvalue
# degeneracy; must not depend on user seeds so decompositions are reproducible.
_COMBINATION_SEED = 20240913


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph on nodes 1..n_nodes with positive edge weights."""

    n_nodes: int
    edges: tuple  # of (i, j, weight) with 1 <= i < j <= n_nodes

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("graph needs at least one node")
        seen = set()
        normalized = []
        for e in self.edges:
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if not (1 <= i <= self.n_nodes and 1 <= j <= self.n_nodes):
                raise ValueError(f"edge ({i},{j}) out of range 1..{self.n_nodes}")
            if i == j:
                raise ValueError(f"self-loop on node {i} not allowed")
            if w <= 0.0:
                raise ValueError(f"edge ({i},{j}) has non-positive weight {w}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            normalized.append((key[0], key[1], w))
        object.__setattr__(self, "edges", tuple(normalized))

    def scaled(self, factor):
        """Return a copy with every edge weight multiplied by `factor` (> 0)."""
        return WeightedGraph(self.n_nodes, tuple((i, j, w * factor) for i, j, w in self.edges))

    def with_weights(self, weights):
        """Return a copy with edge weights replaced, in edge order."""
        if len(weights) != len(self.edges):
            raise DimensionMismatch(
                f"{len(weights)} weights for {len(self.edges)} edges"
            )
        return WeightedGraph(
            self.n_nodes,
            tuple((i, j, float(w)) for (i, j, _), w in zip(self.edges, weights)),
        )


@dataclass(frozen=True)
class LaplacianSpectrum:
    """Sorted Laplacian eigenvalues with the derived connectivity scalars.

    `gamma_c` is the ratio of the largest to the second-smallest eigenvalue
    (infinite for disconnected graphs) and `delta_p` their difference.
    """

    eigenvalues: np.ndarray
    gamma_c: float
    delta_p: float

    @property
    def lambda_min(self):
        """Smallest eigenvalue over indices 2..N."""
        return float(self.eigenvalues[1])

    @property
    def lambda_max(self):
        """Largest eigenvalue over indices 2..N."""
        return float(self.eigenvalues[-1])


@dataclass(frozen=True)
class ModalDecomposition:
    """Common orthonormal eigenbasis of two commuting Laplacians.

    `phi` has the consensus direction 1/sqrt(N) as its first column; `pairs`
    holds the (physical, cyber) eigenvalue tuples sharing columns 2..N.
    Pairing is by shared eigenvector, not by magnitude order.
    """

    phi: np.ndarray
    pairs: tuple  # of (lambda_p, lambda_c), one per column 2..N


def laplacian(g):
    """Assemble the (dense, symmetric) Laplacian matrix of `g`."""
    n = g.n_nodes
    lap = np.zeros((n, n))
    for i, j, w in g.edges:
        a, b = i - 1, j - 1
        lap[a, b] -= w
        lap[b, a] -= w
        lap[a, a] += w
        lap[b, b] += w
    return lap


def is_connected(g):
    """True iff `g` has a single connected component (breadth-first search)."""
    if g.n_nodes == 1:
        return True
    adj = {i: [] for i in range(1, g.n_nodes + 1)}
    for i, j, _ in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {1}
    frontier = [1]
    while frontier:
        node = frontier.pop()
        for nb in adj[node]:
            if nb not in seen:
                seen.add(nb)
                frontier.append(nb)
    return len(seen) == g.n_nodes


def spectrum(lap, tol=None):
    """Eigenvalues and connectivity scalars of a Laplacian matrix.

    Raises NotALaplacian when the matrix has a clearly negative eigenvalue or
    nonzero row sums at the working tolerance.
    """
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise DimensionMismatch(f"expected square matrix, got {lap.shape}")
    scale = max(1.0, float(np.abs(lap).max(initial=0.0)))
    if tol is None:
        tol = 1e-8 * scale
    if np.abs(lap - lap.T).max(initial=0.0) > tol:
        raise NotALaplacian("matrix is not symmetric")
    row_sums = np.abs(lap.sum(axis=1))
    if row_sums.max(initial=0.0) > tol:
        raise NotALaplacian(f"row sums up to {row_sums.max():g} exceed tolerance {tol:g}")
    eigenvalues = np.linalg.eigvalsh(lap)
    if eigenvalues[0] < -tol:
        raise NotALaplacian(f"negative eigenvalue {eigenvalues[0]:g}")
    if lap.shape[0] < 2:
        return LaplacianSpectrum(eigenvalues, 1.0, 0.0)
    lam_second, lam_max = eigenvalues[1], eigenvalues[-1]
    gamma_c = float(lam_max / lam_second) if lam_second > tol else np.inf
    delta_p = float(lam_max - lam_second)
    return LaplacianSpectrum(eigenvalues, gamma_c, delta_p)


def commute_check(lap_p, lap_c, tol=None):
    """True iff the commutator of the two matrices vanishes within `tol`."""
    lap_p = np.asarray(lap_p, dtype=float)
    lap_c = np.asarray(lap_c, dtype=float)
    if lap_p.shape != lap_c.shape or lap_p.ndim != 2:
        raise DimensionMismatch(f"shapes {lap_p.shape} and {lap_c.shape} differ")
    if tol is None:
        tol = 1e-8 * max(np.linalg.norm(lap_p, 2), np.linalg.norm(lap_c, 2), 1e-300)
    commutator = lap_p @ lap_c - lap_c @ lap_p
    return bool(np.abs(commutator).max(initial=0.0) <= tol)


def modal_decomposition(lap_p, lap_c, tol=1e-7):
    """Simultaneously diagonalize two commuting Laplacians.

    Eigendecomposes a randomly weighted combination of the two matrices to
    break degenerate eigenspaces, forces the first basis vector to the exact
    consensus direction, and verifies that both Laplacians are diagonal in the
    resulting basis. Retries with a fresh combination weight a few times
    before giving up.
    """
    lap_p = np.asarray(lap_p, dtype=float)
    lap_c = np.asarray(lap_c, dtype=float)
    if not commute_check(lap_p, lap_c):
        raise NotCommuting("Laplacians do not commute; no common eigenbasis exists")
    n = lap_p.shape[0]
    norm_p = max(np.linalg.norm(lap_p, 2), 1e-300)
    norm_c = max(np.linalg.norm(lap_c, 2), 1e-300)
    ones_dir = np.full(n, 1.0 / np.sqrt(n))
    rng = np.random.default_rng(_COMBINATION_SEED)
    last_residual = np.inf
    for _ in range(5):
        # Balance the two matrices so neither dominates the combination.
        mu = rng.uniform(0.5, 2.0)
        _, vecs = np.linalg.eigh(lap_p / norm_p + mu * (lap_c / norm_c))
        # Replace the kernel vector closest to the consensus direction with the
        # exact one, then re-orthonormalize the remaining columns against it.
        overlap = np.abs(ones_dir @ vecs)
        keep = np.delete(np.arange(n), int(np.argmax(overlap)))
        rest = vecs[:, keep]
        rest = rest - np.outer(ones_dir, ones_dir @ rest)
        q, _ = np.linalg.qr(rest)
        phi = np.column_stack([ones_dir, q])
        diag_p = phi.T @ lap_p @ phi
        diag_c = phi.T @ lap_c @ phi
        residual = max(
            np.abs(diag_p - np.diag(np.diag(diag_p))).max(initial=0.0) / norm_p,
            np.abs(diag_c - np.diag(np.diag(diag_c))).max(initial=0.0) / norm_c,
        )
        if residual <= tol:
            lam_p = np.diag(diag_p)[1:]
            lam_c = np.diag(diag_c)[1:]
            conn_tol = 1e-8 * norm_c
            if np.any(lam_c <= conn_tol):
                raise CyberGraphDisconnected(
                    f"cyber Laplacian has eigenvalue {lam_c.min():g} <= {conn_tol:g}"
                )
            pairs = tuple((float(p), float(c)) for p, c in zip(lam_p, lam_c))
            return ModalDecomposition(phi, pairs)
        last_residual = residual
    raise NotSimultaneouslyDiagonalizable(
        f"diagonalization residual {last_residual:g} above tolerance {tol:g}"
    )


def complete_graph(n, weight=1.0):
    """Complete graph on n nodes with uniform edge weight."""
    edges = tuple((i, j, weight) for i in range(1, n + 1) for j in range(i + 1, n + 1))
    return WeightedGraph(n, edges)


def circle_graph(n, weight=1.0):
    """Cycle 1-2-...-n-1 with uniform edge weight."""
    edges = [(i, i + 1, weight) for i in range(1, n)]
    if n > 2:
        edges.append((1, n, weight))
    return WeightedGraph(n, tuple(edges))


def star_graph(n, weight=1.0):
    """Star with node 1 at the hub."""
    return WeightedGraph(n, tuple((1, i, weight) for i in range(2, n + 1)))


def path_graph(n, weight=1.0):
    """Path 1-2-...-n with uniform edge weight."""
    return WeightedGraph(n, tuple((i, i + 1, weight) for i in range(1, n)))


TOPOLOGY_BUILDERS = {
    "complete": complete_graph,
    "circle": circle_graph,
    "star": star_graph,
    "path": path_graph,
}
