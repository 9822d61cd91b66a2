"""Deterministic numeric kernels: random matrices, eigensolver, PageRank.

The eigensolver is plain power iteration with deflation against previously
found vectors.  Iterating on the shifted operator ``A + s*I`` (with ``s`` a
cheap bound on the spectral radius) makes all shifted eigenvalues
non-negative, so the dominant-magnitude pair of the shifted problem is always
the most-positive eigenvalue of ``A`` and pairs come out sorted by value.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .graph import Graph
from .rng import Rng

__all__ = ["ConvergenceError", "gaussian_matrix", "top_k_eigs", "pagerank"]

# Deterministic, caller-independent base seed for eigensolver start vectors.
_START_SEED = 0x5EED_E16E


class ConvergenceError(RuntimeError):
    """An iterative kernel failed to reach its tolerance within max_iter."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = float(residual)


def gaussian_matrix(rows: int, cols: int, rng: Rng) -> np.ndarray:
    """I.i.d. standard-normal matrix, deterministic given the rng state."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    return rng.normal(rows, cols)


def _check_symmetric(op) -> None:
    if op.shape[0] != op.shape[1]:
        raise ValueError("operator must be square")
    if sp.issparse(op):
        diff = abs(op - op.T)
        asym = diff.max() if diff.nnz else 0.0
    else:
        asym = float(np.abs(op - op.T).max()) if op.size else 0.0
    if asym > 1e-12:
        raise ValueError(f"operator is not symmetric (max asymmetry {asym:.3e})")


def _spectral_bound(op) -> float:
    """Row-sum (Gershgorin) bound on the spectral radius."""
    if sp.issparse(op):
        return float(np.abs(op).sum(axis=1).max()) if op.nnz else 0.0
    return float(np.abs(op).sum(axis=1).max()) if op.size else 0.0


def top_k_eigs(op, k: int, tol: float = 1e-8, max_iter: int = 5000):
    """Top-k eigenpairs of a symmetric operator, by descending eigenvalue.

    Returns ``(values, vectors)`` where ``vectors`` is n-by-k with unit-norm
    columns, mutually orthogonal, each sign-fixed so its first non-negligible
    component is positive.  Raises :class:`ConvergenceError` if any pair fails
    to satisfy ``||op v - lam v|| <= tol`` within ``max_iter`` iterations.
    """
    n = op.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    _check_symmetric(op)
    shift = _spectral_bound(op)

    values = np.empty(k, dtype=np.float64)
    vectors = np.empty((n, k), dtype=np.float64)
    for j in range(k):
        found = vectors[:, :j]
        x = np.random.default_rng(_START_SEED + j).standard_normal(n)
        if j:
            x -= found @ (found.T @ x)
        nx = np.linalg.norm(x)
        if nx < 1e-12:  # start vector swallowed by deflation; re-draw
            x = np.random.default_rng(_START_SEED + k + j).standard_normal(n)
            x -= found @ (found.T @ x)
            nx = np.linalg.norm(x)
        x /= nx

        lam = 0.0
        resid = np.inf
        converged = False
        for _ in range(max_iter):
            w = op @ x
            lam = float(x @ w)
            resid = float(np.linalg.norm(w - lam * x))
            if resid <= tol:
                converged = True
                break
            y = w + shift * x
            if j:
                y -= found @ (found.T @ y)
            ny = np.linalg.norm(y)
            if ny < 1e-300:
                # Deflated iterate vanished: x already spans a null direction.
                break
            x = y / ny
        if not converged:
            w = op @ x
            lam = float(x @ w)
            resid = float(np.linalg.norm(w - lam * x))
            if resid > tol:
                raise ConvergenceError(
                    f"eigenpair {j} did not converge in {max_iter} iterations",
                    resid,
                )
        values[j] = lam
        vectors[:, j] = _fix_sign(x)

    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def _fix_sign(v: np.ndarray) -> np.ndarray:
    scale = np.abs(v).max()
    if scale == 0.0:
        return v
    idx = np.flatnonzero(np.abs(v) > 1e-9 * scale)
    if idx.size and v[idx[0]] < 0:
        return -v
    return v


def pagerank(
    g: Graph, damping: float = 0.85, tol: float = 1e-10, max_iter: int = 1000
) -> np.ndarray:
    """PageRank scores via power iteration on the walk fixed point.

    Solves ``p = (1 - damping)/n + damping * P^T p`` where ``P`` is the
    row-stochastic walk matrix; zero-degree nodes redistribute their mass
    uniformly.  Scores are positive and sum to one.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must lie strictly between 0 and 1")
    n = g.num_nodes
    if n == 0:
        return np.zeros(0, dtype=np.float64)
    adj = g.adjacency()
    deg = g.degrees.astype(np.float64)
    inv_deg = np.zeros_like(deg)
    nz = deg > 0
    inv_deg[nz] = 1.0 / deg[nz]
    dangling = ~nz

    p = np.full(n, 1.0 / n)
    base = (1.0 - damping) / n
    resid = np.inf
    for _ in range(max_iter):
        flow = adj @ (p * inv_deg)
        nxt = base + damping * (flow + p[dangling].sum() / n)
        resid = float(np.abs(nxt - p).sum())
        p = nxt
        if resid <= tol:
            return p
    raise ConvergenceError(
        f"pagerank did not converge in {max_iter} iterations", resid
    )
