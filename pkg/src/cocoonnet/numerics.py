"""Dense symmetric eigensolver, low-rank truncation and k-means."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import BadRank, DegenerateInput, NoConvergence, NotSymmetric
from .metrics import CommunityAssignment


@dataclass
class SymmetricEigen:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def sym_eigen(a, tol=1e-12, max_sweeps=100, kernels=None) -> SymmetricEigen:
    """Full eigen-decomposition by cyclic Jacobi rotations.

    Eigenvalues are returned in descending order; equal eigenvalues keep
    their diagonal order. Iteration stops once the off-diagonal Frobenius
    norm falls below ``tol`` times the norm of ``a``.

    Raises
    ------
    NotSymmetric
        If ``a`` deviates from its transpose by more than 1e-9.
    NoConvergence
        If ``max_sweeps`` sweeps do not reach the tolerance.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric("matrix must be square")
    if a.size and np.max(np.abs(a - a.T)) > 1e-9:
        raise NotSymmetric("matrix is not symmetric within 1e-9")
    k = kernels or _backend.kernels
    w, v, sweeps = k.jacobi_eigh((a + a.T) / 2, tol, max_sweeps)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    order = np.argsort(-w, kind="stable")
    return SymmetricEigen(w[order], v[:, order], sweeps)


def truncated_approx(a, r: int, eig: SymmetricEigen | None = None) -> np.ndarray:
    """Best rank-``r`` approximation of a symmetric matrix in Frobenius norm.

    Keeps the ``r`` eigenpairs of largest magnitude (the singular values of a
    symmetric matrix are the absolute eigenvalues).
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if not 1 <= r <= n:
        raise BadRank(f"rank must satisfy 1 <= r <= {n}, got {r}")
    eig = eig or sym_eigen(a)
    keep = np.argsort(-np.abs(eig.eigenvalues), kind="stable")[:r]
    v = eig.eigenvectors[:, keep]
    return (v * eig.eigenvalues[keep]) @ v.T


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    history: list

    @property
    def assignment(self) -> CommunityAssignment:
        return CommunityAssignment.from_labels(self.labels)


def _plusplus(x, k, rng):
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[c] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centers[c]) ** 2, axis=1))
    return centers


def _sq_dists(x, centers):
    return (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * x @ centers.T
        + np.sum(centers * centers, axis=1)[None, :]
    ).clip(min=0.0)


def _lloyd(x, centers, max_iter):
    history = []
    labels = None
    rows = np.arange(x.shape[0])
    for _ in range(max_iter):
        d = _sq_dists(x, centers)
        new_labels = np.argmin(d, axis=1)
        history.append(float(d[rows, new_labels].sum()))
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
        for c in range(centers.shape[0]):
            members = labels == c
            if members.any():
                centers[c] = x[members].mean(axis=0)
            else:
                # reseed an empty cluster on the worst-fit point
                far = int(np.argmax(d[rows, labels]))
                centers[c] = x[far]
                labels[far] = c
    return labels, centers, history[-1], history


def kmeans_fit(points, k: int, seed: int = 0, restarts: int = 10,
               max_iter: int = 300) -> KMeansResult:
    """Lloyd's k-means with k-means++ seeding, best of ``restarts`` runs."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k <= n:
        raise DegenerateInput(f"k must satisfy 1 <= k <= {n}, got {k}")
    if np.unique(x, axis=0).shape[0] < k:
        raise DegenerateInput(f"fewer than {k} distinct points")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, restarts)):
        centers = _plusplus(x, k, rng)
        labels, centers, inertia, history = _lloyd(x, centers, max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels, centers, inertia, history)
    best.labels = CommunityAssignment.from_labels(best.labels).labels
    return best


def kmeans(points, k: int, seed: int = 0, restarts: int = 10) -> CommunityAssignment:
    return kmeans_fit(points, k, seed, restarts).assignment
