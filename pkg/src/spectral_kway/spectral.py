"""Normalized Laplacian, bottom-k eigenfunctions and Rayleigh quotients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import ConvergenceFailure, ValidationError, ZeroFunction
from .graph import WeightedGraph

DENSE_LIMIT = 512
DEFAULT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralEmbedding:
    """Bottom-k eigenpairs packed as a vertex map ``F: V -> R^k``.

    ``F[v, i]`` is ``f_i(v)``; the columns are orthonormal in the
    degree-weighted inner product. ``residuals[i]`` is the backward error
    ``||L g_i - lambda_i g_i||`` of the symmetric-form eigenvector ``g_i``.
    """

    eigenvalues: np.ndarray
    F: np.ndarray
    residuals: np.ndarray
    method: str

    @property
    def k(self) -> int:
        return self.F.shape[1]

    def to_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for v, row in enumerate(self.F):
                fh.write("\t".join([str(v)] + [repr(float(x)) for x in row]) + "\n")


def normalized_laplacian(g: WeightedGraph, dense: bool | None = None):
    """``I - D^{-1/2} A D^{-1/2}``.

    Returns a dense array when ``dense`` is true (default for n <= 512),
    otherwise a sparse matrix that also serves as a matvec operator.
    """
    if dense is None:
        dense = g.n <= DENSE_LIMIT
    s = 1.0 / np.sqrt(g.degree)
    N = sp.diags(s) @ g.adjacency @ sp.diags(s)
    L = sp.identity(g.n, format="csr") - N
    return L.toarray() if dense else L.tocsr()


def _symmetric_form_operator(g: WeightedGraph) -> LinearOperator:
    # I + D^{-1/2} A D^{-1/2}: spectrum in [0, 2], top end = bottom of L
    s = 1.0 / np.sqrt(g.degree)
    A = g.adjacency

    def matvec(x):
        x = np.asarray(x).reshape(g.n, -1)
        return (x + s[:, None] * (A @ (s[:, None] * x))).squeeze()

    return LinearOperator((g.n, g.n), matvec=matvec, matmat=matvec, dtype=float)


def _eigsh_top(op, n, k, tol, rng):
    ncv = min(n, max(2 * k + 1, k + 32))
    try:
        return eigsh(op, k=k, which="LA", v0=rng.standard_normal(n), ncv=ncv,
                     tol=tol * 1e-2, maxiter=max(1000, 20 * n))
    except Exception as exc:  # ArpackNoConvergence and friends
        raise ConvergenceFailure(f"Lanczos did not converge: {exc}") from None


def _lanczos_bottom(g: WeightedGraph, k: int, tol: float, seed: int, max_rounds: int = 16):
    """Bottom-k eigenpairs via Lanczos on I + D^{-1/2} A D^{-1/2}.

    A single Krylov run can skip copies of a repeated eigenvalue, so the
    orthogonal complement of the found vectors is searched again until its
    top eigenvalue no longer belongs in the bottom k.
    """
    n = g.n
    rng = np.random.default_rng(seed)
    op = _symmetric_form_operator(g)
    mu, G = _eigsh_top(op, n, k, tol, rng)
    for _ in range(max_rounds):
        if G.shape[1] >= n - 1:
            break
        Q = np.linalg.qr(G)[0]

        def deflated(x, Q=Q):
            x = np.asarray(x).reshape(n, -1)
            x = x - Q @ (Q.T @ x)
            y = op.matmat(x).reshape(n, -1)
            return (y - Q @ (Q.T @ y)).squeeze()

        dop = LinearOperator((n, n), matvec=deflated, matmat=deflated, dtype=float)
        b = min(k, n - G.shape[1] - 1, 4)
        mu2, G2 = _eigsh_top(dop, n, b, tol, rng)
        kth = np.sort(mu)[::-1][k - 1]
        new = mu2 > kth + tol
        if not new.any():
            break
        mu = np.concatenate([mu, mu2[new]])
        G = np.concatenate([G, G2[:, new]], axis=1)
    order = np.argsort(-mu, kind="stable")[:k]
    return 2.0 - mu[order], G[:, order]


def _fix_signs(G: np.ndarray) -> np.ndarray:
    for j in range(G.shape[1]):
        col = G[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * max(np.abs(col).max(), 1e-300))
        if nz.size and col[nz[0]] < 0:
            G[:, j] = -col
    return G


def eigenbasis(g: WeightedGraph, k: int, tol: float = DEFAULT_TOL, seed: int = 0,
               method: str = "auto") -> SpectralEmbedding:
    """The k smallest eigenpairs of the normalized Laplacian.

    ``method`` is ``"dense"`` (LAPACK, default for n <= 512), ``"lanczos"``
    (implicitly restarted Lanczos with a seeded start vector) or ``"auto"``.
    Raises :class:`ConvergenceFailure` when any backward error exceeds
    ``tol * ||g||``.
    """
    n = g.n
    if not 1 <= k <= n:
        raise ValidationError(f"k must lie in [1, {n}], got {k}")
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT or k >= n - 1 else "lanczos"
    if method == "dense":
        L = normalized_laplacian(g, dense=True)
        lam, G = scipy.linalg.eigh(L, subset_by_index=[0, k - 1])
    elif method == "lanczos":
        lam, G = _lanczos_bottom(g, k, tol, seed)
    else:
        raise ValidationError(f"unknown eigensolver method {method!r}")

    # re-orthonormalize within the returned block, then fix signs
    Q, R = np.linalg.qr(G)
    Q = Q * np.sign(np.diag(R))
    G = _fix_signs(Q)
    L = normalized_laplacian(g, dense=False)
    LG = L @ G
    lam = np.einsum("ij,ij->j", G, LG)
    order = np.argsort(lam, kind="stable")
    lam, G, LG = lam[order], G[:, order], LG[:, order]
    residuals = np.linalg.norm(LG - G * lam, axis=0)
    if np.any(residuals > tol):
        raise ConvergenceFailure(
            f"eigenpair residuals {residuals.max():.3g} exceed tol {tol:.3g}",
            residuals=residuals,
        )
    scale = max(1.0, float(lam[-1]))
    lam = np.where(lam <= 1e-10 * scale, 0.0, lam)
    F = G / np.sqrt(g.degree)[:, None]
    return SpectralEmbedding(lam, F, residuals, method)


def _as_2d(psi) -> np.ndarray:
    a = np.asarray(psi, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def edge_energy(g: WeightedGraph, psi) -> float:
    """Sum over edges of w(u,v) ||psi(u) - psi(v)||^2."""
    P = _as_2d(psi)
    diff = P[g.u] - P[g.v]
    return float(g.w @ np.einsum("ij,ij->i", diff, diff))


def mass(g: WeightedGraph, psi) -> float:
    """Sum over vertices of w(v) ||psi(v)||^2."""
    P = _as_2d(psi)
    return float(g.degree @ np.einsum("ij,ij->i", P, P))


def rayleigh(g: WeightedGraph, psi) -> float:
    """Rayleigh quotient of a scalar or vector-valued vertex map."""
    den = mass(g, psi)
    if den <= 0.0:
        raise ZeroFunction("Rayleigh quotient of the zero map")
    return edge_energy(g, psi) / den


def coordinate_rayleigh(g: WeightedGraph, psi) -> np.ndarray:
    """Scalar Rayleigh quotient of each coordinate; +inf for all-zero coordinates."""
    P = _as_2d(psi)
    diff = P[g.u] - P[g.v]
    num = g.w @ (diff * diff)
    den = g.degree @ (P * P)
    out = np.full(P.shape[1], np.inf)
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out


def best_coordinate(g: WeightedGraph, psi) -> tuple[int, np.ndarray]:
    """Coordinate whose scalar Rayleigh quotient is smallest (lowest index on ties)."""
    P = _as_2d(psi)
    q = coordinate_rayleigh(g, P)
    if not np.isfinite(q).any():
        raise ZeroFunction("all coordinates vanish")
    j = int(np.argmin(q))
    return j, P[:, j].copy()
