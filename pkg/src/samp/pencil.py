"""Hankel pencil construction and its SVD/eigendecomposition pipeline.

From a length-N series y the full Hankel matrix is (N-L) x (L+1) with
entry [i, j] = y(i + j); dropping its last / first column yields the pair
(Y0, Y1).  A rank-r truncated SVD of Y0 reduces the pencil Y1 - lam*Y0 to
the small non-Hermitian matrix A = inv(S) U^H Y1 V whose eigenvalues
estimate the signal poles.  The left/right mode matrices U S Q and
inv(Q) V^H factor the rank-r part of Y0 and carry the per-mode structure
used downstream for detection and amplitude extraction.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HankelPair",
    "SvdFactors",
    "PencilDecomposition",
    "default_pencil_parameter",
    "build_hankel",
    "svd_y0",
    "decompose",
]

#: Relative residual allowed in reconstruction/eigen identities.
TOL_RECON = 1e-9
TOL_EIG = 1e-9

#: Condition number above which an eigenvector matrix is flagged.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class HankelPair:
    """Hankel matrix of a series together with its column-trimmed pair."""

    full: np.ndarray  # (N-L) x (L+1)
    y0: np.ndarray    # (N-L) x L, full without its last column
    y1: np.ndarray    # (N-L) x L, full without its first column
    pencil_parameter: int

    @property
    def sample_count(self) -> int:
        return self.full.shape[0] + self.full.shape[1] - 1


@dataclass(frozen=True)
class SvdFactors:
    """Truncated SVD of Y0: u @ diag(sigma) @ v^H, singular values descending."""

    u: np.ndarray      # (N-L) x r
    sigma: np.ndarray  # (r,), real, descending
    v: np.ndarray      # L x r
    rank: int


@dataclass(frozen=True)
class PencilDecomposition:
    """Eigendecomposition of the reduced pencil matrix plus the mode matrices.

    Columns of `left_modes`, rows of `right_modes` and entries of
    `eigenvalues` are index-aligned; eigenvalues are sorted by descending
    magnitude.  `eigvec_condition` is the condition number of the
    eigenvector matrix (large values signal an unreliable inverse).
    """

    reduced: np.ndarray       # r x r matrix A
    eig_vectors: np.ndarray   # r x r matrix Q
    eigenvalues: np.ndarray   # (r,)
    left_modes: np.ndarray    # (N-L) x r
    right_modes: np.ndarray   # r x L
    rank: int
    eigvec_condition: float


def default_pencil_parameter(n: int) -> int:
    """Pencil parameter round(n/3); halves round away from zero."""
    if n < 4:
        raise ValueError(f"need at least 4 samples, got {n}")
    return int(math.floor(n / 3.0 + 0.5))


def build_hankel(y: np.ndarray, l: int) -> HankelPair:
    """Build the (N-L) x (L+1) Hankel matrix of y and its trimmed pair."""
    y = np.asarray(y, dtype=complex)
    n = y.shape[0]
    if not 1 <= l <= n - 1:
        raise ValueError(f"pencil parameter must satisfy 1 <= L <= N-1, got L={l}, N={n}")
    rows = np.arange(n - l)[:, np.newaxis]
    cols = np.arange(l + 1)[np.newaxis, :]
    full = y[rows + cols]
    return HankelPair(full=full, y0=full[:, :-1], y1=full[:, 1:], pencil_parameter=l)


def svd_y0(pair: HankelPair, rank: int | None = None) -> SvdFactors:
    """SVD of Y0, optionally truncated to the top-`rank` triplets."""
    u, sigma, vh = np.linalg.svd(pair.y0, full_matrices=False)
    max_rank = sigma.shape[0]
    if rank is None:
        rank = max_rank
    if not 1 <= rank <= max_rank:
        raise ValueError(f"rank must lie in [1, {max_rank}], got {rank}")
    return SvdFactors(
        u=u[:, :rank],
        sigma=sigma[:rank],
        v=vh[:rank].conj().T,
        rank=rank,
    )


def decompose(pair: HankelPair, rank: int) -> PencilDecomposition:
    """Reduce the pencil at the given truncation rank and eigendecompose it.

    Raises ValueError when the truncated spectrum contains a zero singular
    value (the reduction divides by sigma).  A badly conditioned
    eigenvector matrix (> 1e12) is flagged with a RuntimeWarning and
    surfaced via `eigvec_condition`; callers may retry at lower rank.
    """
    factors = svd_y0(pair, rank)
    if factors.sigma[-1] <= 0.0:
        raise ValueError(
            f"singular value {rank} is zero; reduce the truncation rank"
        )
    reduced = (factors.u.conj().T @ pair.y1 @ factors.v) / factors.sigma[:, np.newaxis]
    eigenvalues, q = np.linalg.eig(reduced)

    order = np.argsort(-np.abs(eigenvalues), kind="stable")
    eigenvalues = eigenvalues[order]
    q = q[:, order]

    cond_q = float(np.linalg.cond(q))
    if cond_q > COND_LIMIT:
        warnings.warn(
            f"eigenvector matrix condition {cond_q:.3e} exceeds {COND_LIMIT:.0e}; "
            "modes may be unreliable at this rank",
            RuntimeWarning,
            stacklevel=2,
        )

    left_modes = (factors.u * factors.sigma) @ q
    # inv(Q) @ V^H via a solve rather than an explicit inverse
    right_modes = np.linalg.solve(q, factors.v.conj().T)
    return PencilDecomposition(
        reduced=reduced,
        eig_vectors=q,
        eigenvalues=eigenvalues,
        left_modes=left_modes,
        right_modes=right_modes,
        rank=rank,
        eigvec_condition=cond_q,
    )
