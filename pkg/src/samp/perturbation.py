"""First-order noise-perturbation analysis of pencil modes.

For a noiseless signal the pencil factors through a pair of Vandermonde
matrices built from the poles; additive noise perturbs each signal mode
into the true geometric column plus a structured error: a weighted sum of
the other poles' columns (cross-pole leakage coefficients gamma) and a
filtered-noise remainder xi.  This module assembles those terms from an
explicit noise realization, evaluates the spectral-radius condition under
which the first-order picture holds, and produces high-probability bounds
on the leakage and remainder magnitudes.

Dense O(L^3) linear algebra throughout: this is validation machinery for
the test suite, not part of the estimation hot path.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .pencil import COND_LIMIT, HankelPair
from .signal_model import SignalSpec

__all__ = [
    "NoiselessFactors",
    "PerturbationTerms",
    "Eigensystem",
    "noiseless_factors",
    "conv_apply",
    "u_vector",
    "first_order_noise_column",
    "check_spectral_condition",
    "prop3_bounds",
    "eigensystem",
    "perturbed_eigvec_approx",
    "local_ratio_feature",
]


@dataclass(frozen=True)
class NoiselessFactors:
    """Vandermonde factorization of a noiseless pencil and its pseudo-inverses.

    z_left (N-L x M) holds the geometric columns of the poles, z_right
    (M x L) the geometric rows; the noiseless Hankel matrix is
    z_left @ diag(amplitudes) @ z_right.  p_rows are the rows of the left
    pseudo-inverse, q_cols the columns of the right pseudo-inverse; they
    are biorthogonal to the Vandermonde columns/rows.
    """

    z_left: np.ndarray
    z_right: np.ndarray
    amplitudes: np.ndarray
    poles: np.ndarray
    p_rows: np.ndarray  # M x (N-L)
    q_cols: np.ndarray  # L x M

    @property
    def order(self) -> int:
        return self.poles.shape[0]

    @property
    def sample_count(self) -> int:
        return self.z_left.shape[0] + self.z_right.shape[1]

    def x0(self) -> np.ndarray:
        return (self.z_left * self.amplitudes) @ self.z_right

    def x1(self) -> np.ndarray:
        return (self.z_left * (self.amplitudes * self.poles)) @ self.z_right


@dataclass(frozen=True)
class PerturbationTerms:
    """First-order error of one signal mode for a specific noise draw."""

    e_left_col: np.ndarray       # length N-L
    gammas: np.ndarray           # length M-1, cross-pole leakage (m != i, ascending)
    xi: np.ndarray               # length N-L
    u_vectors: tuple[np.ndarray, ...]  # all M difference stencils, length N-L+1


def noiseless_factors(spec: SignalSpec, l: int) -> NoiselessFactors:
    """Vandermonde factors of the noiseless pencil at column split `l`."""
    m = spec.order
    n = spec.sample_count
    if not m <= l <= n - m:
        raise ValueError(f"need M <= L <= N-M, got M={m}, L={l}, N={n}")
    poles = spec.poles
    z_left = poles[np.newaxis, :] ** np.arange(n - l)[:, np.newaxis]
    z_right = poles[:, np.newaxis] ** np.arange(l)[np.newaxis, :]

    gram_left = z_left.conj().T @ z_left
    gram_right = z_right @ z_right.conj().T
    cond = max(np.linalg.cond(gram_left), np.linalg.cond(gram_right))
    if cond > COND_LIMIT:
        warnings.warn(
            f"nearly coincident poles: Gram condition {cond:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )
    p_rows = np.linalg.solve(gram_left, z_left.conj().T)
    q_cols = np.linalg.solve(gram_right, z_right).conj().T
    return NoiselessFactors(
        z_left=z_left,
        z_right=z_right,
        amplitudes=spec.amplitudes,
        poles=poles,
        p_rows=p_rows,
        q_cols=q_cols,
    )


def conv_apply(q: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Sliding products sum_t q[t] * w[k+t] for k = 0..len(w)-len(q).

    Equivalent to applying the banded operator whose row k holds q shifted
    by k; the same operator acts on a row vector u as the full convolution
    u * q.
    """
    q = np.asarray(q, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if q.size > w.size:
        raise ValueError("kernel longer than the data vector")
    return np.convolve(q[::-1], w, mode="valid")


def u_vector(p_m: np.ndarray, z_i: complex) -> np.ndarray:
    """Difference stencil [0, p] - z_i * [p, 0] of length len(p)+1."""
    p_m = np.asarray(p_m, dtype=complex)
    out = np.zeros(p_m.size + 1, dtype=complex)
    out[1:] = p_m
    out[:-1] -= z_i * p_m
    return out


def first_order_noise_column(
    factors: NoiselessFactors,
    noise: np.ndarray,
    i: int,
    perturbed_pole: complex,
) -> PerturbationTerms:
    """Assemble the first-order error of signal mode `i` for a noise draw.

    `perturbed_pole` is the noisy eigenvalue paired with pole i (nearest
    match from an actual noisy decomposition).  Raises when the perturbed
    pole collides with another true pole, which breaks the separation this
    expansion requires.
    """
    m = factors.order
    if not 0 <= i < m:
        raise ValueError(f"component index {i} out of range [0, {m})")
    noise = np.asarray(noise, dtype=complex)
    if noise.size != factors.sample_count:
        raise ValueError("noise length must match the factorization sample count")

    b_i = factors.amplitudes[i]
    z_i = factors.poles[i]
    filtered = conv_apply(factors.q_cols[:, i], noise)  # length N-L+1
    xi = filtered[:-1] / b_i

    u_vectors = tuple(u_vector(factors.p_rows[mm], z_i) for mm in range(m))
    gammas = np.zeros(m - 1, dtype=complex)
    e_col = xi.copy()
    pos = 0
    for mm in range(m):
        if mm == i:
            continue
        gap = perturbed_pole - factors.poles[mm]
        if abs(gap) < 1e-12:
            raise ValueError(
                f"perturbed pole collides with pole {mm}; separation assumption violated"
            )
        gamma = (u_vectors[mm] @ filtered) / (gap * b_i)
        gammas[pos] = gamma
        e_col = e_col + gamma * factors.z_left[:, mm]
        pos += 1
    return PerturbationTerms(
        e_left_col=e_col, gammas=gammas, xi=xi, u_vectors=u_vectors
    )


def _zeroed_small(values: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    top = np.abs(values).max(initial=0.0)
    out = values.copy()
    out[np.abs(values) < rtol * top] = 0.0
    return out


def check_spectral_condition(
    factors: NoiselessFactors, pair: HankelPair, i: int
) -> float:
    """Spectral radius governing the first-order expansion of mode `i`.

    Builds the L x L shift operator of the noiseless pencil, its full
    eigensystem (zero eigenvalues included), and the perturbation induced
    by the noisy pair; returns the radius that must stay below one for
    the expansion of mode i to converge.

    The noisy shift operator uses the rank-M pseudo-inverse of the noisy
    matrix: the full pseudo-inverse jumps rank (M to L) under any noise,
    which is an O(1) perturbation in the null directions, whereas the
    rank-matched operator is the smooth continuation the expansion is
    about.
    """
    if not 0 <= i < factors.order:
        raise ValueError(f"component index {i} out of range")
    shift = factors.q_cols @ (factors.poles[:, np.newaxis] * factors.z_right)
    lam, t_right = np.linalg.eig(shift)
    lam = _zeroed_small(lam)
    cond = np.linalg.cond(t_right)
    if cond > COND_LIMIT:
        warnings.warn(
            f"shift-operator eigenbasis condition {cond:.3e}; "
            "eigensystem is numerically defective",
            RuntimeWarning,
            stacklevel=2,
        )
    t_left_h = np.linalg.inv(t_right)  # rows are left eigenvectors, pairing = 1

    m = factors.order
    u, s, vh = np.linalg.svd(pair.y0, full_matrices=False)
    pinv_m = (vh[:m].conj().T / s[:m]) @ u[:, :m].conj().T
    noisy_shift = pinv_m @ pair.y1
    delta = noisy_shift - shift

    z_i = factors.poles[i]
    noisy_eigs = np.linalg.eigvals(noisy_shift)
    perturbed = noisy_eigs[np.argmin(np.abs(noisy_eigs - z_i))]
    own = int(np.argmin(np.abs(lam - z_i)))

    gaps = perturbed - lam
    gaps[own] = 1.0  # placeholder; the row is zeroed below
    weights = 1.0 / gaps
    weights[own] = 0.0
    core = weights[:, np.newaxis] * (t_left_h @ delta @ t_right)
    return float(np.max(np.abs(np.linalg.eigvals(core))))


def prop3_bounds(
    factors: NoiselessFactors, snr_i: float, epsilon: float, i: int
) -> tuple[np.ndarray, float]:
    """High-probability bounds on the leakage coefficients and remainder.

    Returns (gamma_bounds, xi_bound): gamma_bounds[k] bounds |gamma| for
    the k-th other pole (ascending index, skipping i) and xi_bound bounds
    the sup-norm of the remainder, each holding with probability at least
    1 - epsilon under sufficient pole separation.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if snr_i <= 0.0:
        raise ValueError("snr must be > 0")
    if not 0 <= i < factors.order:
        raise ValueError(f"component index {i} out of range")
    scale = math.sqrt(2.0 * math.log(1.0 / epsilon) / snr_i)
    z_i = factors.poles[i]
    q_i = factors.q_cols[:, i]
    bounds = []
    for mm in range(factors.order):
        if mm == i:
            continue
        u_m = u_vector(factors.p_rows[mm], z_i)
        kernel_norm = float(np.linalg.norm(np.convolve(u_m, q_i)))
        bounds.append(2.0 * scale * kernel_norm / abs(z_i - factors.poles[mm]))
    return np.asarray(bounds), scale


@dataclass(frozen=True)
class Eigensystem:
    """Eigenvalues with index-aligned right/left eigenvectors (u_k^H v_k = 1)."""

    values: np.ndarray
    right: np.ndarray  # columns v_k
    left: np.ndarray   # columns u_k with left.conj().T @ right = I


def eigensystem(a: np.ndarray) -> Eigensystem:
    """Full eigensystem of a square matrix with biorthonormal left vectors."""
    values, right = np.linalg.eig(np.asarray(a, dtype=complex))
    left = np.linalg.inv(right).conj().T
    return Eigensystem(values=values, right=right, left=left)


def perturbed_eigvec_approx(
    base: Eigensystem, delta_matrix: np.ndarray, i: int
) -> np.ndarray:
    """First-order approximation of eigenvector i of the perturbed matrix.

    Expands the perturbed eigenvector in the unperturbed eigenbasis; the
    approximation error is quadratic in the perturbation norm.  Warns when
    the underlying spectral-radius condition fails.
    """
    lam = base.values
    n = lam.shape[0]
    if not 0 <= i < n:
        raise ValueError(f"index {i} out of range")
    others = np.delete(np.arange(n), i)
    if others.size and np.min(np.abs(lam[others] - lam[i])) == 0.0:
        raise ValueError(f"eigenvalue {i} is not simple")

    u_h = base.left.conj().T  # rows u_k^H
    pairing = np.einsum("ij,ji->i", u_h, base.right)  # u_k^H v_k
    interactions = u_h @ delta_matrix @ base.right
    lam_i_pert = lam[i] + interactions[i, i] / pairing[i]

    gaps = lam_i_pert - lam
    gaps[i] = 1.0
    weights = 1.0 / (pairing * gaps)
    weights[i] = 0.0
    radius = float(np.max(np.abs(np.linalg.eigvals(weights[:, np.newaxis] * interactions))))
    if radius >= 1.0:
        warnings.warn(
            f"perturbation spectral radius {radius:.3f} >= 1; "
            "the first-order expansion is unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    coeffs = weights * interactions[:, i]
    return base.right[:, i] + base.right @ coeffs


def local_ratio_feature(mode: np.ndarray, eigenvalue: complex) -> float:
    """Distance between an eigenvalue and the mean consecutive-entry ratio
    of its mode; zero for an exact geometric sequence, scale-invariant."""
    mode = np.asarray(mode, dtype=complex)
    if mode.size < 2:
        raise ValueError("mode must have at least two entries")
    head = mode[:-1]
    valid = head != 0
    if not np.any(valid):
        raise ValueError("all consecutive ratios are undefined (zero entries)")
    ratios = mode[1:][valid] / head[valid]
    return float(abs(eigenvalue - ratios.mean()))
