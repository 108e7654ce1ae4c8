"""Mode features, detection thresholds, and model-order detectors.

A pencil mode is compared against the family of geometric test vectors
a(z) = [1, z, ..., z^(K-1)] through the normalized squared correlation

    P(z) = |a(z)^H mode|^2 / (||a(z)||^2 ||mode||^2)  in [0, 1].

Its maximum over z is the per-mode detection feature: structured (signal)
modes score close to one, spurious noise modes score low.  On the unit
circle the sweep reduces to a zero-padded power spectrum of the mode, so
the search runs as batched FFTs over a small radius grid plus a local
quadratic refinement.

Singular-value detectors (significant-digit, gap, effective-rank) and the
information-criterion sweep are provided as baselines.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .pencil import PencilDecomposition, build_hankel, svd_y0

__all__ = [
    "GridConfig",
    "ModeFeature",
    "DetectionResult",
    "test_vector",
    "similarity",
    "maximize_similarity",
    "concentration_weights",
    "samp_features",
    "practical_threshold",
    "theoretical_threshold",
    "default_threshold_scale",
    "detect_samp",
    "detect_sdd",
    "detect_gap",
    "detect_effective_rank",
    "detect_ite",
    "write_features_csv",
]


def _default_radius_grid() -> np.ndarray:
    return np.geomspace(math.exp(-0.15), 1.0, 15)


@dataclass(frozen=True)
class GridConfig:
    """Search grid for the similarity maximization.

    The frequency sweep uses `freq_oversample * K` FFT bins rounded up to a
    power of two (K = mode length); `radius_grid` lists the pole magnitudes
    swept, covering dampings up to 0.15 by default.  With `refine` enabled
    a local quadratic fit around the grid argmax polishes frequency and
    radius; refinement never decreases the returned value.
    """

    freq_oversample: int = 8
    radius_grid: tuple[float, ...] = tuple(_default_radius_grid())
    refine: bool = True

    def __post_init__(self):
        if self.freq_oversample < 1:
            raise ValueError("freq_oversample must be >= 1")
        radii = np.asarray(self.radius_grid, dtype=float)
        if radii.size == 0 or np.any(radii <= 0.0) or np.any(radii > 1.05):
            raise ValueError("radius grid values must lie in (0, 1.05]")

    def fft_size(self, mode_length: int) -> int:
        return 1 << (self.freq_oversample * mode_length - 1).bit_length()


@dataclass(frozen=True)
class ModeFeature:
    """Per-mode detection feature and its classification."""

    index: int
    maximizer: complex
    raw: float
    concentration: float
    normalized: float
    threshold: float = float("nan")
    is_signal: bool = False


@dataclass(frozen=True)
class DetectionResult:
    features: tuple[ModeFeature, ...]
    selected: tuple[int, ...]
    order: int


def test_vector(z: complex, length: int) -> np.ndarray:
    """Geometric test vector [1, z, ..., z^(length-1)]."""
    if z == 0:
        raise ValueError("test vector is undefined for z = 0")
    if length < 1:
        raise ValueError("length must be >= 1")
    return np.asarray(z, dtype=complex) ** np.arange(length)


test_vector.__test__ = False  # not a test despite the name


def _test_vector_norm_sq(radius: float, length: int) -> float:
    """||a(z)||^2 for |z| = radius (geometric series)."""
    r2 = radius * radius
    if abs(r2 - 1.0) < 1e-14:
        return float(length)
    return (1.0 - r2**length) / (1.0 - r2)


def similarity(mode: np.ndarray, z: complex) -> float:
    """Normalized squared correlation between `mode` and the test vector a(z)."""
    mode = np.asarray(mode, dtype=complex)
    norm_sq = float(np.vdot(mode, mode).real)
    if norm_sq == 0.0:
        raise ValueError("similarity is undefined for a zero mode")
    if z == 0:
        raise ValueError("similarity is undefined for z = 0")
    # a(z)^H mode = sum_n mode[n] conj(z)^n, evaluated by Horner's rule
    corr = _correlate_at(mode, complex(z))
    a_sq = _test_vector_norm_sq(abs(z), mode.shape[0])
    return float(abs(corr) ** 2 / (a_sq * norm_sq))


def _correlate_at(mode: np.ndarray, z: complex) -> complex:
    w = np.conj(z)
    acc = 0.0 + 0.0j
    for value in mode[::-1]:
        acc = acc * w + value
    return acc


def _parabola_peak_offset(left: float, center: float, right: float) -> float:
    """Vertex offset in (-1, 1) of the parabola through three equispaced samples."""
    denom = left - 2.0 * center + right
    if denom >= 0.0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / denom, -0.75, 0.75))


def maximize_similarity(
    mode: np.ndarray, grid: GridConfig = GridConfig()
) -> tuple[complex, float]:
    """Maximize the similarity of `mode` over the search grid.

    Returns (z_star, value).  Each radius sweep is one zero-padded FFT of
    the radius-scaled mode; the numerator on the unit-circle grid equals
    the mode's power spectrum.  The returned value dominates every
    evaluated grid point.
    """
    mode = np.asarray(mode, dtype=complex)
    k = mode.shape[0]
    norm_sq = float(np.vdot(mode, mode).real)
    if norm_sq == 0.0:
        raise ValueError("cannot maximize similarity of a zero mode")

    radii = np.asarray(grid.radius_grid, dtype=float)
    nfft = grid.fft_size(k)
    scaled = mode[np.newaxis, :] * radii[:, np.newaxis] ** np.arange(k)[np.newaxis, :]
    power = np.abs(np.fft.fft(scaled, n=nfft, axis=1)) ** 2
    a_sq = np.array([_test_vector_norm_sq(r, k) for r in radii])
    values = power / (a_sq[:, np.newaxis] * norm_sq)

    j_best, bin_best = np.unravel_index(np.argmax(values), values.shape)
    best_value = float(values[j_best, bin_best])
    omega = 2.0 * math.pi * bin_best / nfft
    best_z = radii[j_best] * complex(math.cos(omega), math.sin(omega))

    if not grid.refine:
        return best_z, best_value

    def evaluate(radius: float, w: float) -> tuple[complex, float]:
        z = radius * complex(math.cos(w), math.sin(w))
        return z, similarity(mode, z)

    # quadratic polish in frequency: coarse pass on FFT-bin neighbours,
    # fine pass on direct evaluations at a quarter-bin step
    step = 2.0 * math.pi / nfft
    row = values[j_best]
    offset = _parabola_peak_offset(
        float(row[(bin_best - 1) % nfft]), best_value, float(row[(bin_best + 1) % nfft])
    )
    omega_hat = omega + offset * step
    candidates = [evaluate(radii[j_best], omega_hat)]
    fine = step / 4.0
    lo = similarity(mode, radii[j_best] * np.exp(1j * (omega_hat - fine)))
    hi = similarity(mode, radii[j_best] * np.exp(1j * (omega_hat + fine)))
    offset2 = _parabola_peak_offset(lo, candidates[0][1], hi)
    candidates.append(evaluate(radii[j_best], omega_hat + offset2 * fine))

    # quadratic polish of the radius (in log-radius) at the refined frequency
    omega_ref = max(candidates, key=lambda zv: zv[1])[0]
    omega_ref = math.atan2(omega_ref.imag, omega_ref.real)
    if radii.size >= 3 and 0 < j_best < radii.size - 1:
        logs = np.log(radii[j_best - 1 : j_best + 2])
        vals3 = [similarity(mode, r * np.exp(1j * omega_ref)) for r in radii[j_best - 1 : j_best + 2]]
        if math.isclose(logs[1] - logs[0], logs[2] - logs[1], rel_tol=1e-6):
            off_r = _parabola_peak_offset(vals3[0], vals3[1], vals3[2])
            r_hat = math.exp(logs[1] + off_r * (logs[1] - logs[0]))
            r_hat = min(max(r_hat, radii[0]), radii[-1])
            candidates.append(evaluate(r_hat, omega_ref))
        candidates.append((radii[j_best] * np.exp(1j * omega_ref), vals3[1]))

    z_ref, v_ref = max(candidates, key=lambda zv: zv[1])
    if v_ref > best_value:
        return z_ref, v_ref
    return best_z, best_value


#: Eigenvalues below this fraction of the largest magnitude are treated as zero.
ZERO_EIGENVALUE_RTOL = 1e-12


def concentration_weights(eigenvalues: np.ndarray) -> np.ndarray:
    """Pole-concentration weights d_i = sum_m |lam_m / lam_i|^2.

    Effectively-zero eigenvalues get d_i = +inf (their feature is zeroed).
    """
    mags_sq = np.abs(np.asarray(eigenvalues, dtype=complex)) ** 2
    top = mags_sq.max(initial=0.0)
    zero = mags_sq < (ZERO_EIGENVALUE_RTOL**2) * top if top > 0.0 else np.ones_like(mags_sq, bool)
    total = mags_sq.sum()
    with np.errstate(divide="ignore"):
        d = total / mags_sq
    d[zero] = np.inf
    return d


def samp_features(
    decomp: PencilDecomposition, grid: GridConfig = GridConfig()
) -> list[ModeFeature]:
    """Similarity features of all modes, leakage-corrected and scaled to [0, 1].

    Per mode: raw = max similarity, then divided by the concentration
    weight, then the whole vector is divided by its maximum (an all-zero
    vector is left as zeros).  Thresholds are not assigned here.
    """
    d = concentration_weights(decomp.eigenvalues)
    raws = np.zeros(decomp.rank)
    maximizers = np.zeros(decomp.rank, dtype=complex)
    for i in range(decomp.rank):
        column = decomp.left_modes[:, i]
        if not np.any(column):
            continue
        maximizers[i], raws[i] = maximize_similarity(column, grid)
    with np.errstate(invalid="ignore"):
        eps = np.where(np.isinf(d), 0.0, raws / d)
    peak = eps.max(initial=0.0)
    normalized = eps / peak if peak > 0.0 else eps
    return [
        ModeFeature(
            index=i,
            maximizer=complex(maximizers[i]),
            raw=float(raws[i]),
            concentration=float(d[i]),
            normalized=float(normalized[i]),
        )
        for i in range(decomp.rank)
    ]


def theoretical_threshold(isr: float) -> float:
    """Feature lower bound ((1 - isr) / (1 + isr))^2 for a given interference level."""
    if isr < 0.0:
        raise ValueError("interference-to-signal ratio must be >= 0")
    value = ((1.0 - isr) / (1.0 + isr)) ** 2
    return float(min(max(value, 0.0), 1.0))


def practical_threshold(
    amp_est: complex, eigenvalue: complex, c: float, length: int
) -> float:
    """Amplitude-based acceptance threshold for one mode's feature.

    Uses t = c / (|amp_est| * ||a(eigenvalue)||) as a surrogate
    interference-to-signal ratio and returns ((1 - t) / (1 + t))^2.  The
    map is symmetric under t -> 1/t: both very weak modes (t >> 1, the
    usual spurious-mode regime) and very strong ones (t << 1) face a bar
    near one, while amplitudes near c / ||a|| are accepted outright.
    """
    if amp_est == 0:
        raise ValueError("amplitude estimate must be nonzero")
    if eigenvalue == 0:
        raise ValueError("eigenvalue must be nonzero")
    a_norm = math.sqrt(_test_vector_norm_sq(abs(eigenvalue), length))
    t = c / (abs(amp_est) * a_norm)
    return theoretical_threshold(t)


def default_threshold_scale(mode_length: int) -> float:
    """Default per-mode threshold scale c = 10 * sqrt(mode length)."""
    return 10.0 * math.sqrt(mode_length)


def detect_samp(
    decomp: PencilDecomposition,
    amps: np.ndarray,
    grid: GridConfig = GridConfig(),
    c: float | np.ndarray | None = None,
) -> DetectionResult:
    """Classify modes into signal and noise by thresholding their features.

    `amps` are the mode-based amplitude estimates, index-aligned with the
    decomposition.  Mode i is selected when its normalized feature meets
    its amplitude-based threshold.
    """
    k = decomp.left_modes.shape[0]
    if c is None:
        c = default_threshold_scale(k)
    c_vec = np.broadcast_to(np.asarray(c, dtype=float), (decomp.rank,))
    amps = np.asarray(amps, dtype=complex)
    if amps.shape[0] != decomp.rank:
        raise ValueError("amplitude vector must be index-aligned with the modes")

    features = []
    selected = []
    for feat in samp_features(decomp, grid):
        i = feat.index
        lam = decomp.eigenvalues[i]
        if amps[i] == 0 or lam == 0:
            threshold = 1.0
        else:
            threshold = practical_threshold(amps[i], lam, float(c_vec[i]), k)
        is_signal = threshold <= feat.normalized
        features.append(replace(feat, threshold=threshold, is_signal=is_signal))
        if is_signal:
            selected.append(i)
    return DetectionResult(
        features=tuple(features), selected=tuple(selected), order=len(selected)
    )


def detect_sdd(sigma: np.ndarray, p: int) -> int:
    """Model order by significant decimal digits: count of sigma_i >= 10^-p * sigma_1."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0 or sigma[0] <= 0.0:
        raise ValueError("need a nonempty singular-value vector with sigma_1 > 0")
    return int(np.count_nonzero(sigma / sigma[0] >= 10.0 ** (-p)))


def detect_gap(sigma: np.ndarray) -> int:
    """Model order at the largest ratio of consecutive singular values."""
    sigma = np.maximum(np.asarray(sigma, dtype=float), 1e-300)
    if sigma.size < 2:
        raise ValueError("need at least two singular values")
    ratios = sigma[:-1] / sigma[1:]
    return int(np.argmax(ratios)) + 1  # ties resolve to the smallest index


def detect_effective_rank(sigma: np.ndarray) -> int:
    """Model order as the rounded exponential entropy of normalized singular values."""
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0.0):
        raise ValueError("singular values must be >= 0")
    total = sigma.sum()
    if total <= 0.0:
        raise ValueError("all-zero singular-value vector")
    bars = sigma / total
    nonzero = bars > 0.0
    entropy = -np.sum(bars[nonzero] * np.log(bars[nonzero]))
    return int(math.floor(math.exp(entropy) + 0.5))


def detect_ite(
    y: np.ndarray, l: int, m_max: int, criterion: str = "aic"
) -> int:
    """Model order by an information criterion over candidate orders 1..m_max.

    For each order k, a rank-k pencil fit produces pole and amplitude
    estimates whose residual variance feeds the score
    N*log(var_k) + penalty, with penalty 2*nu (aic) or nu*log(N) (bic)
    where nu = 4k + 1 counts the real parameters.  Returns the arg-min k.
    """
    if criterion not in ("aic", "bic"):
        raise ValueError(f"criterion must be 'aic' or 'bic', got {criterion!r}")
    y = np.asarray(y, dtype=complex)
    n = y.shape[0]
    if not 1 <= m_max <= l:
        raise ValueError(f"m_max must lie in [1, L], got {m_max}")
    pair = build_hankel(y, l)
    factors = svd_y0(pair)
    usable = min(m_max, int(np.count_nonzero(factors.sigma > 0.0)))
    # A_k is the leading k x k block of U^H Y1 V scaled by the singular values
    core = factors.u.conj().T @ pair.y1 @ factors.v
    steps = np.arange(n)[:, np.newaxis]
    # residuals below the double-precision reconstruction floor count as
    # zero, so the penalty alone ranks numerically exact fits
    var_floor = max(1e-300, 1e-25 * float(np.mean(np.abs(y) ** 2)))

    best_k, best_score = 1, math.inf
    for k in range(1, usable + 1):
        a_k = core[:k, :k] / factors.sigma[:k, np.newaxis]
        poles = np.linalg.eigvals(a_k)
        vander = poles[np.newaxis, :] ** steps
        coeffs, *_ = np.linalg.lstsq(vander, y, rcond=None)
        residual = y - vander @ coeffs
        var_k = max(float(np.vdot(residual, residual).real) / n, var_floor)
        nu = 4 * k + 1
        penalty = 2.0 * nu if criterion == "aic" else nu * math.log(n)
        score = n * math.log(var_k) + penalty
        if score < best_score:
            best_k, best_score = k, score
    return best_k


def write_features_csv(path, features) -> None:
    """Dump mode features as CSV (index, re_z, im_z, raw, d, eps, threshold, is_signal)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["index", "re_z", "im_z", "raw", "d", "eps", "threshold", "is_signal"]
        )
        for f in features:
            writer.writerow(
                [
                    f.index,
                    format(f.maximizer.real, ".17g"),
                    format(f.maximizer.imag, ".17g"),
                    format(f.raw, ".17g"),
                    format(f.concentration, ".17g"),
                    format(f.normalized, ".17g"),
                    format(f.threshold, ".17g"),
                    int(f.is_signal),
                ]
            )
