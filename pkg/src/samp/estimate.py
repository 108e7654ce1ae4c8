"""Parameter estimation and the end-to-end analysis pipelines.

Eigenvalues map to (frequency, damping) through lam = exp(-alpha + 1j*theta);
amplitudes come either from a Vandermonde least-squares fit against the raw
samples or directly from the first row/column of the mode matrices, which
costs O(rank) once a decomposition exists.

Two pipelines are provided: `samp_pipeline` estimates all candidate
components first and then selects the signal-related ones by their mode
features, while `classical_pipeline` fixes the order from the singular
values (or an information criterion) and estimates afterwards.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import detect
from .detect import DetectionResult, GridConfig
from .pencil import (
    COND_LIMIT,
    PencilDecomposition,
    build_hankel,
    decompose,
    default_pencil_parameter,
    svd_y0,
)

__all__ = [
    "ParameterEstimates",
    "PipelineConfig",
    "SampAnalysis",
    "poles_to_params",
    "amplitudes_least_squares",
    "amplitudes_from_modes",
    "select_components",
    "samp_pipeline",
    "classical_pipeline",
    "run_samp",
    "write_estimates_csv",
]

CLASSICAL_DETECTORS = ("sdd", "gap", "eff", "aic", "bic")


@dataclass(frozen=True)
class ParameterEstimates:
    """Frequencies, dampings, and amplitudes of the selected components."""

    frequencies: np.ndarray
    dampings: np.ndarray
    amplitudes: np.ndarray
    order: int
    mode_indices: tuple[int, ...]


@dataclass(frozen=True)
class PipelineConfig:
    """Tunables shared by the analysis pipelines.

    pencil_parameter: column-split parameter L; None picks round(N/3).
    truncation: weak-truncation rule applied before the eigendecomposition:
        "effective" (rounded exponential entropy of the singular values),
        "half" (keep ceil(L/2) values), or "none" (keep all).
    threshold_scale: per-mode scale c of the amplitude-based threshold;
        None picks 10*sqrt(N-L).  A vector gives per-mode values.
    sdd_digits: significant decimal digits assumed by the "sdd" detector.
    ite_max_order: largest candidate order for "aic"/"bic"; None means L.
    """

    pencil_parameter: int | None = None
    truncation: str = "effective"
    grid: GridConfig = field(default_factory=GridConfig)
    threshold_scale: float | np.ndarray | None = None
    sdd_digits: int = 8
    ite_max_order: int | None = None

    def __post_init__(self):
        if self.truncation not in ("effective", "half", "none"):
            raise ValueError(f"unknown truncation rule {self.truncation!r}")

    def resolve_pencil(self, n: int) -> int:
        if self.pencil_parameter is not None:
            if not 1 <= self.pencil_parameter <= n - 1:
                raise ValueError(f"pencil parameter {self.pencil_parameter} out of range")
            return self.pencil_parameter
        return default_pencil_parameter(n)


@dataclass(frozen=True)
class SampAnalysis:
    """Full pipeline state: decomposition, per-mode estimates, detection, selection."""

    pencil_parameter: int
    singular_values: np.ndarray
    decomposition: PencilDecomposition | None
    frequencies: np.ndarray
    dampings: np.ndarray
    amplitudes: np.ndarray
    detection: DetectionResult
    estimates: ParameterEstimates


def poles_to_params(eigenvalues: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies arg(lam) in (-pi, pi] and dampings -log|lam| of nonzero poles."""
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    if np.any(eigenvalues == 0):
        raise ValueError("zero eigenvalue has no finite damping")
    return np.angle(eigenvalues), -np.log(np.abs(eigenvalues))


def amplitudes_least_squares(y: np.ndarray, eigenvalues: np.ndarray) -> np.ndarray:
    """Amplitudes fitted by the pseudo-inverse of the N x M pole Vandermonde."""
    y = np.asarray(y, dtype=complex)
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    if eigenvalues.size > y.size:
        raise ValueError("more poles than samples")
    vander = eigenvalues[np.newaxis, :] ** np.arange(y.size)[:, np.newaxis]
    cond = np.linalg.cond(vander)
    if cond > COND_LIMIT:
        warnings.warn(
            f"pole Vandermonde condition {cond:.3e} exceeds {COND_LIMIT:.0e}",
            RuntimeWarning,
            stacklevel=2,
        )
    pinv = np.linalg.pinv(vander, rcond=1e-12)
    return pinv @ y


def amplitudes_from_modes(decomp: PencilDecomposition) -> np.ndarray:
    """Amplitudes as the elementwise product of the first left-mode row
    and the first right-mode column.

    Invariant to the eigenvector scaling of the decomposition and O(rank)
    given the mode matrices.
    """
    return decomp.left_modes[0, :] * decomp.right_modes[:, 0]


def select_components(
    params: ParameterEstimates, detection: DetectionResult
) -> ParameterEstimates:
    """Restrict per-mode estimates to the detected signal modes."""
    idx = np.asarray(detection.selected, dtype=int)
    return ParameterEstimates(
        frequencies=params.frequencies[idx],
        dampings=params.dampings[idx],
        amplitudes=params.amplitudes[idx],
        order=detection.order,
        mode_indices=tuple(detection.selected),
    )


def _truncation_rank(sigma: np.ndarray, rule: str) -> int:
    max_rank = int(np.count_nonzero(sigma > 0.0))
    if max_rank == 0:
        return 0
    if rule == "none":
        rank = sigma.size
    elif rule == "half":
        rank = sigma.size - sigma.size // 2
    else:
        rank = detect.detect_effective_rank(sigma)
    return max(1, min(rank, max_rank))


def _empty_estimates() -> ParameterEstimates:
    return ParameterEstimates(
        frequencies=np.empty(0),
        dampings=np.empty(0),
        amplitudes=np.empty(0, dtype=complex),
        order=0,
        mode_indices=(),
    )


def run_samp(y: np.ndarray, config: PipelineConfig = PipelineConfig()) -> SampAnalysis:
    """Estimate-then-select analysis of a time series; returns the full state.

    Steps: Hankel pencil at L, weak truncation of the singular values,
    eigendecomposition, per-mode parameter and amplitude estimates, mode
    features with amplitude-based thresholds, selection.
    """
    y = np.asarray(y, dtype=complex)
    if y.size < 8:
        raise ValueError(f"need at least 8 samples, got {y.size}")
    l = config.resolve_pencil(y.size)
    pair = build_hankel(y, l)
    sigma = np.linalg.svd(pair.y0, compute_uv=False)
    rank = _truncation_rank(sigma, config.truncation)
    if rank == 0:
        empty = _empty_estimates()
        return SampAnalysis(
            pencil_parameter=l,
            singular_values=sigma,
            decomposition=None,
            frequencies=np.empty(0),
            dampings=np.empty(0),
            amplitudes=np.empty(0, dtype=complex),
            detection=DetectionResult(features=(), selected=(), order=0),
            estimates=empty,
        )
    decomp = decompose(pair, rank)
    amps = amplitudes_from_modes(decomp)
    # exactly-zero eigenvalues (degenerate input) get damping +inf
    zero = decomp.eigenvalues == 0
    safe = np.where(zero, 1.0, decomp.eigenvalues)
    frequencies = np.angle(safe)
    dampings = np.where(zero, np.inf, -np.log(np.abs(safe)))
    detection = detect.detect_samp(decomp, amps, config.grid, config.threshold_scale)
    per_mode = ParameterEstimates(
        frequencies=frequencies,
        dampings=dampings,
        amplitudes=amps,
        order=decomp.rank,
        mode_indices=tuple(range(decomp.rank)),
    )
    return SampAnalysis(
        pencil_parameter=l,
        singular_values=sigma,
        decomposition=decomp,
        frequencies=frequencies,
        dampings=dampings,
        amplitudes=amps,
        detection=detection,
        estimates=select_components(per_mode, detection),
    )


def samp_pipeline(
    y: np.ndarray, config: PipelineConfig = PipelineConfig()
) -> ParameterEstimates:
    """Run the estimate-then-select pipeline and return the selected components."""
    return run_samp(y, config).estimates


def classical_pipeline(
    y: np.ndarray, config: PipelineConfig = PipelineConfig(), detector: str = "gap"
) -> ParameterEstimates:
    """Detect-then-estimate baseline: order from a singular-value rule (or an
    information criterion), then a rank-M truncated fit for poles and a
    Vandermonde least-squares fit for amplitudes."""
    detector = detector.lower()
    if detector not in CLASSICAL_DETECTORS:
        raise ValueError(f"unknown detector {detector!r}; expected one of {CLASSICAL_DETECTORS}")
    y = np.asarray(y, dtype=complex)
    if y.size < 8:
        raise ValueError(f"need at least 8 samples, got {y.size}")
    l = config.resolve_pencil(y.size)
    pair = build_hankel(y, l)
    factors = svd_y0(pair)
    sigma = factors.sigma

    if detector == "sdd":
        order = detect.detect_sdd(sigma, config.sdd_digits)
    elif detector == "gap":
        order = detect.detect_gap(sigma)
    elif detector == "eff":
        order = detect.detect_effective_rank(sigma)
    else:
        m_max = config.ite_max_order if config.ite_max_order is not None else l
        order = detect.detect_ite(y, l, min(m_max, l), criterion=detector)

    order = min(order, int(np.count_nonzero(sigma > 0.0)))
    if order == 0:
        return _empty_estimates()
    decomp = decompose(pair, order)
    nonzero = decomp.eigenvalues != 0
    if not np.all(nonzero):
        decomp_eigs = decomp.eigenvalues[nonzero]
    else:
        decomp_eigs = decomp.eigenvalues
    if decomp_eigs.size == 0:
        return _empty_estimates()
    frequencies, dampings = poles_to_params(decomp_eigs)
    amplitudes = amplitudes_least_squares(y, decomp_eigs)
    return ParameterEstimates(
        frequencies=frequencies,
        dampings=dampings,
        amplitudes=amplitudes,
        order=decomp_eigs.size,
        mode_indices=tuple(np.flatnonzero(nonzero)),
    )


def write_estimates_csv(path, estimates: ParameterEstimates, features=None) -> None:
    """Write selected components as CSV rows
    (theta, alpha, re_b, im_b, feature, mode_index)."""
    by_index = {}
    if features is not None:
        by_index = {f.index: f.normalized for f in features}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "alpha", "re_b", "im_b", "feature", "mode_index"])
        for pos, mode_index in enumerate(estimates.mode_indices):
            writer.writerow(
                [
                    format(estimates.frequencies[pos], ".17g"),
                    format(estimates.dampings[pos], ".17g"),
                    format(estimates.amplitudes[pos].real, ".17g"),
                    format(estimates.amplitudes[pos].imag, ".17g"),
                    format(by_index.get(mode_index, float("nan")), ".17g"),
                    mode_index,
                ]
            )
