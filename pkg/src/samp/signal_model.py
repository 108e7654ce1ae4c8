"""Synthesis of complex-exponential signals and seeded noise models.

A signal is a length-N complex sequence

    x(n) = sum_i b_i * z_i**n,      z_i = exp(-alpha_i + 1j*theta_i),

with non-negative damping factors alpha_i (so |z_i| <= 1) and normalized
frequencies theta_i in rad/sample.  Time series are plain complex ndarrays.
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExponentialComponent",
    "SignalSpec",
    "NoiseModel",
    "synthesize",
    "apply_noise",
    "noise_variance_for_snr",
    "component_snr",
    "write_signal_csv",
    "read_signal_csv",
]


@dataclass(frozen=True)
class ExponentialComponent:
    """One complex exponential: amplitude b, damping alpha, frequency theta."""

    amplitude: complex
    damping: float = 0.0
    frequency: float = 0.0

    def __post_init__(self):
        if self.damping < 0.0:
            raise ValueError(f"damping must be >= 0, got {self.damping}")
        if not (-math.pi < self.frequency <= math.pi):
            raise ValueError(
                f"frequency must lie in (-pi, pi], got {self.frequency}"
            )

    @property
    def pole(self) -> complex:
        """The pole z = exp(-damping + 1j*frequency), |z| <= 1."""
        return cmath.exp(complex(-self.damping, self.frequency))


@dataclass(frozen=True)
class SignalSpec:
    """A sum of distinct-pole exponentials observed over `sample_count` samples."""

    components: tuple[ExponentialComponent, ...]
    sample_count: int

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        m = len(self.components)
        if m < 1:
            raise ValueError("at least one component is required")
        if self.sample_count <= 2 * m:
            raise ValueError(
                f"sample_count must exceed 2*M for a feasible pencil; "
                f"got N={self.sample_count}, M={m}"
            )
        poles = self.poles
        for i in range(m):
            for k in range(i + 1, m):
                if poles[i] == poles[k]:
                    raise ValueError(f"poles {i} and {k} coincide: {poles[i]}")

    @property
    def order(self) -> int:
        return len(self.components)

    @property
    def poles(self) -> np.ndarray:
        return np.array([c.pole for c in self.components])

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([c.amplitude for c in self.components], dtype=complex)


@dataclass(frozen=True)
class NoiseModel:
    """Additive-noise description at total power E|w(n)|^2 = variance.

    kind "gaussian" is circular complex white Gaussian noise.  kind
    "binormal" is a two-component Gaussian mixture: with probability
    `binormal_threshold` a sample comes from a narrow zero-mean circular
    component; otherwise from a wide component whose scale is
    `binormal_scale_ratio` times larger and which carries a constant
    offset of `binormal_mean_ratio` times its scale (modelling
    intermittent structured interference).  The mixture is jointly scaled
    so its total mean-square power equals `variance`, keeping SNR
    definitions comparable across noise kinds.
    """

    kind: str = "gaussian"
    variance: float = 1.0
    binormal_threshold: float = 0.85
    binormal_scale_ratio: float = 3.0
    binormal_mean_ratio: float = 2.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "binormal"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.variance <= 0.0:
            raise ValueError(f"variance must be > 0, got {self.variance}")
        if not (0.0 < self.binormal_threshold < 1.0):
            raise ValueError("binormal_threshold must lie in (0, 1)")
        if self.binormal_scale_ratio <= 0.0:
            raise ValueError("binormal_scale_ratio must be > 0")
        if self.binormal_mean_ratio < 0.0:
            raise ValueError("binormal_mean_ratio must be >= 0")


def synthesize(spec: SignalSpec) -> np.ndarray:
    """Evaluate the noiseless signal of `spec` at n = 0..N-1.

    Returns a complex ndarray of length ``spec.sample_count``.
    """
    n = np.arange(spec.sample_count)
    # N x M table of z_i**n, summed against the amplitudes
    powers = spec.poles[np.newaxis, :] ** n[:, np.newaxis]
    return powers @ spec.amplitudes


def _noise_draw(model: NoiseModel, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` samples of the given noise model (total power model.variance)."""
    if model.kind == "gaussian":
        scale = math.sqrt(model.variance / 2.0)
        return scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
    # binormal: per-sample component chosen by a uniform draw
    r = model.binormal_threshold
    rho = model.binormal_scale_ratio
    mr = model.binormal_mean_ratio
    var_narrow = model.variance / (r + (1.0 - r) * rho * rho * (1.0 + mr * mr))
    sigma_narrow = math.sqrt(var_narrow)
    sigma_wide = rho * sigma_narrow
    wide = rng.uniform(size=count) >= r
    sigma = np.where(wide, sigma_wide, sigma_narrow)
    noise = (sigma / math.sqrt(2.0)) * (
        rng.standard_normal(count) + 1j * rng.standard_normal(count)
    )
    return noise + np.where(wide, mr * sigma_wide, 0.0)


def apply_noise(x: np.ndarray, model: NoiseModel, seed: int) -> np.ndarray:
    """Return x + w with w drawn from `model` using a PCG64 generator.

    The same (seed, model) pair always produces bit-identical output.
    """
    if model.variance <= 0.0:
        raise ValueError("noise variance must be > 0")
    x = np.asarray(x, dtype=complex)
    rng = np.random.Generator(np.random.PCG64(seed))
    return x + _noise_draw(model, x.shape[0], rng)


def noise_variance_for_snr(spec: SignalSpec, snr_db: float) -> float:
    """Noise variance realizing a total SNR of sum_i |b_i|^2 / sigma_w^2."""
    power = float(np.sum(np.abs(spec.amplitudes) ** 2))
    return power / 10.0 ** (snr_db / 10.0)


def component_snr(component: ExponentialComponent, variance: float) -> float:
    """Per-component SNR |b_i|^2 / sigma_w^2."""
    if variance <= 0.0:
        raise ValueError("variance must be > 0")
    return abs(component.amplitude) ** 2 / variance


def write_signal_csv(path, samples: np.ndarray, header: bool = True) -> None:
    """Write a complex time series as CSV rows `re,im` with 17 significant digits."""
    samples = np.asarray(samples, dtype=complex)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(["re", "im"])
        for value in samples:
            writer.writerow([format(value.real, ".17g"), format(value.imag, ".17g")])


def read_signal_csv(path) -> np.ndarray:
    """Read a `re,im` CSV (optional header line) into a complex ndarray.

    Raises ValueError naming the offending line for malformed rows and for
    files that contain no samples.
    """
    values: list[complex] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if lineno == 1 and [c.strip().lower() for c in row[:2]] == ["re", "im"]:
                continue
            if len(row) < 2:
                raise ValueError(f"line {lineno}: expected two columns re,im")
            try:
                values.append(complex(float(row[0]), float(row[1])))
            except ValueError:
                raise ValueError(f"line {lineno}: could not parse {row!r}") from None
    if not values:
        raise ValueError("no samples found in signal file")
    return np.array(values)
