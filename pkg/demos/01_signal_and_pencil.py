#!/usr/bin/env python3
"""Build a two-tone signal, add noise, and look inside its pencil.

Walks through the basic objects: the signal model, the Hankel pair, the
singular-value spectrum, and the exact pole recovery in the noiseless
case.
"""
import numpy as np

from samp import (
    ExponentialComponent,
    NoiseModel,
    SignalSpec,
    apply_noise,
    build_hankel,
    decompose,
    default_pencil_parameter,
    noise_variance_for_snr,
    synthesize,
)

# Two unit-amplitude tones separated by the Rayleigh limit 2*pi/N: the
# classical Fourier resolution threshold for N samples.
N = 71
spec = SignalSpec(
    components=(
        ExponentialComponent(amplitude=1.0, frequency=2.0),
        ExponentialComponent(amplitude=1.0, frequency=2.0 + 2 * np.pi / N),
    ),
    sample_count=N,
)
print("true poles:", np.round(spec.poles, 4))

x = synthesize(spec)
L = default_pencil_parameter(N)
print(f"pencil parameter L = {L} (N/3 rule), Hankel shape {(N - L, L + 1)}")

pair = build_hankel(x, L)
sigma = np.linalg.svd(pair.y0, compute_uv=False)
print("noiseless singular values (head):", np.round(sigma[:5], 6))
print("  -> exactly two nonzero values: the pencil sees the model order")

# The rank-2 reduction recovers the poles to machine precision.
d = decompose(pair, 2)
print("recovered eigenvalues:", np.round(d.eigenvalues, 10))
for z in spec.poles:
    print(f"  pole error: {np.min(np.abs(d.eigenvalues - z)):.2e}")

# With noise every singular value is nonzero and thresholding gets hard.
variance = noise_variance_for_snr(spec, snr_db=10.0)
y = apply_noise(x, NoiseModel(variance=variance), seed=0)
sigma_noisy = np.linalg.svd(build_hankel(y, L).y0, compute_uv=False)
print("\nnoisy singular values at 10 dB (head):", np.round(sigma_noisy[:6], 3))
print("  -> no clean gap after index 2; order detection needs more than sigma")
