#!/usr/bin/env python3
"""Estimate-then-select versus detect-then-estimate on the same draws.

Runs the structure-aware pipeline next to every classical baseline on a
handful of noisy draws in the threshold region and tabulates the detected
orders.  The singular-value detectors have no notion of mode structure
and drift high or low; the information criteria pay for a full per-order
sweep.
"""
import numpy as np

from samp import (
    ExponentialComponent,
    NoiseModel,
    SignalSpec,
    apply_noise,
    classical_pipeline,
    noise_variance_for_snr,
    samp_pipeline,
    synthesize,
)

N = 71
spec = SignalSpec(
    components=(
        ExponentialComponent(amplitude=1.0, frequency=2.0),
        ExponentialComponent(amplitude=1.0, frequency=2.0 + 2 * np.pi / N),
    ),
    sample_count=N,
)
x = synthesize(spec)
variance = noise_variance_for_snr(spec, snr_db=10.0)

methods = ("samp", "gap", "sdd", "eff", "aic", "bic")
print("detected order per draw (truth = 2):\n")
print("  draw  " + "  ".join(f"{m:>4s}" for m in methods))
orders = {m: [] for m in methods}
for seed in range(10):
    y = apply_noise(x, NoiseModel(variance=variance), seed)
    row = []
    for m in methods:
        est = samp_pipeline(y) if m == "samp" else classical_pipeline(y, detector=m)
        orders[m].append(est.order)
        row.append(est.order)
    print(f"  {seed:4d}  " + "  ".join(f"{o:4d}" for o in row))

print("\ncorrect-order rate over these draws:")
for m in methods:
    rate = np.mean(np.array(orders[m]) == 2)
    print(f"  {m:>4s}: {rate:.1f}")

# The selected components, not just their count:
y = apply_noise(x, NoiseModel(variance=variance), 3)
est = samp_pipeline(y)
print("\nstructure-aware estimates on draw 3:")
for pos in range(est.order):
    print(
        f"  theta = {est.frequencies[pos]:+.4f}  alpha = {est.dampings[pos]:+.4f}  "
        f"|b| = {abs(est.amplitudes[pos]):.3f}"
    )
print("true:", [round(c.frequency, 4) for c in spec.components])
