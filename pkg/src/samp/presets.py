"""Shipped benchmark presets: the closely-spaced two- and four-component
scenarios (undamped and damped) under SNR, sample-count, and separation
sweeps, the noise-mismatch AUC table, and the timing/amplitude studies.

Every preset is fully determined by its configuration plus one seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .bench import ExperimentConfig, ScenarioTemplate

__all__ = ["Preset", "PRESETS", "get_preset"]

_TWO = ScenarioTemplate(order=2, theta1=2.0, sample_count=71)
_TWO_DAMPED = replace(_TWO, dampings=(0.03, 0.05))
_FOUR = ScenarioTemplate(order=4, theta1=2.0, sample_count=71)
_FOUR_DAMPED = replace(_FOUR, dampings=(0.03, 0.05, 0.03, 0.05))

_SNR_GRID = tuple(float(v) for v in range(-10, 21, 2))
_SAMPLES_GRID = tuple(float(n) for n in range(41, 132, 10))
_RAYLEIGH_71 = 2.0 * math.pi / 71
_SEPARATION_GRID = tuple(_RAYLEIGH_71 * f for f in (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0))


@dataclass(frozen=True)
class Preset:
    """A named experiment plan.

    kind "montecarlo" runs one or more ExperimentConfig variants; kind
    "timing" measures per-method pipeline runtimes over the grid; kind
    "amps" runs the amplitude-extractor study.
    """

    name: str
    description: str
    kind: str
    variants: tuple[tuple[str, ExperimentConfig], ...] = ()
    amps_grid: tuple[int, ...] = (100, 200, 400, 600)


def _mc(name, description, scenario, sweep="snr_db", grid=_SNR_GRID, **kwargs):
    base = ExperimentConfig(scenario=scenario, sweep=sweep, grid=grid, **kwargs)
    return Preset(name=name, description=description, kind="montecarlo", variants=(("base", base),))


def _build_presets() -> dict[str, Preset]:
    presets = {}

    presets["fig3a"] = _mc(
        "fig3a",
        "Detection probability vs SNR, two undamped components at Rayleigh spacing",
        _TWO,
    )
    presets["fig3b"] = _mc(
        "fig3b",
        "Detection probability vs SNR, two damped components (0.03, 0.05)",
        _TWO_DAMPED,
    )
    presets["fig3c"] = _mc(
        "fig3c",
        "Detection probability vs SNR, four undamped components in two clusters",
        _FOUR,
    )
    presets["fig3d"] = _mc(
        "fig3d",
        "Detection probability vs SNR, four damped components in two clusters",
        _FOUR_DAMPED,
    )
    presets["fig4"] = _mc(
        "fig4",
        "Detection probability vs sample count at 8 dB SNR, two undamped components",
        replace(_TWO, snr_db=8.0),
        sweep="samples",
        grid=_SAMPLES_GRID,
    )
    presets["fig5"] = _mc(
        "fig5",
        "Detection probability vs frequency separation at 10 dB SNR, N = 71",
        replace(_TWO, snr_db=10.0),
        sweep="separation",
        grid=_SEPARATION_GRID,
    )
    presets["fig6"] = _mc(
        "fig6",
        "Frequency RMSE/bias vs SNR against the Cramer-Rao bound, two undamped components",
        _TWO,
    )

    table_variants = []
    for damp_name, scenario in (("undamped", _TWO), ("damped", _TWO_DAMPED)):
        for noise in ("gaussian", "binormal"):
            table_variants.append(
                (
                    f"{damp_name}_{noise}",
                    ExperimentConfig(
                        scenario=scenario,
                        sweep="snr_db",
                        grid=_SNR_GRID,
                        noise_kind=noise,
                    ),
                )
            )
    presets["table1"] = Preset(
        name="table1",
        description="AUC of every method under Gaussian and bi-normal noise, "
        "undamped and damped two-component scenarios",
        kind="montecarlo",
        variants=tuple(table_variants),
    )

    presets["fig7-timing"] = Preset(
        name="fig7-timing",
        description="Wall-clock time per pipeline invocation vs sample count",
        kind="timing",
        variants=(
            (
                "base",
                ExperimentConfig(
                    scenario=replace(_TWO, snr_db=10.0),
                    sweep="samples",
                    grid=(100.0, 200.0, 400.0, 600.0),
                    trials=1,
                ),
            ),
        ),
    )
    presets["fig8-amps"] = Preset(
        name="fig8-amps",
        description="Amplitude extractors at full truncation rank: RMSE and runtime vs N",
        kind="amps",
    )
    return presets


PRESETS: dict[str, Preset] = _build_presets()


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown preset {name!r}; available: {known}") from None
