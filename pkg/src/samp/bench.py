"""Deterministic Monte-Carlo benchmarking of the detection/estimation methods.

An experiment sweeps one axis (SNR in dB, sample count, or frequency
separation), runs a fixed number of independent noise draws per sweep
point, executes every requested method on the same draws, and aggregates
detection probability, per-component frequency bias/RMSE with a
model-order-mismatch penalty, the frequency Cramer-Rao bound as a
reference, AUC per method, and mean runtimes.

Per-trial seeds derive from (base seed, sweep index, trial index), so the
output is bit-identical across runs and independent of scheduling; sweep
points may execute in parallel worker processes.
"""
from __future__ import annotations

import csv
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimate import (
    ParameterEstimates,
    PipelineConfig,
    classical_pipeline,
    samp_pipeline,
)
from .signal_model import (
    ExponentialComponent,
    NoiseModel,
    SignalSpec,
    apply_noise,
    noise_variance_for_snr,
    synthesize,
)

__all__ = [
    "ScenarioTemplate",
    "ExperimentConfig",
    "MethodMetrics",
    "MetricSeries",
    "realize_scenario",
    "run_monte_carlo",
    "detection_probability",
    "auc",
    "match_and_score",
    "crb_jacobian",
    "crb_frequencies",
    "time_methods",
    "amplitude_study",
    "write_metric_csv",
    "write_metrics_csv",
    "write_summary_csv",
    "write_timing_csv",
    "dump_matrix_csv",
]

KNOWN_METHODS = ("samp", "gap", "sdd", "eff", "aic", "bic")


def _wrap_angle(x):
    """Wrap to (-pi, pi]."""
    return np.angle(np.exp(1j * np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class ScenarioTemplate:
    """Parametric scenario: one or two clusters of closely spaced exponentials.

    Frequencies are theta1 and theta1 + separation; with `mirrored` a
    second cluster at the negated frequencies doubles the order.  A
    separation of None means the Rayleigh spacing 2*pi/N evaluated at the
    current sample count.
    """

    order: int = 2
    theta1: float = 2.0
    separation: float | None = None
    dampings: tuple[float, ...] = ()
    amplitudes: tuple[complex, ...] = ()
    sample_count: int = 71
    snr_db: float = 8.0

    def __post_init__(self):
        if self.order not in (1, 2, 4):
            raise ValueError("scenario order must be 1, 2, or 4")
        if self.dampings and len(self.dampings) != self.order:
            raise ValueError("need one damping per component")
        if self.amplitudes and len(self.amplitudes) != self.order:
            raise ValueError("need one amplitude per component")

    def frequencies(self, n: int, separation: float | None = None) -> np.ndarray:
        sep = separation if separation is not None else self.separation
        if sep is None:
            sep = 2.0 * math.pi / n
        if self.order == 1:
            freqs = [self.theta1]
        elif self.order == 2:
            freqs = [self.theta1, self.theta1 + sep]
        else:
            freqs = [
                self.theta1,
                self.theta1 + sep,
                -self.theta1,
                -self.theta1 - sep,
            ]
        return _wrap_angle(freqs)

    def build_spec(self, n: int, separation: float | None = None) -> SignalSpec:
        freqs = self.frequencies(n, separation)
        damps = self.dampings if self.dampings else (0.0,) * self.order
        amps = self.amplitudes if self.amplitudes else (1.0 + 0.0j,) * self.order
        comps = tuple(
            ExponentialComponent(amplitude=amps[i], damping=damps[i], frequency=freqs[i])
            for i in range(self.order)
        )
        return SignalSpec(components=comps, sample_count=n)


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte-Carlo experiment: scenario, sweep axis/grid, methods, noise, seed."""

    scenario: ScenarioTemplate
    sweep: str = "snr_db"  # snr_db | samples | separation
    grid: tuple[float, ...] = tuple(range(-10, 21, 2))
    trials: int = 500
    methods: tuple[str, ...] = KNOWN_METHODS
    noise_kind: str = "gaussian"
    binormal_threshold: float = 0.85
    binormal_scale_ratio: float = 3.0
    binormal_mean_ratio: float = 2.0
    seed: int = 0
    penalty_mode: str = "auto"  # auto | fixed | current
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    workers: int = 1
    include_crb: bool = True

    def __post_init__(self):
        if self.sweep not in ("snr_db", "samples", "separation"):
            raise ValueError(f"unknown sweep axis {self.sweep!r}")
        grid = np.asarray(self.grid, dtype=float)
        if grid.size == 0 or (grid.size > 1 and not np.all(np.diff(grid) > 0)):
            raise ValueError("sweep grid must be nonempty and strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        unknown = set(m.lower() for m in self.methods) - set(KNOWN_METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if self.penalty_mode not in ("auto", "fixed", "current"):
            raise ValueError(f"unknown penalty mode {self.penalty_mode!r}")

    def penalty_divisor(self, n_current: int) -> float:
        mode = self.penalty_mode
        if mode == "auto":
            mode = "current" if self.sweep == "samples" else "fixed"
        return float(n_current if mode == "current" else self.scenario.sample_count)


def realize_scenario(
    config: ExperimentConfig, x: float
) -> tuple[SignalSpec, float]:
    """Signal spec and noise variance at sweep value x."""
    template = config.scenario
    if config.sweep == "snr_db":
        spec = template.build_spec(template.sample_count)
        snr_db = float(x)
    elif config.sweep == "samples":
        spec = template.build_spec(int(round(x)))
        snr_db = template.snr_db
    else:
        spec = template.build_spec(template.sample_count, separation=float(x))
        snr_db = template.snr_db
    return spec, noise_variance_for_snr(spec, snr_db)


@dataclass(frozen=True)
class MethodMetrics:
    """Aggregated per-method results over a sweep."""

    p_d: np.ndarray          # (n_x,)
    ci_halfwidth: np.ndarray  # (n_x,), 1.96 * binomial s.e.
    bias: np.ndarray         # (n_x, M), signed mean frequency error per component
    rmse: np.ndarray         # (n_x, M)
    auc: float
    mean_runtime: np.ndarray  # (n_x,), seconds (wall clock, not deterministic)
    failures: np.ndarray     # (n_x,), trials whose pipeline raised


@dataclass(frozen=True)
class MetricSeries:
    x: np.ndarray
    truth_order: int
    per_method: dict[str, MethodMetrics]
    crb: np.ndarray | None  # (n_x, M) frequency CRB, when requested


def detection_probability(orders, truth: int) -> float:
    """Fraction of exact model-order matches."""
    orders = np.asarray(orders)
    if orders.size == 0:
        raise ValueError("need at least one detected order")
    return float(np.mean(orders == truth))


def auc(x, pd) -> float:
    """Trapezoidal area under a detection curve, normalized to [0, 1]."""
    x = np.asarray(x, dtype=float)
    pd = np.asarray(pd, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two sweep points for an AUC")
    if not np.all(np.diff(x) > 0):
        raise ValueError("sweep values must be strictly increasing")
    if np.any(pd < 0) or np.any(pd > 1):
        raise ValueError("detection probabilities must lie in [0, 1]")
    return float(np.trapezoid(pd, x) / (x[-1] - x[0]))


def _greedy_match(est: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Greedy nearest assignment (wrapped frequency distance), no replacement.

    Returns, for each truth index, the matched estimate index.
    """
    dist = np.abs(_wrap_angle(est[np.newaxis, :] - truth[:, np.newaxis]))
    match = np.full(truth.size, -1, dtype=int)
    taken_rows: set[int] = set()
    taken_cols: set[int] = set()
    flat = np.argsort(dist, axis=None, kind="stable")
    for pos in flat:
        i, j = divmod(int(pos), est.size)
        if i in taken_rows or j in taken_cols:
            continue
        match[i] = j
        taken_rows.add(i)
        taken_cols.add(j)
        if len(taken_rows) == truth.size:
            break
    return match


def match_and_score(
    estimates: ParameterEstimates, truth: SignalSpec, penalty_divisor: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-component signed frequency error and squared error for one trial.

    On a correct order the estimates are greedily matched to the true
    frequencies (order-free); otherwise every component is charged the
    fixed penalty 2*pi / penalty_divisor.
    """
    truth_freqs = np.array([c.frequency for c in truth.components])
    m = truth_freqs.size
    if estimates.order != m:
        penalty = 2.0 * math.pi / penalty_divisor
        return np.full(m, penalty), np.full(m, penalty**2)
    match = _greedy_match(estimates.frequencies, truth_freqs)
    err = _wrap_angle(estimates.frequencies[match] - truth_freqs)
    return err, err**2


def crb_jacobian(spec: SignalSpec) -> np.ndarray:
    """Analytic Jacobian of the noiseless signal w.r.t. the real parameters.

    Parameters are ordered per component as (|b|, phase, [damping,] theta);
    damping columns appear only when some component is damped.
    """
    n = np.arange(spec.sample_count)
    include_damping = any(c.damping != 0.0 for c in spec.components)
    cols = []
    for comp in spec.components:
        b = complex(comp.amplitude)
        mag = abs(b)
        if mag == 0.0:
            raise ValueError("zero amplitudes make the phase unidentifiable")
        base = b * comp.pole ** n
        cols.append(base / mag)            # d / d|b|
        cols.append(1j * base)             # d / d phase
        if include_damping:
            cols.append(-n * base)         # d / d damping
        cols.append(1j * n * base)         # d / d theta
    return np.column_stack(cols)


def crb_frequencies(spec: SignalSpec, variance: float) -> np.ndarray:
    """Frequency Cramer-Rao bounds (rad^2) under circular white Gaussian noise.

    The Fisher information is (2/variance) * Re(J^H J) over the real
    parameters; undamped scenarios omit the damping rows/columns.
    """
    if variance <= 0.0:
        raise ValueError("variance must be > 0")
    jac = crb_jacobian(spec)
    fim = (2.0 / variance) * (jac.conj().T @ jac).real
    cond = np.linalg.cond(fim)
    if cond > 1e12:
        warnings.warn(
            f"Fisher information condition {cond:.3e}; bounds are unreliable "
            "(nearly coincident poles)",
            RuntimeWarning,
            stacklevel=2,
        )
    cov = np.linalg.inv(fim)
    per_component = fim.shape[0] // spec.order
    theta_idx = np.arange(spec.order) * per_component + (per_component - 1)
    return cov[theta_idx, theta_idx]


def _run_method(method: str, y: np.ndarray, pipeline: PipelineConfig) -> ParameterEstimates:
    if method == "samp":
        return samp_pipeline(y, pipeline)
    return classical_pipeline(y, pipeline, detector=method)


def _run_sweep_point(config: ExperimentConfig, ix: int, x: float) -> dict:
    """All trials of one sweep point; returns per-method raw aggregates."""
    spec, variance = realize_scenario(config, x)
    model = NoiseModel(
        kind=config.noise_kind,
        variance=variance,
        binormal_threshold=config.binormal_threshold,
        binormal_scale_ratio=config.binormal_scale_ratio,
        binormal_mean_ratio=config.binormal_mean_ratio,
    )
    clean = synthesize(spec)
    divisor = config.penalty_divisor(spec.sample_count)
    methods = tuple(m.lower() for m in config.methods)

    m = spec.order
    orders = {meth: np.zeros(config.trials, dtype=int) for meth in methods}
    bias_sum = {meth: np.zeros(m) for meth in methods}
    sq_sum = {meth: np.zeros(m) for meth in methods}
    runtime = {meth: 0.0 for meth in methods}
    failures = {meth: 0 for meth in methods}

    for trial in range(config.trials):
        trial_seed = config.seed + ix * config.trials + trial
        y = apply_noise(clean, model, trial_seed)
        for meth in methods:
            start = time.perf_counter()
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    estimates = _run_method(meth, y, config.pipeline)
            except (ValueError, np.linalg.LinAlgError):
                failures[meth] += 1
                orders[meth][trial] = -1
                penalty = 2.0 * math.pi / divisor
                bias_sum[meth] += penalty
                sq_sum[meth] += penalty**2
                continue
            finally:
                runtime[meth] += time.perf_counter() - start
            orders[meth][trial] = estimates.order
            bias, sq = match_and_score(estimates, spec, divisor)
            bias_sum[meth] += bias
            sq_sum[meth] += sq

    out = {"crb": crb_frequencies(spec, variance) if config.include_crb else None}
    for meth in methods:
        p_d = detection_probability(orders[meth], m)
        out[meth] = {
            "p_d": p_d,
            "ci": 1.96 * math.sqrt(p_d * (1.0 - p_d) / config.trials),
            "bias": bias_sum[meth] / config.trials,
            "rmse": np.sqrt(sq_sum[meth] / config.trials),
            "runtime": runtime[meth] / config.trials,
            "failures": failures[meth],
        }
    return out


def run_monte_carlo(config: ExperimentConfig) -> MetricSeries:
    """Run the experiment; bit-identical output for identical configs.

    Trial failures are recorded per method (counted as detection misses
    and penalized in the error metrics), never fatal.
    """
    xs = np.asarray(config.grid, dtype=float)
    points: list[dict]
    if config.workers > 1 and xs.size > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            points = list(pool.map(_run_sweep_point, [config] * xs.size, range(xs.size), xs))
    else:
        points = [_run_sweep_point(config, ix, x) for ix, x in enumerate(xs)]

    methods = tuple(m.lower() for m in config.methods)
    m = config.scenario.order
    per_method: dict[str, MethodMetrics] = {}
    for meth in methods:
        p_d = np.array([pt[meth]["p_d"] for pt in points])
        per_method[meth] = MethodMetrics(
            p_d=p_d,
            ci_halfwidth=np.array([pt[meth]["ci"] for pt in points]),
            bias=np.vstack([pt[meth]["bias"] for pt in points]),
            rmse=np.vstack([pt[meth]["rmse"] for pt in points]),
            auc=auc(xs, p_d) if xs.size >= 2 else float(p_d[0]),
            mean_runtime=np.array([pt[meth]["runtime"] for pt in points]),
            failures=np.array([pt[meth]["failures"] for pt in points]),
        )
    crb = None
    if config.include_crb:
        crb = np.vstack([pt["crb"] for pt in points])
    return MetricSeries(x=xs, truth_order=m, per_method=per_method, crb=crb)


def time_methods(
    config: ExperimentConfig, repeats: int = 5
) -> dict[str, np.ndarray]:
    """Median wall-clock seconds per pipeline invocation at each sweep point.

    One warmup invocation per method is excluded from the timing.
    """
    xs = np.asarray(config.grid, dtype=float)
    methods = tuple(m.lower() for m in config.methods)
    out = {meth: np.zeros(xs.size) for meth in methods}
    for ix, x in enumerate(xs):
        spec, variance = realize_scenario(config, x)
        model = NoiseModel(kind=config.noise_kind, variance=variance)
        y = apply_noise(synthesize(spec), model, config.seed + ix)
        for meth in methods:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                _run_method(meth, y, config.pipeline)  # warmup
                samples = []
                for _ in range(repeats):
                    start = time.perf_counter()
                    _run_method(meth, y, config.pipeline)
                    samples.append(time.perf_counter() - start)
            out[meth][ix] = float(np.median(samples))
    return out


def amplitude_study(
    n_grid: tuple[int, ...] = (100, 200, 400, 600),
    snr_db: float = 10.0,
    trials: int = 10,
    seed: int = 0,
    order: int = 4,
    repeats: int = 3,
) -> list[dict]:
    """Accuracy/runtime comparison of the two amplitude extractors at full rank.

    For each signal length, a rank-L decomposition is computed once per
    trial; both extractors then run on it (the least-squares path fits the
    raw samples against the estimated pole Vandermonde).  Estimated
    amplitudes are matched to the true components by nearest eigenvalue.
    Returns rows {n, method, rmse, seconds}.
    """
    from .pencil import build_hankel, decompose, default_pencil_parameter
    from .estimate import amplitudes_from_modes, amplitudes_least_squares

    template = ScenarioTemplate(order=order)
    rows = []
    for n in n_grid:
        spec = template.build_spec(int(n))
        variance = noise_variance_for_snr(spec, snr_db)
        model = NoiseModel(kind="gaussian", variance=variance)
        clean = synthesize(spec)
        l = default_pencil_parameter(int(n))
        poles = spec.poles
        sq = {"modes": 0.0, "least_squares": 0.0}
        seconds = {"modes": [], "least_squares": []}
        for trial in range(trials):
            y = apply_noise(clean, model, seed + trial)
            pair = build_hankel(y, l)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                decomp = decompose(pair, min(l, pair.y0.shape[0]))
            nearest = np.array(
                [np.argmin(np.abs(decomp.eigenvalues - z)) for z in poles]
            )

            start = time.perf_counter()
            for _ in range(repeats):
                amps_modes = amplitudes_from_modes(decomp)
            seconds["modes"].append((time.perf_counter() - start) / repeats)

            nonzero = decomp.eigenvalues != 0
            start = time.perf_counter()
            for _ in range(repeats):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    amps_ls_nz = amplitudes_least_squares(y, decomp.eigenvalues[nonzero])
            seconds["least_squares"].append((time.perf_counter() - start) / repeats)
            amps_ls = np.zeros(decomp.rank, dtype=complex)
            amps_ls[nonzero] = amps_ls_nz

            truth = spec.amplitudes
            sq["modes"] += float(np.sum(np.abs(amps_modes[nearest] - truth) ** 2))
            sq["least_squares"] += float(np.sum(np.abs(amps_ls[nearest] - truth) ** 2))
        for method in ("modes", "least_squares"):
            rows.append(
                {
                    "n": int(n),
                    "method": method,
                    "rmse": math.sqrt(sq[method] / (trials * order)),
                    "seconds": float(np.median(seconds[method])),
                }
            )
    return rows


# ---------------------------------------------------------------------------
# CSV emission.  All metric files are deterministic for a fixed config; wall
# clock timings go only to the dedicated timing writer.

def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_metric_csv(path, series: MetricSeries, metric: str) -> None:
    """One metric as (x, method, value, ci_halfwidth) rows.

    metric is one of p_d, rmse, bias, failures; rmse/bias are averaged
    over components (bias as mean magnitude).  The CI column is the
    binomial half-width for p_d and nan otherwise.  A `crb` pseudo-method
    row (root mean bound over components) accompanies rmse when available.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "method", "value", "ci_halfwidth"])
        for method, metrics in series.per_method.items():
            for ix, x in enumerate(series.x):
                if metric == "p_d":
                    value, ci = metrics.p_d[ix], metrics.ci_halfwidth[ix]
                elif metric == "rmse":
                    value, ci = math.sqrt(np.mean(metrics.rmse[ix] ** 2)), float("nan")
                elif metric == "bias":
                    value, ci = np.mean(np.abs(metrics.bias[ix])), float("nan")
                elif metric == "failures":
                    value, ci = metrics.failures[ix], float("nan")
                else:
                    raise ValueError(f"unknown metric {metric!r}")
                writer.writerow([_fmt(x), method, _fmt(value), _fmt(ci)])
        if metric == "rmse" and series.crb is not None:
            for ix, x in enumerate(series.x):
                writer.writerow(
                    [_fmt(x), "crb", _fmt(math.sqrt(np.mean(series.crb[ix]))), _fmt(float("nan"))]
                )


def write_metrics_csv(path, series: MetricSeries) -> None:
    """Combined overview: (x, method, p_d, ci_halfwidth, bias, rmse, failures)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "method", "p_d", "ci_halfwidth", "bias", "rmse", "failures"])
        for method, metrics in series.per_method.items():
            for ix, x in enumerate(series.x):
                writer.writerow(
                    [
                        _fmt(x),
                        method,
                        _fmt(metrics.p_d[ix]),
                        _fmt(metrics.ci_halfwidth[ix]),
                        _fmt(np.mean(np.abs(metrics.bias[ix]))),
                        _fmt(math.sqrt(np.mean(metrics.rmse[ix] ** 2))),
                        int(metrics.failures[ix]),
                    ]
                )


def write_summary_csv(path, rows) -> None:
    """AUC summary rows (variant, method, auc)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "method", "auc"])
        for variant, method, value in rows:
            writer.writerow([variant, method, _fmt(value)])


def write_timing_csv(path, rows) -> None:
    """Wall-clock rows (x, method, seconds); inherently not run-reproducible."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "method", "seconds"])
        for x, method, seconds in rows:
            writer.writerow([_fmt(x), method, _fmt(seconds)])


def dump_matrix_csv(path, matrix: np.ndarray) -> None:
    """Debug dump of a complex matrix: row-major, re/im interleaved per row.

    The first line records the shape and layout.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rows", matrix.shape[0], "cols", matrix.shape[1], "layout", "re-im-interleaved-row-major"])
        for row in matrix:
            flat = []
            for value in row:
                flat.extend([_fmt(value.real), _fmt(value.imag)])
            writer.writerow(flat)
