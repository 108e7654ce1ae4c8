"""Structure-aware matrix pencil toolkit.

Detection of the number of complex exponentials in a noisy signal and
estimation of their frequencies, dampings, and amplitudes, built on the
spectral structure of the pencil modes.  Classical singular-value and
information-criterion baselines, a perturbation-analysis oracle, and a
deterministic Monte-Carlo benchmark harness are included.
"""

from .signal_model import (
    ExponentialComponent,
    NoiseModel,
    SignalSpec,
    apply_noise,
    component_snr,
    noise_variance_for_snr,
    read_signal_csv,
    synthesize,
    write_signal_csv,
)
from .pencil import (
    HankelPair,
    PencilDecomposition,
    SvdFactors,
    build_hankel,
    decompose,
    default_pencil_parameter,
    svd_y0,
)
from .detect import (
    DetectionResult,
    GridConfig,
    ModeFeature,
    concentration_weights,
    detect_effective_rank,
    detect_gap,
    detect_ite,
    detect_samp,
    detect_sdd,
    maximize_similarity,
    practical_threshold,
    samp_features,
    similarity,
    test_vector,
    theoretical_threshold,
)
from .estimate import (
    ParameterEstimates,
    PipelineConfig,
    amplitudes_from_modes,
    amplitudes_least_squares,
    classical_pipeline,
    poles_to_params,
    run_samp,
    samp_pipeline,
    select_components,
)
from .bench import (
    ExperimentConfig,
    MetricSeries,
    ScenarioTemplate,
    amplitude_study,
    auc,
    crb_frequencies,
    detection_probability,
    match_and_score,
    run_monte_carlo,
    time_methods,
)
from .presets import PRESETS, get_preset

__version__ = "0.1.0"
