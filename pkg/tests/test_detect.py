import math

import numpy as np
import pytest

from samp.detect import (
    GridConfig,
    concentration_weights,
    default_threshold_scale,
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
from samp.estimate import amplitudes_from_modes
from samp.pencil import build_hankel, decompose
from samp.signal_model import (
    ExponentialComponent,
    NoiseModel,
    SignalSpec,
    apply_noise,
    noise_variance_for_snr,
    synthesize,
)


def two_tone_spec(n=71):
    freqs = (2.0, 2.0 + 2 * math.pi / n)
    return SignalSpec(
        components=tuple(
            ExponentialComponent(amplitude=1.0, frequency=f) for f in freqs
        ),
        sample_count=n,
    )


class TestTestVector:
    def test_unit_pole(self):
        assert np.array_equal(test_vector(1.0, 4), [1, 1, 1, 1])

    def test_quarter_turn(self):
        assert np.allclose(test_vector(1j, 4), [1, 1j, -1, -1j])

    def test_norm_matches_geometric_series(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            z = rng.uniform(0.2, 0.99) * np.exp(1j * rng.uniform(-math.pi, math.pi))
            length = int(rng.integers(2, 60))
            direct = float(np.sum(np.abs(test_vector(z, length)) ** 2))
            closed = (1 - abs(z) ** (2 * length)) / (1 - abs(z) ** 2)
            assert direct == pytest.approx(closed, rel=1e-10)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            test_vector(0.0, 4)


class TestSimilarity:
    def test_matched_vector_scores_one(self):
        z = 0.9 * np.exp(1j * 1.1)
        mode = test_vector(z, 30)
        assert similarity(mode, z) == pytest.approx(1.0, abs=1e-12)

    def test_dft_orthogonality(self):
        k_len = 32
        mode = test_vector(np.exp(2j * math.pi * 3 / k_len), k_len)
        other = np.exp(2j * math.pi * 7 / k_len)
        assert similarity(mode, other) < 1e-20

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        mode = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        z = 0.95 * np.exp(0.4j)
        for c in (2.0, -3.5j, 0.1 + 0.2j):
            assert similarity(c * mode, z) == pytest.approx(similarity(mode, z), rel=1e-12)

    def test_zero_mode_rejected(self):
        with pytest.raises(ValueError):
            similarity(np.zeros(8, dtype=complex), 1.0)


class TestMaximizeSimilarity:
    def test_pure_tone_on_circle(self):
        mode = test_vector(np.exp(1j * 1.0), 47)
        z, value = maximize_similarity(mode)
        assert value == pytest.approx(1.0, abs=1e-6)
        assert abs(np.angle(z) - 1.0) <= math.pi / (8 * 47)

    def test_numerator_equals_power_spectrum(self):
        rng = np.random.default_rng(2)
        mode = rng.standard_normal(47) + 1j * rng.standard_normal(47)
        grid = GridConfig()
        nfft = grid.fft_size(47)
        spectrum = np.abs(np.fft.fft(mode, nfft)) ** 2
        for k in (0, 5, 100, nfft - 1):
            z = np.exp(2j * math.pi * k / nfft)
            numer = abs(np.vdot(test_vector(z, 47), mode)) ** 2
            assert numer == pytest.approx(spectrum[k], rel=1e-10)

    def test_value_dominates_grid(self):
        rng = np.random.default_rng(3)
        grid = GridConfig()
        nfft = grid.fft_size(30)
        for _ in range(5):
            mode = rng.standard_normal(30) + 1j * rng.standard_normal(30)
            _, value = maximize_similarity(mode, grid)
            for radius in grid.radius_grid[::4]:
                for k in range(0, nfft, 37):
                    z = radius * np.exp(2j * math.pi * k / nfft)
                    assert value >= similarity(mode, z) - 1e-12

    def test_damped_tone_radius_found(self):
        z_true = math.exp(-0.08) * np.exp(1j * 0.7)
        mode = test_vector(z_true, 47)
        z, value = maximize_similarity(mode)
        assert value > 0.999
        assert abs(abs(z) - abs(z_true)) < 0.02

    def test_noise_modes_score_low(self):
        rng = np.random.default_rng(4)
        low = 0
        for _ in range(500):
            mode = rng.standard_normal(47) + 1j * rng.standard_normal(47)
            _, value = maximize_similarity(mode)
            low += value < 0.5
        assert low >= 0.95 * 500


class TestConcentrationWeights:
    def test_equal_magnitudes(self):
        lams = np.exp(1j * np.linspace(0, 2, 5))
        assert np.allclose(concentration_weights(lams), 5.0)

    def test_two_values(self):
        assert np.allclose(concentration_weights(np.array([2.0, 1.0])), [1.25, 5.0])

    def test_single_value(self):
        assert np.allclose(concentration_weights(np.array([0.5j])), [1.0])

    def test_zero_eigenvalue_gets_infinite_weight(self):
        d = concentration_weights(np.array([1.0, 1e-20]))
        assert np.isinf(d[1]) and d[0] == pytest.approx(1.0)


class TestThresholds:
    def test_theoretical_endpoints(self):
        assert theoretical_threshold(0.0) == pytest.approx(1.0)
        assert theoretical_threshold(1.0) == pytest.approx(0.0)
        assert theoretical_threshold(1.0 / 3.0) == pytest.approx(0.25)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            theoretical_threshold(-0.1)

    def test_huge_amplitude_approaches_one(self):
        assert practical_threshold(1e12, 1.0, default_threshold_scale(47), 47) > 0.999999

    def test_unit_ratio_gives_zero(self):
        c = 2.0 * math.sqrt(47)
        assert practical_threshold(2.0, 1.0, c, 47) == pytest.approx(0.0, abs=1e-15)

    def test_default_scale_value(self):
        # unit amplitude on the unit circle with the default scale: the
        # surrogate ratio is 10, giving the V-shaped bar (9/11)^2
        thr = practical_threshold(1.0, 1.0, default_threshold_scale(47), 47)
        assert thr == pytest.approx((9.0 / 11.0) ** 2, rel=1e-12)

    def test_symmetric_in_amplitude_inverse(self):
        c = default_threshold_scale(31)
        a = practical_threshold(0.05, 1.0, c, 31)
        b = practical_threshold(
            c**2 / (0.05 * 31), 1.0, c, 31
        )  # t -> 1/t mirror point
        assert a == pytest.approx(b, rel=1e-9)

    def test_zero_inputs_rejected(self):
        with pytest.raises(ValueError):
            practical_threshold(0.0, 1.0, 1.0, 10)
        with pytest.raises(ValueError):
            practical_threshold(1.0, 0.0, 1.0, 10)


class TestSampFeatures:
    def test_noiseless_pair_both_maximal(self):
        spec = two_tone_spec()
        d = decompose(build_hankel(synthesize(spec), 24), 2)
        feats = samp_features(d)
        assert [f.normalized for f in feats] == pytest.approx([1.0, 1.0], abs=1e-6)
        assert [f.concentration for f in feats] == pytest.approx([2.0, 2.0], rel=1e-9)

    def test_rank_one_self_normalizes(self):
        spec = SignalSpec(
            components=(ExponentialComponent(amplitude=2.0, frequency=1.0),),
            sample_count=24,
        )
        d = decompose(build_hankel(synthesize(spec), 8), 1)
        feats = samp_features(d)
        assert feats[0].normalized == pytest.approx(1.0)

    def test_signal_features_dominate_noise_features(self):
        spec = two_tone_spec()
        x = synthesize(spec)
        var = noise_variance_for_snr(spec, 10.0)
        wins = 0
        trials = 100
        for t in range(trials):
            y = apply_noise(x, NoiseModel(variance=var), 900 + t)
            pair = build_hankel(y, 24)
            sigma = np.linalg.svd(pair.y0, compute_uv=False)
            d = decompose(pair, detect_effective_rank(sigma))
            feats = samp_features(d)
            near = {int(np.argmin(np.abs(d.eigenvalues - z))) for z in spec.poles}
            eps = np.array([f.normalized for f in feats])
            noise_eps = [eps[i] for i in range(len(eps)) if i not in near]
            if len(near) == 2 and noise_eps and min(eps[i] for i in near) > max(noise_eps):
                wins += 1
        assert wins >= 0.9 * trials


class TestDetectSamp:
    def test_noiseless_two_tone(self):
        spec = two_tone_spec()
        d = decompose(build_hankel(synthesize(spec), 24), 2)
        result = detect_samp(d, amplitudes_from_modes(d))
        assert result.order == 2

    def test_overtruncated_noiseless_keeps_true_modes(self):
        spec = two_tone_spec()
        d = decompose(build_hankel(synthesize(spec), 24), 4)
        result = detect_samp(d, amplitudes_from_modes(d))
        assert result.order == 2
        selected_eigs = d.eigenvalues[list(result.selected)]
        for z in spec.poles:
            assert np.min(np.abs(selected_eigs - z)) < 1e-8

    def test_noise_only_orders_stay_small(self):
        orders = []
        for t in range(100):
            w = apply_noise(np.zeros(71, dtype=complex), NoiseModel(variance=1.0), 42 + t)
            pair = build_hankel(w, 24)
            sigma = np.linalg.svd(pair.y0, compute_uv=False)
            rank = detect_effective_rank(sigma)
            d = decompose(pair, rank)
            result = detect_samp(d, amplitudes_from_modes(d))
            orders.append(result.order)
            assert result.order <= rank
        assert np.median(orders) <= 4
        assert np.quantile(orders, 0.9) <= 8  # far below the truncation rank (~21)

    def test_high_snr_detection_rate(self):
        spec = two_tone_spec()
        x = synthesize(spec)
        var = noise_variance_for_snr(spec, 20.0)
        hits = 0
        for t in range(60):
            y = apply_noise(x, NoiseModel(variance=var), 300 + t)
            pair = build_hankel(y, 24)
            sigma = np.linalg.svd(pair.y0, compute_uv=False)
            d = decompose(pair, detect_effective_rank(sigma))
            hits += detect_samp(d, amplitudes_from_modes(d)).order == 2
        assert hits >= 0.9 * 60


class TestBoundChain:
    def test_raw_feature_dominates_interference_bound(self):
        # ground-truth interference ratio from the perturbation oracle:
        # signal modes must clear the corresponding feature lower bound
        from samp.perturbation import first_order_noise_column, noiseless_factors

        spec = SignalSpec(
            components=(
                ExponentialComponent(amplitude=1.0, frequency=0.6),
                ExponentialComponent(amplitude=1.0, frequency=2.0),
            ),
            sample_count=71,
        )
        factors = noiseless_factors(spec, 24)
        x = synthesize(spec)
        var = noise_variance_for_snr(spec, 18.0)
        for t in range(50):
            y = apply_noise(x, NoiseModel(variance=var), 313 + t)
            w = y - x
            d = decompose(build_hankel(y, 24), 2)
            for i in range(2):
                z_i = spec.poles[i]
                k = int(np.argmin(np.abs(d.eigenvalues - z_i)))
                terms = first_order_noise_column(factors, w, i, d.eigenvalues[k])
                isr = np.linalg.norm(terms.e_left_col) / np.linalg.norm(
                    test_vector(z_i, 47)
                )
                if isr >= 1.0:
                    continue
                _, raw = maximize_similarity(d.left_modes[:, k])
                assert raw >= theoretical_threshold(isr)


class TestSingularValueDetectors:
    def test_sdd_examples(self):
        assert detect_sdd(np.array([1.0, 0.5, 1e-6]), 3) == 2
        assert detect_sdd(np.array([1.0]), 5) == 1
        assert detect_sdd(np.array([1.0, 1e-2, 1e-4, 1e-9]), 5) == 3

    def test_sdd_rejects_empty(self):
        with pytest.raises(ValueError):
            detect_sdd(np.array([]), 3)

    def test_gap_examples(self):
        assert detect_gap(np.array([10.0, 5.0, 0.1, 0.05])) == 2
        assert detect_gap(np.array([4.0, 2.0, 1.0])) == 1  # tie -> smallest index
        assert detect_gap(np.array([1.0, 0.5, 0.0])) == 2  # zero floored

    def test_gap_on_noiseless_pencil(self):
        sigma = np.linalg.svd(
            build_hankel(synthesize(two_tone_spec()), 24).y0, compute_uv=False
        )
        assert detect_gap(sigma) == 2

    def test_effective_rank_examples(self):
        assert detect_effective_rank(np.array([4.0, 0.0, 0.0])) == 1
        assert detect_effective_rank(np.ones(5)) == 5
        assert detect_effective_rank(np.array([2.0, 1.0, 1.0])) == 3

    def test_effective_rank_rejects_all_zero(self):
        with pytest.raises(ValueError):
            detect_effective_rank(np.zeros(4))

    def test_brute_force_equivalence_small(self):
        # independent loop re-implementations on random spectra
        rng = np.random.default_rng(5)
        for _ in range(100):
            sigma = np.sort(rng.uniform(1e-9, 10.0, size=rng.integers(2, 20)))[::-1]
            p = int(rng.integers(1, 10))
            count = 0
            for s in sigma:
                if s / sigma[0] >= 10.0**-p:
                    count += 1
            assert detect_sdd(sigma, p) == count
            best, best_ratio = 0, -1.0
            for i in range(len(sigma) - 1):
                ratio = sigma[i] / max(sigma[i + 1], 1e-300)
                if ratio > best_ratio:
                    best, best_ratio = i, ratio
            assert detect_gap(sigma) == best + 1
            bars = sigma / sigma.sum()
            h = -sum(b * math.log(b) for b in bars if b > 0)
            assert detect_effective_rank(sigma) == math.floor(math.exp(h) + 0.5)


class TestInformationCriteria:
    def test_noiseless_two_tone(self):
        y = synthesize(two_tone_spec())
        assert detect_ite(y, 24, 8, "aic") == 2
        assert detect_ite(y, 24, 8, "bic") == 2

    def test_pure_noise_prefers_small_orders(self):
        small = 0
        for t in range(30):
            w = apply_noise(np.zeros(71, dtype=complex), NoiseModel(variance=1.0), 80 + t)
            small += detect_ite(w, 24, 5, "aic") <= 2
        assert small > 15

    def test_high_snr_detection_rate(self):
        spec = two_tone_spec()
        x = synthesize(spec)
        var = noise_variance_for_snr(spec, 20.0)
        hits = 0
        for t in range(40):
            y = apply_noise(x, NoiseModel(variance=var), 700 + t)
            hits += detect_ite(y, 24, 24, "aic") == 2
        assert hits >= 0.75 * 40

    def test_bad_criterion_rejected(self):
        with pytest.raises(ValueError):
            detect_ite(np.ones(16, dtype=complex), 5, 3, "mdl")
