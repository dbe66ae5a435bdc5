import math

import numpy as np
import pytest

import presets
from errors import ConfigError, DebiasUndefinedError, DomainError, SingularityError
from estimators import (bias_factors, biased_limit, estimate_full_noise, estimate_partial_noise,
                        noise_level_from_lambda, oracle_debias, predicted_eigenvalues)
from kernel_core import gaussian_gram, scaling_parameter
from models import (EstimatorMode, Harmonic, KernelMatrix, NoiseFamily, NoiseSpec,
                    PartitionedKernel, ScalingRule, Scenario, SignalEnsemble)
from spectral import subspace_angle, sym_eigen
from synthesis import effective_signals, limit_gram, observe

SIN = (Harmonic(1, a=1.0),)
COS = (Harmonic(1, b=1.0),)
DIMS = (1_000, 10_000, 100_000)


def noisy_kernel(scenario: Scenario, d: int, trial: int) -> KernelMatrix:
    return gaussian_gram(observe(scenario, d, trial), scaling_parameter(ScalingRule(scenario.gamma), d))


def scenario_limit(scenario: Scenario) -> KernelMatrix:
    return limit_gram(effective_signals(scenario), scenario.gamma)


# ─── Implied noise level ──────────────────────────────────────────────────────

def test_noise_level_examples():
    assert noise_level_from_lambda(0.0, 1.0) == 0.0
    assert noise_level_from_lambda(1.0 - math.exp(-1.0), 1.0) == pytest.approx(0.5, abs=1e-12)
    assert noise_level_from_lambda(1.0 - math.exp(-0.5), 1.0) == pytest.approx(0.25, abs=1e-12)
    assert noise_level_from_lambda(1.0 - math.exp(-2.0), 2.0) == pytest.approx(2.0, abs=1e-12)
    assert noise_level_from_lambda(-1e-8, 1.0) == 0.0


@pytest.mark.parametrize("lambda1", [1.0, 1.5, -0.1, float("nan")])
def test_noise_level_domain(lambda1):
    with pytest.raises(DomainError):
        noise_level_from_lambda(lambda1, 1.0)


# ─── Full noise ───────────────────────────────────────────────────────────────

def test_full_noise_two_by_two_recovers_all_ones():
    q = math.exp(-0.5)
    result = estimate_full_noise(KernelMatrix([[1.0, q], [q, 1.0]]), gamma=1.0)
    assert result.debias_eigenvalue == pytest.approx(1.0 - q, abs=1e-12)
    np.testing.assert_allclose(result.estimate.entries, np.ones((2, 2)), atol=1e-12)
    assert result.implied_noise == pytest.approx(0.25, abs=1e-12)
    assert result.mode is EstimatorMode.FULL_NOISE


def test_full_noise_keeps_unbiased_singular_kernel():
    limit = scenario_limit(presets.fully_noisy())
    result = estimate_full_noise(limit)
    np.testing.assert_allclose(result.estimate.entries, limit.entries, atol=1e-12)
    assert result.implied_noise is None


def test_full_noise_is_exact_on_the_biased_limit():
    scenario = presets.fully_noisy()
    limit = scenario_limit(scenario)
    biased = biased_limit(limit, scenario.noise.sigma_bar_sq, scenario.gamma)
    result = estimate_full_noise(biased, gamma=scenario.gamma)
    np.testing.assert_allclose(result.estimate.entries, limit.entries, atol=1e-12)
    assert result.implied_noise == pytest.approx(scenario.noise.sigma_bar_sq, abs=1e-10)

    again = estimate_full_noise(result.estimate)
    np.testing.assert_allclose(again.estimate.entries, result.estimate.entries, atol=1e-12)


def test_full_noise_spectrum_is_affine_and_psd():
    k = noisy_kernel(presets.full_rank_bias(seed=2), 500, 0)
    result = estimate_full_noise(k)
    lam = result.debias_eigenvalue
    expected = (np.linalg.eigvalsh(k.entries) - lam) / (1.0 - lam)
    np.testing.assert_allclose(np.linalg.eigvalsh(result.estimate.entries), expected, atol=1e-10)
    assert abs(result.min_eigenvalue) <= 1e-10
    assert np.all(np.diag(result.estimate.entries) == 1.0)
    for i in range(k.n):
        assert subspace_angle(sym_eigen(k).vectors[:, i], sym_eigen(result.estimate).vectors[:, i]) <= 1e-6


def test_full_noise_undefined_near_identity():
    with pytest.raises(DebiasUndefinedError):
        estimate_full_noise(KernelMatrix(np.eye(3)))


def test_predicted_eigenvalues_match_biased_limit():
    scenario = presets.full_rank_bias()
    limit = scenario_limit(scenario)
    biased = biased_limit(limit, 0.25, 1.0)
    np.testing.assert_allclose(np.linalg.eigvalsh(biased.entries),
                               predicted_eigenvalues(np.linalg.eigvalsh(limit.entries), 0.25, 1.0), atol=1e-12)


# ─── Partial noise ────────────────────────────────────────────────────────────

def test_partial_noise_three_by_three_example():
    scenario = presets.partial_noise_3x3()
    limit = scenario_limit(scenario)
    biased = biased_limit(limit, 0.5, 1.0, clean_prefix=1)
    result = estimate_partial_noise(PartitionedKernel(biased, 1), gamma=1.0)
    assert result.debias_eigenvalue == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)
    assert result.debias_eigenvalue == pytest.approx(0.632121, abs=1e-6)
    np.testing.assert_allclose(result.estimate.entries, limit.entries, atol=1e-12)
    assert result.implied_noise == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("ell,pairs", [(2, ((0, 3),)), (1, ((2, 3),)), (3, ((1, 3),))])
def test_partial_noise_is_exact_on_biased_limits(ell, pairs):
    signals = SignalEnsemble((SIN, (Harmonic(1, a=1.0), Harmonic(2, b=0.5)), COS, (Harmonic(3, a=0.8),)))
    scenario = Scenario(signals, NoiseSpec(NoiseFamily.GAUSSIAN_IID, 0.3), clean_prefix=ell,
                        duplicate_pairs=pairs)
    limit = scenario_limit(scenario)
    biased = biased_limit(limit, 0.3, 1.0, clean_prefix=ell)
    result = estimate_partial_noise(PartitionedKernel(biased, ell))
    np.testing.assert_allclose(result.estimate.entries, limit.entries, atol=1e-10)
    _, q = bias_factors(0.3, 1.0)
    assert result.debias_eigenvalue == pytest.approx(1.0 - q, abs=1e-10)


def test_partial_noise_undefined_near_identity():
    with pytest.raises(DebiasUndefinedError):
        estimate_partial_noise(PartitionedKernel(KernelMatrix(np.eye(3)), 1))


def test_partial_noise_propagates_singular_clean_block():
    entries = np.array([[1.0, 1.0, 0.2], [1.0, 1.0, 0.2], [0.2, 0.2, 1.0]])
    with pytest.raises(SingularityError):
        estimate_partial_noise(PartitionedKernel(KernelMatrix(entries), 2))


# ─── Oracle ───────────────────────────────────────────────────────────────────

def test_oracle_without_noise_is_identity_map():
    k = noisy_kernel(presets.full_rank_bias(), 200, 0)
    np.testing.assert_array_equal(oracle_debias(k, 0.0, 1.0).estimate.entries, k.entries)


def test_oracle_inverts_the_bias():
    limit = scenario_limit(presets.full_rank_bias())
    for ell in (0, 1, 2):
        biased = biased_limit(limit, 0.4, 2.0, clean_prefix=ell)
        result = oracle_debias(biased, 0.4, 2.0, clean_prefix=ell)
        np.testing.assert_allclose(result.estimate.entries, limit.entries, atol=1e-12)
        assert result.implied_noise == 0.4


def test_oracle_matches_full_noise_on_two_by_two():
    q = math.exp(-0.5)
    k = KernelMatrix([[1.0, q], [q, 1.0]])
    np.testing.assert_allclose(oracle_debias(k, 0.25, 1.0).estimate.entries,
                               estimate_full_noise(k).estimate.entries, atol=1e-12)


def test_oracle_rejects_bad_prefix():
    with pytest.raises(ConfigError):
        oracle_debias(KernelMatrix(np.eye(2)), 0.1, 1.0, clean_prefix=3)


@pytest.mark.parametrize("sigma_bar_sq", [20.0, 1_000.0])
def test_oracle_undefined_when_shrinkage_underflows(sigma_bar_sq):
    with pytest.raises(DebiasUndefinedError):
        oracle_debias(KernelMatrix(np.eye(2)), sigma_bar_sq, 1.0)
    with pytest.raises(DebiasUndefinedError):
        oracle_debias(KernelMatrix(np.eye(3)), sigma_bar_sq, 1.0, clean_prefix=1)
    np.testing.assert_array_equal(oracle_debias(KernelMatrix(np.eye(2)), 10.0, 1.0).estimate.entries, np.eye(2))


def test_oracle_estimate_may_leave_unit_range():
    result = oracle_debias(KernelMatrix([[1.0, 0.9], [0.9, 1.0]]), 0.5, 1.0)
    assert result.estimate.entries[0, 1] == pytest.approx(0.9 * math.e)
    assert result.min_eigenvalue < 0


# ─── Monte Carlo consistency ──────────────────────────────────────────────────

@pytest.mark.slow
def test_eigenvalues_follow_affine_limit():
    scenario = presets.fully_noisy(seed=4)
    predicted = predicted_eigenvalues(np.linalg.eigvalsh(scenario_limit(scenario).entries),
                                      scenario.noise.sigma_bar_sq, scenario.gamma)
    medians = []
    for d in DIMS:
        gaps = [np.max(np.abs(np.linalg.eigvalsh(noisy_kernel(scenario, d, t).entries) - predicted))
                for t in range(20)]
        medians.append(np.median(gaps))
    assert medians[0] > medians[1] > medians[2]


@pytest.mark.slow
def test_debiased_error_beats_raw_error():
    harmonics = [(Harmonic(h, a=1.0 / h),) for h in range(1, 8)]
    signals = SignalEnsemble(tuple(harmonics) + (harmonics[0],))
    scenario = Scenario(signals, NoiseSpec(NoiseFamily.GAUSSIAN_IID, 0.25, seed=31))
    limit = scenario_limit(scenario)
    d = 100_000
    wins = 0
    for t in range(50):
        k = noisy_kernel(scenario, d, t)
        raw = np.linalg.norm(k.entries - limit.entries)
        debiased = np.linalg.norm(estimate_full_noise(k).estimate.entries - limit.entries)
        wins += debiased < raw
    assert wins >= 48


@pytest.mark.slow
def test_column_ratio_agrees_with_schur_estimate():
    # Rows 0 (clean) and 2 (noisy copy of row 0) share a signal, so off-diagonal
    # entries of column 2 are those of column 0 shrunk by exp(−σ̄²/γ).
    scenario = presets.partial_noise_3x3(seed=17)
    k = noisy_kernel(scenario, 100_000, 0)
    ratio = k.entries[1, 2] / k.entries[1, 0]
    tau1 = estimate_partial_noise(PartitionedKernel(k, 1)).debias_eigenvalue
    rho, _ = bias_factors(scenario.noise.sigma_bar_sq, scenario.gamma)
    assert ratio == pytest.approx(rho, abs=0.02)
    assert math.sqrt(1.0 - tau1) == pytest.approx(ratio, abs=0.02)


@pytest.mark.slow
@pytest.mark.parametrize("preset", ["fully-noisy", "partial-noise-3x3"])
def test_noisy_kernel_converges_to_biased_limit(preset):
    scenario = presets.PRESETS[preset](seed=6)
    target = biased_limit(scenario_limit(scenario), scenario.noise.sigma_bar_sq, scenario.gamma,
                          clean_prefix=scenario.clean_prefix)
    medians = []
    for d in DIMS:
        gaps = [np.max(np.abs(noisy_kernel(scenario, d, t).entries - target.entries)) for t in range(20)]
        medians.append(np.median(gaps))
    assert medians[0] > medians[1] > medians[2]
    assert medians[2] <= 0.02
