# synthesis.py: trig-polynomial signals, noise families, observations
import logging

import numpy as np

from errors import ConfigError, InputError
from models import (AssumptionReport, DataMatrix, KernelMatrix, NoiseFamily,
                    NoiseSpec, Scenario, ScalingRule, SignalEnsemble)

logger = logging.getLogger("synthesis")


# ─── Signals ──────────────────────────────────────────────────────────────────

def effective_signals(scenario: Scenario) -> SignalEnsemble:
    """The scenario's ensemble with every duplicate pair (i, j) applied: j copies i."""
    signals = list(scenario.signals.signals)
    for i, j in scenario.duplicate_pairs:
        signals[j] = signals[i]
    return SignalEnsemble(tuple(signals))


def midpoints(d: int) -> np.ndarray:
    return (np.arange(1, d + 1, dtype=np.float64) - 0.5) / d


def sample_signals(ens: SignalEnsemble, d: int) -> DataMatrix:
    """s[i, k] = f_i((k − ½)/d) for k = 1..d."""
    if int(d) != d or d < 1:
        raise InputError(f"dimension d must be a positive integer, got {d}")
    t = midpoints(d)
    rows = np.zeros((ens.n, d), dtype=np.float64)
    for i, sig in enumerate(ens.signals):
        for term in sig:
            phase = 2.0 * np.pi * term.h * t
            if term.a:
                rows[i] += term.a * np.sin(phase)
            if term.b:
                rows[i] += term.b * np.cos(phase)
    return DataMatrix(rows)


def _coefficients(sig) -> dict:
    return {term.h: (term.a, term.b) for term in sig}


def l2_distance_sq(f, g) -> float:
    """‖f − g‖² on [0, 1] from trig coefficients (each basis function has norm² ½)."""
    cf, cg = _coefficients(f), _coefficients(g)
    total = 0.0
    for h in cf.keys() | cg.keys():
        af, bf = cf.get(h, (0.0, 0.0))
        ag, bg = cg.get(h, (0.0, 0.0))
        total += (af - ag) ** 2 + (bf - bg) ** 2
    return 0.5 * total


def limit_gram(ens: SignalEnsemble, gamma: float) -> KernelMatrix:
    """Closed-form K^(∞)(s): entry exp(−‖f_i − f_j‖²_{L²} / γ)."""
    ScalingRule(gamma)
    n = ens.n
    entries = np.ones((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            value = np.exp(-l2_distance_sq(ens.signals[i], ens.signals[j]) / gamma)
            entries[i, j] = entries[j, i] = value
    return KernelMatrix(entries)


# ─── Noise ────────────────────────────────────────────────────────────────────

def noise_variance_profile(spec: NoiseSpec, d: int) -> np.ndarray:
    """Per-coordinate variances σ_k², k = 1..d."""
    if spec.family is NoiseFamily.GAUSSIAN_HETERO:
        k = np.arange(1, d + 1, dtype=np.float64)
        return spec.sigma_bar_sq * (1.0 + spec.hetero_amplitude * np.sin(2.0 * np.pi * k / d))
    return np.full(d, spec.sigma_bar_sq, dtype=np.float64)


def row_rng(seed: int, trial: int, row: int) -> np.random.Generator:
    """Independent stream per (seed, trial, row); order of sampling never matters."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial), int(row)]))


def sample_noise(spec: NoiseSpec, n: int, d: int, trial: int) -> DataMatrix:
    if int(d) != d or d < 1 or int(n) != n or n < 1:
        raise InputError(f"noise needs positive n and d, got n={n}, d={d}")
    if int(trial) != trial or trial < 0:
        raise ConfigError(f"trial must be a non-negative integer, got {trial}")
    if not isinstance(spec.family, NoiseFamily):
        raise ConfigError(f"unknown noise family {spec.family!r}")
    if spec.sigma_bar_sq == 0.0:
        return DataMatrix(np.zeros((n, d)))

    rows = np.empty((n, d), dtype=np.float64)
    if spec.family is NoiseFamily.UNIFORM_IID:
        half_width = np.sqrt(3.0 * spec.sigma_bar_sq)
        for i in range(n):
            rows[i] = row_rng(spec.seed, trial, i).uniform(-half_width, half_width, size=d)
    else:
        scale = np.sqrt(noise_variance_profile(spec, d))
        for i in range(n):
            rows[i] = scale * row_rng(spec.seed, trial, i).standard_normal(d)
    return DataMatrix(rows)


# ─── Observations ─────────────────────────────────────────────────────────────

def observe(scenario: Scenario, d: int, trial: int) -> DataMatrix:
    """Rows before the clean prefix ℓ are pure signal; the rest carry noise."""
    ell = scenario.clean_prefix
    if not 0 <= ell <= scenario.n:
        raise ConfigError(f"clean_prefix must lie in [0, {scenario.n}], got {ell}")
    signals = sample_signals(effective_signals(scenario), d)
    if ell == scenario.n:
        return signals
    noise = sample_noise(scenario.noise, scenario.n, d, trial)
    rows = signals.rows.copy()
    rows[ell:] += noise.rows[ell:]
    logger.debug(f"[SYNTH] observe n={scenario.n} ℓ={ell} d={d} trial={trial}")
    return DataMatrix(rows)


def check_assumptions(signals: DataMatrix, noise: DataMatrix, sigma_bar_sq: float) -> AssumptionReport:
    """Empirical versions of the noise limits d⁻¹‖ξᵢ‖² → σ̄², d⁻¹ξᵢᵀξⱼ → 0, d⁻¹sᵢᵀξⱼ → 0."""
    if signals.rows.shape != noise.rows.shape:
        raise InputError(f"signal shape {signals.rows.shape} does not match noise shape {noise.rows.shape}")
    d = noise.d
    xi = noise.rows
    inner = (xi @ xi.T) / d
    norms = np.einsum("ij,ij->i", xi, xi) / d
    cross = inner.copy()
    np.fill_diagonal(cross, 0.0)
    signal_noise = (signals.rows @ xi.T) / d
    return AssumptionReport(
        norms=norms,
        cross=cross,
        signal_noise=signal_noise,
        sigma_bar_sq=sigma_bar_sq,
        max_norm_dev=float(np.max(np.abs(norms - sigma_bar_sq))),
        max_cross_dev=float(np.max(np.abs(cross))),
        max_signal_noise_dev=float(np.max(np.abs(signal_noise))),
    )

