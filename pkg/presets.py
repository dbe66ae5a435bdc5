from models import Harmonic, NoiseFamily, NoiseSpec, Scenario, SignalEnsemble

# f1 = sin 2πt, f2 = sin 2πt + ½ cos 4πt, f3 = cos 2πt, f4 = 0.8 sin 6πt
# (f4 is replaced by a copy of f1 in the rank-deficient presets).
# The limit kernel has a simple top eigenvalue well separated from the rest.
_FOUR_SIGNALS = (
    (Harmonic(1, a=1.0),),
    (Harmonic(1, a=1.0), Harmonic(2, b=0.5)),
    (Harmonic(1, b=1.0),),
    (Harmonic(3, a=0.8),),
)


def fully_noisy(seed: int = 0) -> Scenario:
    return Scenario(
        signals=SignalEnsemble(_FOUR_SIGNALS),
        noise=NoiseSpec(NoiseFamily.GAUSSIAN_IID, sigma_bar_sq=0.25, seed=seed),
        clean_prefix=0,
        gamma=1.0,
        duplicate_pairs=((0, 3),),
    )


def partial_noise_3x3(seed: int = 0) -> Scenario:
    """ℓ = 1, f3 = f1, ‖f1 − f2‖² = 1: τ₁ → 1 − e⁻¹."""
    return Scenario(
        signals=SignalEnsemble((
            (Harmonic(1, a=1.0),),
            (Harmonic(1, b=1.0),),
            (Harmonic(1, a=1.0),),
        )),
        noise=NoiseSpec(NoiseFamily.GAUSSIAN_IID, sigma_bar_sq=0.5, seed=seed),
        clean_prefix=1,
        gamma=1.0,
        duplicate_pairs=((0, 2),),
    )


def hetero(seed: int = 0) -> Scenario:
    return Scenario(
        signals=SignalEnsemble(_FOUR_SIGNALS),
        noise=NoiseSpec(NoiseFamily.GAUSSIAN_HETERO, sigma_bar_sq=0.25, hetero_amplitude=0.5, seed=seed),
        clean_prefix=0,
        gamma=1.0,
        duplicate_pairs=((0, 3),),
    )


def full_rank_bias(seed: int = 0) -> Scenario:
    """No duplicated signal: the limit kernel is full rank and the debiased estimate stays biased."""
    return Scenario(
        signals=SignalEnsemble(_FOUR_SIGNALS),
        noise=NoiseSpec(NoiseFamily.GAUSSIAN_IID, sigma_bar_sq=0.25, seed=seed),
        clean_prefix=0,
        gamma=1.0,
    )


PRESETS = {
    "fully-noisy": fully_noisy,
    "partial-noise-3x3": partial_noise_3x3,
    "hetero": hetero,
    "full-rank-bias": full_rank_bias,
}
