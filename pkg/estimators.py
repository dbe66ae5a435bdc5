# estimators.py: debiasing estimators of the noise-free Gaussian kernel
#
# Noise shrinks every off-diagonal entry of a Gaussian Gram matrix by the
# factor q = exp(−2σ̄²/γ) (exp(−σ̄²/γ) between a clean and a noisy row).
# When the noise-free limit kernel is rank-deficient, q is identified by
# the smallest eigenvalue (λ₁ = 1 − q) or, with a clean prefix, by the
# smallest eigenvalue of the Schur complement of the clean block (τ₁ = 1 − q).
import logging
import math
from typing import Optional

import numpy as np

from errors import ConfigError, DebiasUndefinedError, DomainError
from models import (DEBIAS_EPS, DEFAULT_COND_THRESHOLD, EstimateResult,
                    EstimatorMode, KernelMatrix, PartitionedKernel, ScalingRule)
from spectral import schur_complement, schur_smallest_eigenvalue, smallest_eigenvalue

logger = logging.getLogger("estimators")

NEGATIVE_LAMBDA_TOL = 1e-6


def noise_level_from_lambda(lambda1: float, gamma: float) -> float:
    """σ̂² = −(γ/2)·ln(1 − λ₁), the inverse of λ₁ = 1 − exp(−2σ̄²/γ)."""
    ScalingRule(gamma)
    if not np.isfinite(lambda1) or lambda1 < -NEGATIVE_LAMBDA_TOL or lambda1 >= 1.0:
        raise DomainError(f"λ₁ must lie in [0, 1), got {lambda1}")
    lambda1 = max(lambda1, 0.0)
    return -0.5 * gamma * math.log1p(-lambda1)


def _implied_noise(eigenvalue: float, gamma: Optional[float]) -> Optional[float]:
    if gamma is None:
        return None
    try:
        return noise_level_from_lambda(eigenvalue, gamma)
    except DomainError as e:
        logger.warning(f"[EST] implied noise unavailable: {e}")
        return None


def _check_debias(eigenvalue: float, eps: float, name: str) -> None:
    if eigenvalue >= 1.0 - eps:
        raise DebiasUndefinedError(
            f"{name} = {eigenvalue:.6g} ≥ 1 − {eps:g}: kernel indistinguishable from the identity"
        )


def _result(entries: np.ndarray, eigenvalue: float, gamma, mode: EstimatorMode,
            implied: Optional[float] = None) -> EstimateResult:
    estimate = KernelMatrix(entries)
    min_eig = estimate.min_eigenvalue()
    if min_eig < -1e-10 * max(1.0, float(np.max(np.abs(entries)))):
        logger.debug(f"[EST] {mode.value} estimate is indefinite (min eigenvalue {min_eig:.3e})")
    return EstimateResult(
        estimate=estimate,
        debias_eigenvalue=eigenvalue,
        implied_noise=implied if implied is not None else _implied_noise(eigenvalue, gamma),
        mode=mode,
        min_eigenvalue=min_eig,
    )


# ─── Full noise ───────────────────────────────────────────────────────────────

def estimate_full_noise(k: KernelMatrix, gamma: Optional[float] = None,
                        eps: float = DEBIAS_EPS) -> EstimateResult:
    """K̃ = (1 − λ₁)⁻¹(K − I) + I, λ₁ the smallest eigenvalue of K."""
    lambda1 = smallest_eigenvalue(k)
    _check_debias(lambda1, eps, "λ₁")
    off = k.entries - np.eye(k.n)
    entries = off / (1.0 - lambda1) + np.eye(k.n)
    logger.debug(f"[EST] full_noise n={k.n} λ₁={lambda1:.6g}")
    return _result(entries, lambda1, gamma, EstimatorMode.FULL_NOISE)


# ─── Partial noise ────────────────────────────────────────────────────────────

def estimate_partial_noise(p: PartitionedKernel, cond_threshold: float = DEFAULT_COND_THRESHOLD,
                           gamma: Optional[float] = None, eps: float = DEBIAS_EPS) -> EstimateResult:
    """Rescale the cross blocks by (1 − τ₁)^{−1/2} and the noisy block by (1 − τ₁)⁻¹.

    τ₁ is the smallest eigenvalue of the Schur complement of the clean block K11.
    """
    tau1 = schur_smallest_eigenvalue(schur_complement(p, cond_threshold))
    _check_debias(tau1, eps, "τ₁")
    scale = 1.0 / (1.0 - tau1)
    ell, m = p.ell, p.m

    entries = np.empty((p.base.n, p.base.n), dtype=np.float64)
    entries[:ell, :ell] = p.k11
    cross = math.sqrt(scale) * p.k12
    entries[:ell, ell:] = cross
    entries[ell:, :ell] = cross.T
    entries[ell:, ell:] = scale * (p.k22 - np.eye(m)) + np.eye(m)
    logger.debug(f"[EST] partial_noise ℓ={ell} m={m} τ₁={tau1:.6g}")
    return _result(entries, tau1, gamma, EstimatorMode.PARTIAL_NOISE)


# ─── Known noise level ────────────────────────────────────────────────────────

def bias_factors(sigma_bar_sq: float, gamma: float) -> tuple[float, float]:
    """(exp(−σ̄²/γ), exp(−2σ̄²/γ)): clean–noisy and noisy–noisy shrinkage."""
    ScalingRule(gamma)
    return math.exp(-sigma_bar_sq / gamma), math.exp(-2.0 * sigma_bar_sq / gamma)


def biased_limit(limit: KernelMatrix, sigma_bar_sq: float, gamma: float,
                 clean_prefix: int = 0) -> KernelMatrix:
    """Where K(x) converges for a given noise-free limit kernel.

    clean_prefix = 0 gives q(K − I) + I; otherwise the clean block stays,
    the cross blocks shrink by √q and the noisy block becomes q(K22 − I) + I.
    """
    rho, q = bias_factors(sigma_bar_sq, gamma)
    return KernelMatrix(_rescale(limit.entries, clean_prefix, rho, q))


def _rescale(entries: np.ndarray, ell: int, cross_factor: float, noisy_factor: float) -> np.ndarray:
    n = entries.shape[0]
    m = n - ell
    out = np.array(entries, dtype=np.float64, copy=True)
    out[ell:, ell:] = noisy_factor * (entries[ell:, ell:] - np.eye(m)) + np.eye(m)
    if ell:
        out[:ell, ell:] = cross_factor * entries[:ell, ell:]
        out[ell:, :ell] = out[:ell, ell:].T
    return out


def oracle_debias(k: KernelMatrix, sigma_bar_sq: float, gamma: float,
                  clean_prefix: int = 0) -> EstimateResult:
    """Invert the known bias: K̃ = exp(2σ̄²/γ)(K − I) + I.

    With a clean prefix ℓ ≥ 1 the clean block is kept and the cross blocks
    are scaled by exp(σ̄²/γ).
    """
    rho, q = bias_factors(sigma_bar_sq, gamma)
    if not 0 <= clean_prefix <= k.n:
        raise ConfigError(f"clean_prefix must lie in [0, {k.n}], got {clean_prefix}")
    if not 1.0 - q < 1.0:
        raise DebiasUndefinedError(f"shrinkage exp(−2σ̄²/γ) = {q:.3g} underflows for σ̄²={sigma_bar_sq:g}, γ={gamma:g}")
    if clean_prefix == k.n:
        entries = np.array(k.entries, copy=True)
    else:
        entries = _rescale(k.entries, clean_prefix, 1.0 / rho, 1.0 / q)
    return _result(entries, 1.0 - q, gamma, EstimatorMode.ORACLE, implied=sigma_bar_sq)


def predicted_eigenvalues(mu: np.ndarray, sigma_bar_sq: float, gamma: float) -> np.ndarray:
    """Limit eigenvalues of K(x) under full noise: q·μ − q + 1."""
    _, q = bias_factors(sigma_bar_sq, gamma)
    return q * np.asarray(mu, dtype=np.float64) - q + 1.0
