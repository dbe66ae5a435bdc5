# kernel_core.py: Gaussian / linear Gram matrices and the Hadamard combinator
import logging

import numpy as np

from errors import InputError
from models import DataMatrix, KernelMatrix, ScalingRule

logger = logging.getLogger("kernel_core")

# From this dimension on, squared distances use numpy's pairwise summation.
_PAIRWISE_MIN_D = 10_000

# Underflowed kernel entries are raised to this so that 0 < K[i, j] ≤ 1 holds.
TINY = float(np.finfo(np.float64).tiny)


def scaling_parameter(rule: ScalingRule, d: int) -> float:
    """Bandwidth c_d = γ·d, so c_d / d equals γ at every d."""
    if int(d) != d or d < 1:
        raise InputError(f"dimension d must be a positive integer, got {d}")
    return rule.gamma * d


def _as_data(data) -> DataMatrix:
    return data if isinstance(data, DataMatrix) else DataMatrix(np.atleast_2d(data))


def squared_distances(data: DataMatrix) -> np.ndarray:
    """Pairwise ‖xᵢ − xⱼ‖², computed from explicit differences.

    The expansion ‖xᵢ‖² + ‖xⱼ‖² − 2xᵢᵀxⱼ cancels catastrophically for
    near-duplicate rows, so each row is subtracted from the rows after it
    and the squares are reduced along the contiguous axis (numpy reduces
    with pairwise summation there). Each pair is computed once and mirrored.
    """
    x = data.rows
    n = x.shape[0]
    dist = np.zeros((n, n), dtype=np.float64)
    for i in range(n - 1):
        diff = x[i + 1:] - x[i]
        row = np.einsum("ij,ij->i", diff, diff) if diff.shape[1] < _PAIRWISE_MIN_D else np.sum(diff * diff, axis=1)
        dist[i, i + 1:] = row
        dist[i + 1:, i] = row
    return dist


def gaussian_gram(data: DataMatrix, c_d: float) -> KernelMatrix:
    """K[i, j] = exp(−‖xᵢ − xⱼ‖² / c_d) with an exact unit diagonal."""
    if not (np.isfinite(c_d) and c_d > 0):
        raise InputError(f"bandwidth c_d must be positive, got {c_d}")
    data = _as_data(data)
    entries = np.exp(-squared_distances(data) / c_d)
    np.fill_diagonal(entries, 1.0)
    underflow = entries == 0.0
    if np.any(underflow):
        logger.warning(f"[GRAM] {int(np.sum(underflow))} entries underflowed to 0 (c_d={c_d:.3e}), clamped")
        entries[underflow] = TINY
    logger.debug(f"[GRAM] gaussian n={data.n} d={data.d} c_d={c_d:.6g}")
    return KernelMatrix(entries)


def linear_gram(data: DataMatrix) -> np.ndarray:
    """K[i, j] = xᵢᵀxⱼ, mirrored from the upper triangle."""
    data = _as_data(data)
    x = data.rows
    gram = x @ x.T
    upper = np.triu(gram)
    return upper + np.triu(gram, 1).T


def hadamard(a: KernelMatrix, b: KernelMatrix) -> KernelMatrix:
    if a.n != b.n:
        raise InputError(f"hadamard needs matching sizes, got {a.n} and {b.n}")
    return KernelMatrix(a.entries * b.entries)


def max_abs_deviation(a, b) -> float:
    a = a.entries if isinstance(a, KernelMatrix) else np.asarray(a, dtype=np.float64)
    b = b.entries if isinstance(b, KernelMatrix) else np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b)))
