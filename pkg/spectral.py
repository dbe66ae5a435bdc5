# spectral.py: eigensolver, Schur complement, constrained low-rank perturbation
import logging

import numpy as np
import scipy.linalg

from errors import DiagnosticsError, InputError, SingularityError
from models import (DEFAULT_COND_THRESHOLD, EigenDecomposition, KernelMatrix,
                    LowRankPerturbation, PartitionedKernel)

logger = logging.getLogger("spectral")

SYMMETRY_TOL = 1e-12
ORTHONORMAL_TOL = 1e-8
# Schur eigenvalues in [−CLAMP_TOL, 0) are roundoff and reported as 0;
# below −DIAGNOSTIC_TOL the input was not PSD.
CLAMP_TOL = 1e-10
DIAGNOSTIC_TOL = 1e-6


def _as_square(a) -> np.ndarray:
    a = a.entries if isinstance(a, KernelMatrix) else np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix contains non-finite entries")
    return a


def sym_eigen(a) -> EigenDecomposition:
    """Full symmetric eigendecomposition, eigenvalues ascending."""
    a = _as_square(a)
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > SYMMETRY_TOL:
        raise InputError(f"matrix is not symmetric (max |A − Aᵀ| = {asym:.3e})")
    values, vectors = scipy.linalg.eigh(a)
    return EigenDecomposition(values=values, vectors=vectors)


def smallest_eigenvalue(a) -> float:
    return float(sym_eigen(a).values[0])


def eigen_clusters(values: np.ndarray, gap: float = 1e-6) -> list[list[int]]:
    """Group ascending eigenvalue indices; neighbours closer than `gap` share a group."""
    groups: list[list[int]] = []
    for i, value in enumerate(values):
        if groups and value - values[groups[-1][-1]] < gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def top_eigenspace(a, gap: float = 1e-6) -> np.ndarray:
    """Orthonormal basis of the eigenspace cluster holding the largest eigenvalue."""
    decomp = sym_eigen(a)
    top = eigen_clusters(decomp.values, gap)[-1]
    return decomp.vectors[:, top]


# ─── Block elimination ────────────────────────────────────────────────────────

def schur_complement(p: PartitionedKernel, cond_threshold: float = DEFAULT_COND_THRESHOLD) -> np.ndarray:
    """K22 − K21·K11⁻¹·K12 via a linear solve against K11, symmetrized."""
    condition = float(np.linalg.cond(p.k11))
    if not np.isfinite(condition) or condition > cond_threshold:
        raise SingularityError("K11", condition, cond_threshold)
    solved = scipy.linalg.solve(p.k11, p.k12, assume_a="sym")
    schur = p.k22 - p.k21 @ solved
    schur = 0.5 * (schur + schur.T)
    logger.debug(f"[SCHUR] ℓ={p.ell} m={p.m} cond(K11)={condition:.3e}")
    return schur


def schur_smallest_eigenvalue(schur: np.ndarray) -> float:
    """τ₁ with roundoff clamping; a clearly negative τ₁ means the input was not PSD."""
    tau = smallest_eigenvalue(schur)
    if tau < -DIAGNOSTIC_TOL:
        raise DiagnosticsError(f"Schur complement has eigenvalue {tau:.3e} < −{DIAGNOSTIC_TOL:g}")
    if -CLAMP_TOL <= tau < 0.0:
        return 0.0
    if tau < 0.0:
        logger.warning(f"[SCHUR] slightly negative τ₁ = {tau:.3e} reported unclamped")
    return tau


def constrained_lowrank_delta(p: PartitionedKernel,
                              cond_threshold: float = DEFAULT_COND_THRESHOLD) -> LowRankPerturbation:
    """Smallest-Frobenius Δ on K22 making [K11 K12; K21 K22+Δ] rank ≤ n−1.

    The assembled matrix is rank-deficient exactly when S + Δ is (S the
    Schur complement), so the optimum removes the eigenpair of S with the
    smallest |θ|: Δ = −θ·u·uᵀ.
    """
    schur = schur_complement(p, cond_threshold)
    decomp = sym_eigen(schur)
    idx = int(np.argmin(np.abs(decomp.values)))
    theta = float(decomp.values[idx])
    u = decomp.vectors[:, idx]
    delta = -theta * np.outer(u, u)
    delta = 0.5 * (delta + delta.T)
    return LowRankPerturbation(delta=delta, norm=float(np.linalg.norm(delta, "fro")))


def assemble_perturbed(p: PartitionedKernel, pert: LowRankPerturbation) -> np.ndarray:
    full = np.array(p.base.entries, copy=True)
    full[p.ell:, p.ell:] += pert.delta
    return full


# ─── Subspaces ────────────────────────────────────────────────────────────────

def _orthonormal_columns(u, name: str) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.ndim == 1:
        u = u.reshape(-1, 1)
    if u.ndim != 2:
        raise InputError(f"{name} must be a vector or a matrix of column vectors")
    gram_dev = float(np.max(np.abs(u.T @ u - np.eye(u.shape[1]))))
    if gram_dev > ORTHONORMAL_TOL:
        raise InputError(f"{name} is not orthonormal (Gram deviation {gram_dev:.3e})")
    return u


def subspace_angle(u, v) -> float:
    """Largest principal angle (radians) between span(u) and span(v)."""
    u = _orthonormal_columns(u, "u")
    v = _orthonormal_columns(v, "v")
    if u.shape[0] != v.shape[0]:
        raise InputError(f"row counts differ: {u.shape[0]} vs {v.shape[0]}")
    cosines = np.clip(scipy.linalg.svdvals(u.T @ v), 0.0, 1.0)
    return float(np.arccos(np.min(cosines)))
