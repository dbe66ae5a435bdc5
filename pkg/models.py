# models.py
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.linalg

from errors import ConfigError, InputError, InvariantViolation

# Estimator names accepted by the sweep, in report order.
ESTIMATORS = ("raw", "full_noise", "partial_noise", "oracle")

DEFAULT_COND_THRESHOLD = 1e8
DEBIAS_EPS = 1e-6


def _frozen_array(values, *, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what} contains non-finite entries")
    arr.setflags(write=False)
    return arr


# ─── kernel_core ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class DataMatrix:
    """n observations of dimension d, one per row."""
    rows: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.rows, what="data matrix")
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InputError(f"data matrix must be n×d with n, d ≥ 1, got shape {arr.shape}")
        object.__setattr__(self, "rows", arr)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric n×n kernel matrix with exact unit diagonal.

    Symmetry and the diagonal are checked exactly; positive semidefiniteness
    is only reported (see `is_psd`) because debiased estimates may be
    slightly indefinite at finite d.
    """
    entries: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.entries, what="kernel matrix")
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise InputError(f"kernel matrix must be square, got shape {arr.shape}")
        if not np.array_equal(arr, arr.T):
            raise InvariantViolation("kernel matrix is not exactly symmetric")
        if not np.all(np.diag(arr) == 1.0):
            raise InvariantViolation("kernel matrix diagonal must be exactly 1")
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def min_eigenvalue(self) -> float:
        return float(scipy.linalg.eigvalsh(self.entries, subset_by_index=[0, 0])[0])

    def is_psd(self, rel_tol: float = 1e-10) -> bool:
        values = scipy.linalg.eigvalsh(self.entries)
        return bool(values[0] >= -rel_tol * max(abs(values[-1]), 1.0))


@dataclass(frozen=True)
class ScalingRule:
    gamma: float

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigError(f"gamma must be a positive real, got {self.gamma}")


# ─── synthesis ────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Harmonic:
    """One term a·sin(2πht) + b·cos(2πht)."""
    h: int
    a: float = 0.0
    b: float = 0.0


@dataclass(frozen=True)
class SignalEnsemble:
    signals: tuple[tuple[Harmonic, ...], ...]

    def __post_init__(self):
        signals = tuple(tuple(sig) for sig in self.signals)
        if not signals:
            raise InvariantViolation("signal ensemble needs at least one signal")
        for i, sig in enumerate(signals):
            if not sig:
                raise InvariantViolation(f"signal {i} has an empty coefficient list")
            hs = [term.h for term in sig]
            if any(int(h) != h or h < 1 for h in hs):
                raise InvariantViolation(f"signal {i} has a non-positive harmonic index: {hs}")
            if len(set(hs)) != len(hs):
                raise InvariantViolation(f"signal {i} repeats a harmonic index: {hs}")
            if all(term.a == 0 and term.b == 0 for term in sig):
                raise InvariantViolation(f"signal {i} has only zero coefficients")
        object.__setattr__(self, "signals", signals)

    @property
    def n(self) -> int:
        return len(self.signals)


class NoiseFamily(str, Enum):
    GAUSSIAN_IID = "gaussian_iid"
    UNIFORM_IID = "uniform_iid"
    GAUSSIAN_HETERO = "gaussian_hetero"


@dataclass(frozen=True)
class NoiseSpec:
    family: NoiseFamily = NoiseFamily.GAUSSIAN_IID
    sigma_bar_sq: float = 0.0
    hetero_amplitude: float = 0.0   # only used by gaussian_hetero
    seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", NoiseFamily(self.family))
        except ValueError:
            known = ", ".join(f.value for f in NoiseFamily)
            raise ConfigError(f"unknown noise family {self.family!r} (known: {known})") from None
        if not (np.isfinite(self.sigma_bar_sq) and self.sigma_bar_sq >= 0):
            raise ConfigError(f"sigma_bar_sq must be ≥ 0, got {self.sigma_bar_sq}")
        if not 0.0 <= self.hetero_amplitude < 1.0:
            raise ConfigError(f"hetero_amplitude must lie in [0, 1), got {self.hetero_amplitude}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class Scenario:
    """Signals + noise + clean prefix ℓ.

    `duplicate_pairs` holds 0-based (i, j): signal j copies signal i.
    """
    signals: SignalEnsemble
    noise: NoiseSpec
    clean_prefix: int = 0
    gamma: float = 1.0
    duplicate_pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        n = self.signals.n
        if not 0 <= self.clean_prefix <= n:
            raise ConfigError(f"clean_prefix must lie in [0, {n}], got {self.clean_prefix}")
        ScalingRule(self.gamma)
        pairs = tuple((int(i), int(j)) for i, j in self.duplicate_pairs)
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ConfigError(f"invalid duplicate pair ({i}, {j}) for n={n}")
        object.__setattr__(self, "duplicate_pairs", pairs)

    @property
    def n(self) -> int:
        return self.signals.n

    @property
    def m(self) -> int:
        return self.n - self.clean_prefix


@dataclass(frozen=True)
class AssumptionReport:
    norms: np.ndarray           # d⁻¹‖ξᵢ‖²
    cross: np.ndarray           # d⁻¹ξᵢᵀξⱼ, zero diagonal
    signal_noise: np.ndarray    # d⁻¹sᵢᵀξⱼ
    sigma_bar_sq: float
    max_norm_dev: float
    max_cross_dev: float
    max_signal_noise_dev: float


# ─── spectral ─────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class PartitionedKernel:
    """Kernel matrix split after the first ℓ (clean) rows."""
    base: KernelMatrix
    ell: int

    def __post_init__(self):
        if not 1 <= self.ell <= self.base.n - 1:
            raise ConfigError(f"clean prefix ℓ must lie in [1, {self.base.n - 1}], got {self.ell}")

    @property
    def m(self) -> int:
        return self.base.n - self.ell

    @property
    def k11(self) -> np.ndarray:
        return self.base.entries[:self.ell, :self.ell]

    @property
    def k12(self) -> np.ndarray:
        return self.base.entries[:self.ell, self.ell:]

    @property
    def k21(self) -> np.ndarray:
        return self.base.entries[self.ell:, :self.ell]

    @property
    def k22(self) -> np.ndarray:
        return self.base.entries[self.ell:, self.ell:]


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray    # ascending
    vectors: np.ndarray   # columns aligned with values


@dataclass(frozen=True)
class LowRankPerturbation:
    delta: np.ndarray
    norm: float

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=np.float64)
        if not np.array_equal(delta, delta.T):
            raise InvariantViolation("perturbation Δ must be symmetric")
        frob = float(np.linalg.norm(delta, "fro"))
        if abs(frob - self.norm) > 1e-12 * max(1.0, frob):
            raise InvariantViolation(f"norm {self.norm} does not match ‖Δ‖_F = {frob}")


# ─── estimators ───────────────────────────────────────────────────────────────

class EstimatorMode(str, Enum):
    FULL_NOISE = "full_noise"
    PARTIAL_NOISE = "partial_noise"
    ORACLE = "oracle"


@dataclass(frozen=True)
class EstimateResult:
    estimate: KernelMatrix
    debias_eigenvalue: float        # λ₁ or τ₁ (implied value for the oracle)
    implied_noise: Optional[float]  # σ̂², None when γ was not supplied
    mode: EstimatorMode
    min_eigenvalue: float           # PSD diagnostic of the estimate

    def __post_init__(self):
        if not self.debias_eigenvalue < 1.0:
            raise InvariantViolation(f"debias eigenvalue must be < 1, got {self.debias_eigenvalue}")


# ─── harness ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    dims: tuple[int, ...]
    trials: int = 20
    estimators: tuple[str, ...] = ("raw", "full_noise")
    output_path: Path = Path("report.csv")
    cond_threshold: float = DEFAULT_COND_THRESHOLD
    scenario_id: str = "scenario"

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ConfigError("dims must be non-empty")
        if any(d < 1 for d in dims) or any(b <= a for a, b in zip(dims, dims[1:])):
            raise ConfigError(f"dims must be positive and strictly ascending, got {list(dims)}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials}")
        estimators = tuple(self.estimators)
        unknown = [e for e in estimators if e not in ESTIMATORS]
        if unknown or not estimators:
            raise ConfigError(f"estimators must be a non-empty subset of {ESTIMATORS}, got {list(estimators)}")
        if "partial_noise" in estimators and not 1 <= self.scenario.clean_prefix <= self.scenario.n - 1:
            raise ConfigError(
                f"partial_noise needs 1 ≤ clean_prefix ≤ n−1, scenario has ℓ={self.scenario.clean_prefix}, n={self.scenario.n}"
            )
        if not self.cond_threshold > 0:
            raise ConfigError(f"cond_threshold must be positive, got {self.cond_threshold}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "estimators", estimators)
        object.__setattr__(self, "output_path", Path(self.output_path))


@dataclass
class ReportRow:
    scenario_id: str
    d: int
    trial: int
    estimator: str
    frob_error: float = float("nan")
    max_entry_error: float = float("nan")
    debias_eigenvalue: float = float("nan")
    implied_noise: float = float("nan")
    min_eig_estimate: float = float("nan")
    subspace_angle_deg: float = float("nan")
    seed: int = 0
    wall_ms: int = 0
    error_code: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error_code is None

    def sort_key(self) -> tuple:
        order = ESTIMATORS.index(self.estimator) if self.estimator in ESTIMATORS else len(ESTIMATORS)
        return (self.d, self.trial, order, self.estimator)


@dataclass
class ConvergenceReport:
    rows: list[ReportRow] = field(default_factory=list)

    def sorted(self) -> "ConvergenceReport":
        return ConvergenceReport(sorted(self.rows, key=ReportRow.sort_key))

    @property
    def all_failed(self) -> bool:
        return bool(self.rows) and not any(r.ok for r in self.rows)


@dataclass(frozen=True)
class SummaryRow:
    estimator: str
    d: int
    rows: int
    errors: int
    median_frob: float
    iqr_frob: float
    median_implied_noise: float
    slope: Optional[float]   # log-log slope of median frob_error vs d, per estimator
