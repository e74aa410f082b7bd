"""Stochastic observation model: state prior, noise calibration, covariances.

The sensed system is ``y = H x + z`` with ``x ~ N(0, Sigma_XX)`` and
``z ~ N(0, sigma2 I)``, so the clean measurements have covariance
``Sigma_YY = H Sigma_XX H^T + sigma2 I``.  An attack profile ``v``
(one nonnegative variance per measurement) adds ``diag(v)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

PSD_TOL = 1e-12  # absolute eigenvalue slack when validating covariances

__all__ = [
    "StatePriorSpec",
    "MeasurementModel",
    "toeplitz_cov",
    "calibrate_noise",
    "snr_db",
    "build_model",
    "attacked_cov",
]


@dataclass(frozen=True)
class StatePriorSpec:
    """Exponentially decaying Toeplitz prior: entry (i, j) = rho^|i-j|."""

    n: int
    rho: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"state dimension must be positive, got {self.n}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")


def toeplitz_cov(spec: StatePriorSpec) -> np.ndarray:
    first_row = spec.rho ** np.arange(spec.n)
    return scipy.linalg.toeplitz(first_row)


def snr_db(H: np.ndarray, Sigma_XX: np.ndarray, sigma2: float) -> float:
    """Signal-to-noise ratio 10*log10(tr(H Sigma_XX H^T) / (m sigma2))."""
    H = np.asarray(H, dtype=float)
    m = H.shape[0]
    signal = float(np.trace(H @ Sigma_XX @ H.T))
    return 10.0 * np.log10(signal / (m * sigma2))


def calibrate_noise(H: np.ndarray, Sigma_XX: np.ndarray, snr_db_target: float) -> float:
    """Noise variance that realizes the requested SNR in decibels."""
    H = np.asarray(H, dtype=float)
    m = H.shape[0]
    signal = float(np.trace(H @ Sigma_XX @ H.T))
    if signal <= 0:
        raise ValueError("tr(H Sigma_XX H^T) must be positive to set an SNR")
    return signal / (m * 10.0 ** (snr_db_target / 10.0))


@dataclass(frozen=True)
class MeasurementModel:
    """Immutable observation model with cached derived quantities.

    Build through :func:`build_model`; every consumer in the package
    reads the cached ``Sigma_YY`` factorization rather than refactoring.

    Cached fields: ``signal_cov`` is ``H Sigma_XX H^T``; ``chol_YY`` the
    lower Cholesky factor of ``Sigma_YY``; ``logdet_YY`` its
    log-determinant; ``inv_diag_YY`` the diagonal of ``Sigma_YY^{-1}``;
    ``s`` the diagonal of ``Sigma_YY``; ``c`` the diagonal of
    ``signal_cov`` (so ``s = c + sigma2``).
    """

    H: np.ndarray
    sigma2: float
    Sigma_XX: np.ndarray
    Sigma_YY: np.ndarray
    signal_cov: np.ndarray = field(repr=False)
    chol_YY: np.ndarray = field(repr=False)
    logdet_YY: float = field(repr=False)
    inv_diag_YY: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @property
    def n(self) -> int:
        return self.H.shape[1]

    def snr_db(self) -> float:
        return snr_db(self.H, self.Sigma_XX, self.sigma2)


def build_model(H: np.ndarray, Sigma_XX: np.ndarray, sigma2: float) -> MeasurementModel:
    """Assemble and validate a :class:`MeasurementModel`."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    Sigma_XX = np.atleast_2d(np.asarray(Sigma_XX, dtype=float))
    sigma2 = float(sigma2)
    m, n = H.shape
    if Sigma_XX.shape != (n, n):
        raise ValueError(
            f"Sigma_XX shape {Sigma_XX.shape} does not match H columns ({n})"
        )
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if not np.allclose(Sigma_XX, Sigma_XX.T, atol=1e-10):
        raise ValueError("Sigma_XX must be symmetric")
    eigmin = float(np.linalg.eigvalsh(Sigma_XX)[0])
    if eigmin < -PSD_TOL:
        raise ValueError(f"Sigma_XX is not PSD (min eigenvalue {eigmin:.3e})")

    signal_cov = H @ Sigma_XX @ H.T
    signal_cov = 0.5 * (signal_cov + signal_cov.T)  # enforce exact symmetry
    Sigma_YY = signal_cov + sigma2 * np.eye(m)
    chol_YY = np.linalg.cholesky(Sigma_YY)
    logdet_YY = 2.0 * float(np.sum(np.log(np.diag(chol_YY))))
    inv_YY = scipy.linalg.cho_solve((chol_YY, True), np.eye(m))
    return MeasurementModel(
        H=H,
        sigma2=sigma2,
        Sigma_XX=Sigma_XX,
        Sigma_YY=Sigma_YY,
        signal_cov=signal_cov,
        chol_YY=chol_YY,
        logdet_YY=logdet_YY,
        inv_diag_YY=np.diag(inv_YY).copy(),
        s=np.diag(Sigma_YY).copy(),
        c=np.diag(signal_cov).copy(),
    )


def as_profile(model: MeasurementModel, v) -> np.ndarray:
    """Validate an attack profile: nonnegative, length m."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (model.m,):
        raise ValueError(f"profile length {v.size} does not match m={model.m}")
    if np.any(v < 0):
        raise ValueError("attack variances must be nonnegative")
    return v


def attacked_cov(model: MeasurementModel, v) -> np.ndarray:
    """Covariance of the compromised measurements, Sigma_YY + diag(v)."""
    v = as_profile(model, v)
    out = model.Sigma_YY.copy()
    out[np.diag_indices_from(out)] += v
    return out
