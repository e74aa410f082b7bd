"""Monte-Carlo likelihood-ratio detection of random attacks.

Samples clean and attacked measurement vectors, evaluates joint and
per-measurement log-likelihood ratios, and estimates Type-I/Type-II
error trade-offs for threshold tests.  Thresholds are applied on the
log scale to avoid overflow.  Sampling uses the symmetric square root
of the covariance with an explicitly seeded generator, so every result
is reproducible byte for byte.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .model import MeasurementModel, as_profile, attacked_cov

__all__ = [
    "sample_observations",
    "llr_joint",
    "llr_local",
    "llr_samples",
    "error_curve",
    "roc_auc",
]


def _sym_sqrt(cov: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[0] <= 0:
        raise ValueError(
            f"covariance is not positive definite (min eigenvalue {eigvals[0]:.3e})"
        )
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T


def sample_observations(
    model: MeasurementModel, v, n_samples: int, seed: int, attacked: bool
) -> np.ndarray:
    """Draw measurement vectors, one per row, clean or attacked."""
    v = as_profile(model, v)
    n_samples = int(n_samples)
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    cov = attacked_cov(model, v) if attacked else model.Sigma_YY
    root = _sym_sqrt(cov)
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n_samples, model.m)) @ root


def llr_joint(model: MeasurementModel, v, y) -> float | np.ndarray:
    """Joint log-likelihood ratio, attacked over clean density.

    Accepts a single length-m vector or an (N, m) batch; returns a
    scalar or length-N array accordingly.
    """
    v = as_profile(model, v)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    Y = np.atleast_2d(y)
    if Y.shape[1] != model.m:
        raise ValueError(f"observations have {Y.shape[1]} columns, expected {model.m}")

    chol_a = np.linalg.cholesky(attacked_cov(model, v))
    logdet_a = 2.0 * float(np.sum(np.log(np.diag(chol_a))))
    w0 = scipy.linalg.solve_triangular(model.chol_YY, Y.T, lower=True)
    wa = scipy.linalg.solve_triangular(chol_a, Y.T, lower=True)
    quad0 = np.sum(w0 * w0, axis=0)
    quada = np.sum(wa * wa, axis=0)
    out = 0.5 * (quad0 - quada) + 0.5 * (model.logdet_YY - logdet_a)
    return float(out[0]) if single else out


def llr_local(model: MeasurementModel, i: int, v_i: float, y_i) -> float | np.ndarray:
    """Scalar log-likelihood ratio for measurement i alone."""
    i = int(i)
    if not 0 <= i < model.m:
        raise IndexError(f"measurement index {i} outside [0, {model.m})")
    v_i = float(v_i)
    if v_i < 0:
        raise ValueError(f"attack variance must be nonnegative, got {v_i}")
    s_i = model.s[i]
    y = np.asarray(y_i, dtype=float)
    out = 0.5 * y * y * (1.0 / s_i - 1.0 / (s_i + v_i)) + 0.5 * (
        math.log(s_i) - math.log(s_i + v_i)
    )
    return float(out) if out.ndim == 0 else out


def llr_samples(
    model: MeasurementModel, v, n_samples: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Joint LLR values for fresh clean and attacked sample batches.

    Child seeds derived from ``seed`` keep the two hypothesis draws
    independent yet reproducible from the one user-facing seed.
    """
    seed_null, seed_attacked = np.random.SeedSequence(seed).spawn(2)
    null = sample_observations(model, v, n_samples, seed_null, attacked=False)
    comp = sample_observations(model, v, n_samples, seed_attacked, attacked=True)
    return llr_joint(model, v, null), llr_joint(model, v, comp)


def error_curve(
    model: MeasurementModel,
    v,
    n_samples: int,
    seed: int,
    thresholds,
) -> list[tuple[float, float, float]]:
    """Empirical (tau, Type-I, Type-II) triples for the joint LRT.

    For each threshold tau > 0 the detector accuses when the joint LLR
    is at least log(tau).  Type-I error is estimated on clean samples,
    Type-II on attacked samples, ``n_samples`` of each.
    """
    thresholds = [float(t) for t in thresholds]
    if not thresholds:
        raise ValueError("thresholds must be a nonempty list")
    if any(t <= 0 for t in thresholds):
        raise ValueError("thresholds must be positive (they are ratio levels)")
    n_samples = int(n_samples)
    if n_samples < 1000:
        raise ValueError(f"need at least 1000 samples per hypothesis, got {n_samples}")

    llr_null, llr_attacked = llr_samples(model, v, n_samples, seed)
    curve = []
    for tau in thresholds:
        log_tau = math.log(tau)
        alpha_hat = float(np.mean(llr_null >= log_tau))
        beta_hat = float(np.mean(llr_attacked < log_tau))
        curve.append((tau, alpha_hat, beta_hat))
    return curve


def roc_auc(model: MeasurementModel, v, n_samples: int, seed: int) -> float:
    """Empirical detection AUC of the joint LRT (rank statistic).

    Probability that an attacked sample's LLR exceeds a clean sample's,
    ties counted half.
    """
    llr_null, llr_attacked = llr_samples(model, v, int(n_samples), seed)
    combined = np.concatenate([llr_null, llr_attacked])
    order = np.argsort(combined, kind="mergesort")
    ranks = np.empty_like(order, dtype=float)
    ranks[order] = np.arange(1, combined.size + 1)
    # midranks for ties
    sorted_vals = combined[order]
    k = 0
    while k < sorted_vals.size:
        j = k
        while j + 1 < sorted_vals.size and sorted_vals[j + 1] == sorted_vals[k]:
            j += 1
        if j > k:
            ranks[order[k : j + 1]] = 0.5 * (k + 1 + j + 1)
        k = j + 1
    n0 = llr_null.size
    n1 = llr_attacked.size
    rank_sum = float(np.sum(ranks[n0:]))
    return (rank_sum - n1 * (n1 + 1) / 2.0) / (n0 * n1)
