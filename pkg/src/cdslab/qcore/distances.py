"""Trace norm, fidelity, and the ensemble square-root-fidelity bound."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .states import EIG_CLAMP, DensityMatrix

def _as_matrix(state) -> np.ndarray:
    if isinstance(state, DensityMatrix):
        return state.entries
    return np.asarray(state, dtype=complex)

def psd_sqrt(mat: np.ndarray) -> np.ndarray:
    """Hermitian square root with tiny negative eigenvalues clamped to zero.

    Eigenvalues below ``EIG_CLAMP`` (-1e-12) raise, since the input is then
    not a numerical density matrix but a genuinely indefinite one.
    """
    vals, vecs = np.linalg.eigh((mat + mat.conj().T) / 2)
    if float(vals.min(initial=0.0)) < EIG_CLAMP * max(1.0, float(np.abs(vals).max(initial=1.0))):
        # scale-aware guard: allow relative rounding dirt only
        if float(vals.min()) < -1e-7:
            raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {vals.min():.3e})")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T

def trace_norm(mat) -> float:
    """Sum of singular values (Schatten 1-norm).

    Accepts a raw matrix or a DensityMatrix; always finite for finite input.
    """
    m = _as_matrix(mat)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"trace_norm expects a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("trace_norm input contains non-finite entries")
    return float(np.linalg.svd(m, compute_uv=False).sum())

def trace_distance(rho, sigma) -> float:
    """``||rho - sigma||_1`` (no 1/2 factor; halve for the metric form)."""
    return trace_norm(_as_matrix(rho) - _as_matrix(sigma))

def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``.

    Computed in the symmetric form ``||sqrt(rho) sqrt(sigma)||_1^2`` via one
    SVD, which is algebraically identical and numerically stabler.  The
    result is clipped to [0, 1] to absorb rounding at the endpoints.
    """
    a = psd_sqrt(_as_matrix(rho))
    b = psd_sqrt(_as_matrix(sigma))
    root_sum = float(np.linalg.svd(a @ b, compute_uv=False).sum())
    return float(np.clip(root_sum ** 2, 0.0, 1.0))

def sqrt_fidelity(rho, sigma) -> float:
    """``sqrt(F)``, the quantity the ensemble bound below is stated for."""
    return float(np.sqrt(fidelity(rho, sigma)))

def fuchs_van_de_graaf_gaps(rho, sigma) -> tuple[float, float]:
    """Slack of the two Fuchs-van de Graaf inequalities, each >= 0 up to rounding.

    Returns ``(half_dist - (1 - sqrt(F)), sqrt(1 - F) - half_dist)`` where
    ``half_dist = ||rho - sigma||_1 / 2``.
    """
    f = fidelity(rho, sigma)
    half = 0.5 * trace_distance(rho, sigma)
    return half - (1.0 - np.sqrt(f)), float(np.sqrt(max(0.0, 1.0 - f))) - half

def ensemble_sqrt_fidelity_check(
    ensemble: Sequence[tuple[float, object]],
    candidates: Sequence[object],
) -> tuple[float, float]:
    """Evaluate both sides of the ensemble square-root-fidelity bound.

    For an ensemble ``{(p_i, rho_i)}`` the best average root fidelity any
    single state sigma can achieve obeys

        max_sigma sum_i p_i sqrt(F(sigma, rho_i))
            <= sqrt( sum_ij p_i p_j sqrt(F(rho_i, rho_j)) ).

    Parameters
    ----------
    ensemble : sequence of (probability, state)
        Probabilities must be nonnegative and sum to 1 within 1e-9.
    candidates : sequence of states
        Trial sigmas; the left side is maximised over these only, so the
        returned pair certifies the inequality rather than the exact max.

    Returns
    -------
    (max_lhs, rhs) : tuple of float
    """
    probs = np.array([float(p) for p, _ in ensemble])
    if np.any(probs < -1e-12) or abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("ensemble probabilities must be nonnegative and sum to 1")
    states = [_as_matrix(r) for _, r in ensemble]
    if not candidates:
        raise ValueError("need at least one candidate state")
    max_lhs = max(
        float(sum(p * sqrt_fidelity(_as_matrix(sig), r) for p, r in zip(probs, states)))
        for sig in candidates
    )
    rhs_sq = 0.0
    for i, ri in enumerate(states):
        for j, rj in enumerate(states):
            rhs_sq += probs[i] * probs[j] * sqrt_fidelity(ri, rj)
    return max_lhs, float(np.sqrt(rhs_sq))
