"""Stability, Lyapunov equations, Gramians and the H-infinity norm."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import LyapunovSolveError, UnstableSystemError
from .model import QuadratureModel

# Above this state dimension the Kronecker system gets too large to form.
KRONECKER_MAX_DIM = 32


def is_hurwitz(A) -> tuple[bool, float]:
    """Stability test with a relative margin.

    Returns:
        tuple[bool, float]: ``(stable, spectral_abscissa)``; ``stable`` requires
        the abscissa to be below ``-1e-12 * (1 + ||A||)``
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    eigs = np.linalg.eigvals(A)
    if not np.all(np.isfinite(eigs)):
        raise np.linalg.LinAlgError("eigenvalue computation did not converge")
    abscissa = float(eigs.real.max())
    margin = 1e-12 * (1.0 + np.linalg.norm(A, 2))
    return bool(abscissa < -margin), abscissa


def lyapunov_residual(A, X, W) -> float:
    return float(np.linalg.norm(A @ X + X @ A.T + W))


def solve_lyapunov(A, W, tol: float | None = None) -> np.ndarray:
    """Solve ``A X + X A^T + W = 0`` for Hurwitz ``A`` and symmetric ``W``.

    Small problems are solved as the dense Kronecker system
    ``(I (x) A + A (x) I) vec(X) = -vec(W)``; larger ones use scipy's
    Bartels-Stewart solver.  The residual is verified in both cases.

    Raises:
        UnstableSystemError: ``A`` is not Hurwitz
        LyapunovSolveError: the residual exceeds ``tol``, which defaults to
            ``1e-9 * (1 + ||W|| + ||A|| ||X||)``
    """
    A = np.asarray(A, dtype=float)
    W = np.asarray(W, dtype=float)
    N = A.shape[0]
    if W.shape != (N, N):
        raise ValueError(f"W must be {N}x{N}, got {W.shape}")
    stable, abscissa = is_hurwitz(A)
    if not stable:
        raise UnstableSystemError(f"A is not Hurwitz (spectral abscissa {abscissa:.6g})")
    W = 0.5 * (W + W.T)
    if N <= KRONECKER_MAX_DIM:
        I = np.eye(N)
        L = np.kron(I, A) + np.kron(A, I)
        X = np.linalg.solve(L, -W.reshape(-1, order="F")).reshape((N, N), order="F")
    else:
        X = scipy.linalg.solve_continuous_lyapunov(A, -W)
    X = 0.5 * (X + X.T)
    res = lyapunov_residual(A, X, W)
    if tol is None:
        tol = 1e-9 * (1.0 + np.linalg.norm(W) + np.linalg.norm(A) * np.linalg.norm(X))
    if res > tol:
        raise LyapunovSolveError(f"Lyapunov residual {res:.3g} exceeds {tol:.3g}")
    return X


@dataclass(frozen=True)
class GramianPair:
    P: np.ndarray
    Q: np.ndarray
    residual_P: float
    residual_Q: float


def gramians(g: QuadratureModel) -> GramianPair:
    """Controllability and observability Gramians of a stable model."""
    P = solve_lyapunov(g.A, g.B @ g.B.T)
    Q = solve_lyapunov(g.A.T, g.C.T @ g.C)
    return GramianPair(
        P,
        Q,
        lyapunov_residual(g.A, P, g.B @ g.B.T),
        lyapunov_residual(g.A.T, Q, g.C.T @ g.C),
    )


def freq_response(g: QuadratureModel, omegas) -> np.ndarray:
    """Transfer matrix ``C (i w I - A)^-1 B + D`` for each frequency, stacked."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    N = g.A.shape[0]
    M = 1j * omegas[:, None, None] * np.eye(N) - g.A
    X = np.linalg.solve(M, np.broadcast_to(g.B.astype(complex), (len(omegas),) + g.B.shape))
    return g.C @ X + g.D


def sigma_max(g: QuadratureModel, omegas) -> np.ndarray:
    """Largest singular value of the transfer matrix at each frequency."""
    return np.linalg.svd(freq_response(g, omegas), compute_uv=False)[..., 0]


def _hamiltonian(g: QuadratureModel, gam: float) -> np.ndarray:
    A, B, C, D = g.A, g.B, g.C, g.D
    Rm = D.T @ D - gam**2 * np.eye(D.shape[1])
    Sm = D @ D.T - gam**2 * np.eye(D.shape[0])
    Ri = np.linalg.inv(Rm)
    Si = np.linalg.inv(Sm)
    top = np.hstack([A - B @ Ri @ D.T @ C, -gam * B @ Ri @ B.T])
    bottom = np.hstack([gam * C.T @ Si @ C, -A.T + C.T @ D @ Ri @ B.T])
    return np.vstack([top, bottom])


def _axis_frequencies(g: QuadratureModel, gam: float) -> np.ndarray:
    """Frequencies of eigenvalues of the Hamiltonian at (or near) the imaginary axis."""
    eigs = np.linalg.eigvals(_hamiltonian(g, gam))
    near = np.abs(eigs.real) <= 1e-6 * np.maximum(1.0, np.abs(eigs))
    return np.unique(np.abs(eigs[near].imag))


def hinf_norm(g: QuadratureModel, tol: float = 1e-6, max_iter: int = 200) -> float:
    """``sup_w ||C (i w - A)^-1 B + D||_2`` by bisection on Hamiltonian eigenvalues.

    Every lower bound is certified by a direct evaluation of the transfer
    matrix, so a missed imaginary eigenvalue can only tighten the upper
    bound, never inflate the result.  A coarse log-spaced frequency sweep
    seeds the lower bound.

    Args:
        g: stable quadrature model
        tol: relative width of the final bracket

    Raises:
        UnstableSystemError: ``A`` is not Hurwitz
    """
    stable, abscissa = is_hurwitz(g.A)
    if not stable:
        raise UnstableSystemError(f"A is not Hurwitz (spectral abscissa {abscissa:.6g})")
    d_norm = float(np.linalg.norm(g.D, 2)) if g.D.size else 0.0
    b_norm = float(np.linalg.norm(g.B, 2))
    c_norm = float(np.linalg.norm(g.C, 2)) if g.C.size else 0.0
    if b_norm == 0.0 or c_norm == 0.0:
        return d_norm

    eig_mag = np.abs(np.linalg.eigvals(g.A))
    w_lo = max(eig_mag.min(), 1e-12) * 1e-3
    w_hi = max(eig_mag.max(), 1e-12) * 1e3
    sweep = np.concatenate([[0.0], np.geomspace(w_lo, w_hi, 400), np.abs(np.linalg.eigvals(g.A).imag)])
    vals = sigma_max(g, sweep)
    lo = max(d_norm, float(vals.max()))
    if lo == 0.0:
        return 0.0
    hi = lo + 2.0 * c_norm * b_norm / abs(abscissa)

    def certify(gam):
        freqs = _axis_frequencies(g, gam)
        if freqs.size == 0:
            return None
        pts = np.concatenate([freqs, 0.5 * (freqs[1:] + freqs[:-1])])
        return float(sigma_max(g, pts).max())

    # Non-normal A can push the norm past the initial bracket.
    for _ in range(64):
        found = certify(hi)
        if found is None or found < hi:
            break
        lo = max(lo, found)
        hi *= 2.0

    # Floor for error systems whose norm cancels to rounding level.
    atol = 1e-13 * c_norm * b_norm / abs(abscissa)
    for _ in range(max_iter):
        if hi - lo <= tol * lo + atol:
            break
        gam = 0.5 * (lo + hi)
        found = certify(gam)
        if found is not None:
            lo = max(lo, found)
        if found is None or found < gam * (1.0 - 1e-12):
            hi = max(gam, lo)
    return 0.5 * (lo + hi)
