"""Quasi-balanced realizations and their truncation.

A model is quasi-balanceable when a single symplectic state transform puts
both Gramians in the paired-diagonal form ``diag(s_1 I_2, ..., s_n I_2)``.
The construction here first brings ``P`` to Williamson form with ``T0``,
then diagonalizes ``T0^-T Q T0^-1`` inside each group of equal symplectic
eigenvalues of ``P`` with an orthogonal symplectic (hence ``Sigma_P``
preserving) transform.  Pairs are finally sorted by the Hankel-like values
``h_j = sqrt(sigma_P,j * sigma_Q,j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import NotQuasiBalanceableError, UnstableSystemError
from .gramians import GramianPair, gramians, hinf_norm, is_hurwitz
from .model import QuadratureModel, RealizabilityReport, check_realizability, symplectic_form
from .symplectic import (
    SymplecticSpectrum,
    SymplecticTransform,
    pair_permutation,
    unitary_symplectic_diagonalize,
    williamson,
)

GROUP_RTOL = 1e-6
BLOCK_RTOL = 1e-7
COMMUTATOR_RTOL = 1e-8


def commutator_norm(P, Q) -> float:
    """``||[J_n P, Q J_n]||_F / (||P|| ||Q||)``, or 0 when either Gramian vanishes."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    J = symplectic_form(P.shape[0] // 2)
    scale = np.linalg.norm(P, 2) * np.linalg.norm(Q, 2)
    if scale == 0.0:
        return 0.0
    JP, QJ = J @ P, Q @ J
    return float(np.linalg.norm(JP @ QJ - QJ @ JP) / scale)


def commutator_condition(P, Q, tol: float = COMMUTATOR_RTOL) -> bool:
    """True when ``[J_n P, Q J_n]`` vanishes relative to ``||P|| ||Q||``."""
    return commutator_norm(P, Q) <= tol


def group_pairs(sigma, rtol: float = GROUP_RTOL) -> list[list[int]]:
    """Group indices of (descending) values that agree to relative ``rtol``.

    Adjacent values are chained, so the grouping of a sorted list is a
    partition into contiguous runs.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0:
        return []
    groups = [[0]]
    for j in range(1, len(sigma)):
        prev = sigma[groups[-1][-1]]
        if abs(sigma[j] - prev) <= rtol * max(abs(prev), abs(sigma[j]), 1e-300):
            groups[-1].append(j)
        else:
            groups.append([j])
    return groups


def block_form_violations(Qt, Sigma_P, tol: float = BLOCK_RTOL, group_rtol: float = GROUP_RTOL):
    """List the ``(j, k, deviation)`` blocks of ``Qt`` that break the required form.

    Diagonal blocks must be scalar multiples of ``I_2``.  Off-diagonal blocks
    must have the rotation form ``[[a, b], [-b, a]]`` when the paired values
    of ``Sigma_P`` agree and vanish otherwise.  Deviations are measured
    relative to ``||Qt||``.
    """
    Qt = np.asarray(Qt, dtype=float)
    sigma = np.asarray(getattr(Sigma_P, "values", Sigma_P), dtype=float)
    n = Qt.shape[0] // 2
    if len(sigma) != n:
        raise ValueError(f"Sigma_P has {len(sigma)} values for {n} mode pairs")
    scale = max(np.linalg.norm(Qt, 2), 1e-300)
    group_of = np.empty(n, dtype=int)
    for gi, members in enumerate(group_pairs(sigma, group_rtol)):
        group_of[members] = gi
    bad = []
    if np.linalg.norm(Qt - Qt.T) / scale > tol:
        bad.append((-1, -1, float(np.linalg.norm(Qt - Qt.T) / scale)))
    for j in range(n):
        for k in range(n):
            blk = Qt[2 * j : 2 * j + 2, 2 * k : 2 * k + 2]
            if j == k:
                dev = max(abs(blk[0, 0] - blk[1, 1]), abs(blk[0, 1]), abs(blk[1, 0]))
            elif group_of[j] == group_of[k]:
                dev = max(abs(blk[0, 0] - blk[1, 1]), abs(blk[0, 1] + blk[1, 0]))
            else:
                dev = float(np.abs(blk).max())
            if dev / scale > tol:
                bad.append((j, k, float(dev / scale)))
    return bad


def block_form_check(Qt, Sigma_P, tol: float = BLOCK_RTOL, group_rtol: float = GROUP_RTOL) -> bool:
    """True when ``Qt`` has the block form compatible with ``Sigma_P``."""
    return not block_form_violations(Qt, Sigma_P, tol, group_rtol)


@dataclass(frozen=True)
class QuasiBalanceDiagnostics:
    commutator_norm: float
    commutator_ok: bool
    block_form_ok: bool
    block_violations: tuple
    sigma_P: SymplecticSpectrum | None
    start: str

    @property
    def agree(self) -> bool:
        return self.commutator_ok == self.block_form_ok


def _choose_start(G: GramianPair, start: str) -> str:
    if start not in ("auto", "P", "Q"):
        raise ValueError(f"start must be 'auto', 'P' or 'Q', got {start!r}")
    if start != "auto":
        return start
    wp = np.linalg.eigvalsh(G.P)
    if wp.min() > 1e-10 * max(1.0, wp.max()):
        return "P"
    wq = np.linalg.eigvalsh(G.Q)
    if wq.min() > 1e-10 * max(1.0, wq.max()):
        return "Q"
    raise NotQuasiBalanceableError("neither Gramian is positive definite")


def _first_step(G: GramianPair, start: str):
    """Williamson step on the definite Gramian.

    Returns ``(T0, sigma, other)`` where ``T0`` puts the definite Gramian in
    paired-diagonal form ``sigma`` and ``other`` is the transformed
    remaining Gramian.
    """
    if start == "P":
        T0, sigma = williamson(G.P)
        T0inv = T0.inverse()
        other = T0inv.T @ G.Q @ T0inv
        return T0.T, sigma, 0.5 * (other + other.T)
    # T^-T Q T^-1 = S Q S^T with T = S^-T, so P becomes S^-T P S^-1.
    S, sigma = williamson(G.Q)
    Sinv = S.inverse()
    T0 = Sinv.T
    other = T0 @ G.P @ T0.T
    return T0, sigma, 0.5 * (other + other.T)


def quasi_balanceability(P, Q, tol: float = BLOCK_RTOL, start: str = "auto"):
    """Both quasi-balanceability criteria evaluated on a Gramian pair.

    Returns:
        tuple[bool, QuasiBalanceDiagnostics]: the block-form verdict and the
        diagnostics, including the commutator test and whether they agree
    """
    G = GramianPair(np.asarray(P, dtype=float), np.asarray(Q, dtype=float), 0.0, 0.0)
    start = _choose_start(G, start)
    c_norm = commutator_norm(G.P, G.Q)
    _, sigma, other = _first_step(G, start)
    bad = block_form_violations(other, sigma, tol)
    diag = QuasiBalanceDiagnostics(
        commutator_norm=c_norm,
        commutator_ok=c_norm <= max(COMMUTATOR_RTOL, tol),
        block_form_ok=not bad,
        block_violations=tuple(bad),
        sigma_P=sigma if start == "P" else None,
        start=start,
    )
    return diag.block_form_ok, diag


def is_quasi_balanceable(
    g: QuadratureModel, tol: float = BLOCK_RTOL, start: str = "auto"
) -> tuple[bool, QuasiBalanceDiagnostics]:
    """Decide quasi-balanceability by the block-form test and the commutator test.

    The verdict is the block-form test after a Williamson step on ``P``
    (or on ``Q`` for the dual start).  The commutator test is reported
    alongside; ``diagnostics.agree`` tells whether the two coincide.

    Raises:
        UnstableSystemError: ``A`` is not Hurwitz
        NotQuasiBalanceableError: neither Gramian is positive definite
    """
    G = gramians(g)
    return quasi_balanceability(G.P, G.Q, tol, start)


@dataclass(frozen=True)
class QuasiBalancedRealization:
    transform: SymplecticTransform
    model: QuadratureModel
    sigma_P: SymplecticSpectrum
    sigma_Q: SymplecticSpectrum
    hankel_values: np.ndarray
    residual_P: float
    residual_Q: float
    realizability: RealizabilityReport = field(repr=False)

    @property
    def n(self) -> int:
        return self.model.n


def quasi_balance(
    g: QuadratureModel, tol: float = BLOCK_RTOL, group_rtol: float = GROUP_RTOL, start: str = "auto"
) -> QuasiBalancedRealization:
    """Symplectic transform to a quasi-balanced realization.

    Args:
        g: stable quadrature model
        tol: relative tolerance of the block-form test
        group_rtol: relative tolerance for treating two symplectic
            eigenvalues of the first Gramian as equal
        start: ``"P"`` to take the Williamson step on the controllability
            Gramian, ``"Q"`` for the observability Gramian (allows a
            singular ``P``), ``"auto"`` for whichever is definite, ``P`` first

    Returns:
        QuasiBalancedRealization: with ``residual_P`` and ``residual_Q`` the
        relative distances of the transformed Gramians from their paired
        diagonal forms

    Raises:
        NotQuasiBalanceableError: the block form fails; the message names
            the offending blocks
    """
    G = gramians(g)
    start = _choose_start(G, start)
    T0, sigma, other = _first_step(G, start)
    bad = block_form_violations(other, sigma, tol, group_rtol)
    if bad:
        where = ", ".join(f"({j + 1},{k + 1}): {dev:.2e}" for j, k, dev in bad[:6])
        raise NotQuasiBalanceableError(f"block form violated at pair blocks {where}")

    # Within each group the first Gramian is a multiple of I, so any
    # orthogonal symplectic transform on that group preserves it.
    n = g.n
    Tt = np.zeros((2 * n, 2 * n))
    for members in group_pairs(sigma.values, group_rtol):
        idx = np.concatenate([[2 * j, 2 * j + 1] for j in members])
        sub = other[np.ix_(idx, idx)]
        U, _ = unitary_symplectic_diagonalize(sub, tol=max(tol, 1e-8) * 10)
        Tt[np.ix_(idx, idx)] = U.T
    # Tt is orthogonal, so Tt X Tt^T = Tt^-T X Tt^-1 for either start.
    T = Tt @ T0

    P_b = T @ G.P @ T.T
    Tinv = np.linalg.inv(T)
    Q_b = Tinv.T @ G.Q @ Tinv
    sP = 0.5 * (P_b[0::2, 0::2].diagonal() + P_b[1::2, 1::2].diagonal())
    sQ = 0.5 * (Q_b[0::2, 0::2].diagonal() + Q_b[1::2, 1::2].diagonal())
    h = np.sqrt(np.clip(sP, 0, None) * np.clip(sQ, 0, None))
    order = sorted(range(n), key=lambda j: (-round(h[j], 12), -sP[j], j))
    Pi = pair_permutation(order)
    T = Pi @ T
    sP, sQ, h = sP[order], sQ[order], h[order]
    P_b = Pi @ P_b @ Pi.T
    Q_b = Pi @ Q_b @ Pi.T
    res_P = float(np.linalg.norm(P_b - np.diag(np.repeat(sP, 2))) / max(np.linalg.norm(P_b), 1e-300))
    res_Q = float(np.linalg.norm(Q_b - np.diag(np.repeat(sQ, 2))) / max(np.linalg.norm(Q_b), 1e-300))

    transform = SymplecticTransform(T)
    model = g.transform(transform)
    return QuasiBalancedRealization(
        transform=transform,
        model=model,
        sigma_P=SymplecticSpectrum(sP),
        sigma_Q=SymplecticSpectrum(sQ),
        hankel_values=h,
        residual_P=res_P,
        residual_Q=res_Q,
        realizability=check_realizability(model),
    )


def error_system(full: QuadratureModel, reduced: QuadratureModel) -> QuadratureModel:
    """Block-diagonal realization of ``G_full - G_reduced`` (driven by the same input)."""
    A = scipy.linalg.block_diag(full.A, reduced.A)
    B = np.vstack([full.B, reduced.B])
    C = np.hstack([full.C, -reduced.C])
    return QuadratureModel(A, B, C, full.D - reduced.D)


@dataclass(frozen=True)
class ReducedModel:
    model: QuadratureModel
    retained_pairs: tuple
    discarded_hankel_values: np.ndarray
    error_hinf: float | None
    realizability: RealizabilityReport = field(repr=False)

    @property
    def r(self) -> int:
        return self.model.n


def truncate(qbr: QuasiBalancedRealization, r: int, hinf_tol: float = 1e-6) -> ReducedModel:
    """Keep the ``r`` pairs with the largest Hankel-like values.

    ``error_hinf`` is the H-infinity norm of the full minus the reduced
    model; it is ``None`` when the reduced state matrix is not Hurwitz.
    """
    n = qbr.n
    if not 1 <= r <= n:
        raise ValueError(f"r must be in 1..{n}, got {r}")
    reduced = qbr.model.truncate(r)
    stable, _ = is_hurwitz(reduced.A)
    err = None
    if stable:
        try:
            err = hinf_norm(error_system(qbr.model, reduced), tol=hinf_tol)
        except UnstableSystemError:
            err = None
    return ReducedModel(
        model=reduced,
        retained_pairs=tuple(range(r)),
        discarded_hankel_values=np.asarray(qbr.hankel_values[r:]),
        error_hinf=err,
        realizability=check_realizability(reduced),
    )
