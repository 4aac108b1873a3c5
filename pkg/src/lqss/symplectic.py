"""Symplectic matrices, symplectic spectra and structured diagonalizations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .model import complexify, realify, symplectic_form


def symplectic_residual(T) -> float:
    """``||T J_n T^T - J_n||_F``."""
    T = np.asarray(T, dtype=float)
    J = symplectic_form(T.shape[0] // 2)
    return float(np.linalg.norm(T @ J @ T.T - J))


@dataclass(frozen=True)
class SymplecticTransform:
    """A real symplectic matrix together with its certified residual.

    Construction fails when ``||T J T^T - J||`` exceeds
    ``1e-8 * max(1, ||T||^2)``.
    """

    T: np.ndarray
    residual: float = field(init=False)

    def __post_init__(self):
        T = np.array(self.T, dtype=float)
        if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] % 2:
            raise ValueError(f"symplectic matrices are square with even size, got {T.shape}")
        res = symplectic_residual(T)
        bound = 1e-8 * max(1.0, np.linalg.norm(T, 2) ** 2)
        if res > bound:
            raise ValueError(f"matrix is not symplectic: residual {res:.3g} > {bound:.3g}")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "residual", res)

    @property
    def n(self) -> int:
        return self.T.shape[0] // 2

    def inverse(self) -> np.ndarray:
        """``T^-1 = -J T^T J``, exact for symplectic ``T``."""
        J = symplectic_form(self.n)
        return -J @ self.T.T @ J

    def __matmul__(self, other):
        other = other.T if isinstance(other, SymplecticTransform) else other
        return SymplecticTransform(self.T @ other)


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Symplectic eigenvalues sorted in descending order."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def paired(self) -> np.ndarray:
        """The diagonal matrix ``diag(s_1 I_2, ..., s_n I_2)``."""
        return np.diag(np.repeat(self.values, 2))


def is_symplectic(T, tol: float = 1e-8) -> bool:
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError(f"T must be square, got {T.shape}")
    if T.shape[0] % 2:
        raise ValueError("symplectic matrices have even dimension")
    return symplectic_residual(T) <= tol


def _check_symmetric(X, tol):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] % 2:
        raise ValueError(f"expected a square matrix of even size, got {X.shape}")
    if np.linalg.norm(X - X.T) > tol * (1.0 + np.linalg.norm(X)):
        raise ValueError("matrix is not symmetric")
    return 0.5 * (X + X.T)


def _sqrt_psd(X):
    w, V = np.linalg.eigh(X)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def symplectic_eigenvalues(X, tol: float = 1e-8) -> SymplecticSpectrum:
    """The ``n`` largest eigenvalues of ``i J_n X`` for symmetric PSD ``X``.

    Computed as the nonnegative eigenvalues of the Hermitian matrix
    ``i X^{1/2} J_n X^{1/2}``, which has the same spectrum.
    """
    X = _check_symmetric(X, tol)
    n = X.shape[0] // 2
    Xh = _sqrt_psd(X)
    w = np.linalg.eigvalsh(1j * (Xh @ symplectic_form(n) @ Xh))
    return SymplecticSpectrum(np.clip(w[::-1][:n], 0.0, None))


def pair_permutation(order) -> np.ndarray:
    """Permutation moving pair ``order[k]`` into position ``k`` (always symplectic)."""
    order = np.asarray(order, dtype=int)
    idx = np.concatenate([[2 * j, 2 * j + 1] for j in order]) if len(order) else []
    return np.eye(2 * len(order))[idx]


def williamson(X, tol: float = 1e-8) -> tuple[SymplecticTransform, SymplecticSpectrum]:
    """Symplectic ``T`` with ``T X T^T = diag(s_1 I_2, ..., s_n I_2)``.

    ``W = X^{-1/2} J X^{-1/2}`` is antisymmetric; its real Schur form is
    block diagonal with blocks ``[[0, d], [-d, 0]]`` and ``d = 1/s``.  With
    ``W = O D O^T`` the transform is ``T = D'^{-1/2} O^T X^{-1/2}`` where
    ``D'`` repeats each ``d`` twice.  Pairs are returned in descending
    order of ``s``.

    Raises:
        ValueError: ``X`` is not symmetric positive definite
    """
    X = _check_symmetric(X, tol)
    n = X.shape[0] // 2
    w, V = np.linalg.eigh(X)
    if w.min() <= tol * max(1.0, w.max()):
        raise ValueError("Williamson decomposition requires a positive definite matrix")
    X_mhalf = (V / np.sqrt(w)) @ V.T
    W = X_mhalf @ symplectic_form(n) @ X_mhalf
    W = 0.5 * (W - W.T)
    S, O = scipy.linalg.schur(W, output="real")
    d = np.empty(n)
    for j in range(n):
        a, b = 2 * j, 2 * j + 1
        if S[a, b] < 0:
            O[:, [a, b]] = O[:, [b, a]]
        d[j] = 0.5 * (abs(S[a, b]) + abs(S[b, a]))
    T = (O / np.sqrt(np.repeat(d, 2))).T @ X_mhalf
    sigma = 1.0 / d
    # Stable sort; ties keep the lexicographic order of each block's first row.
    keys = [(-s, tuple(np.round(T[2 * j], 12))) for j, s in enumerate(np.round(sigma, 12))]
    order = sorted(range(n), key=lambda j: keys[j])
    T = pair_permutation(order) @ T
    return SymplecticTransform(T), SymplecticSpectrum(sigma[order])


def skew_hamiltonian_residual(M) -> float:
    """``||M^T J_n - J_n M||_F``."""
    M = np.asarray(M, dtype=float)
    J = symplectic_form(M.shape[0] // 2)
    return float(np.linalg.norm(M.T @ J - J @ M))


def has_passive_block_form(M, tol: float = 1e-8) -> bool:
    """Structural test: symmetric with scalar diagonal blocks and rotation-form off-diagonal blocks."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    bound = tol * (1.0 + np.linalg.norm(M))
    if np.linalg.norm(M - M.T) > bound:
        return False
    for j in range(n):
        for k in range(n):
            blk = M[2 * j : 2 * j + 2, 2 * k : 2 * k + 2]
            if j == k:
                if abs(blk[0, 0] - blk[1, 1]) > bound or abs(blk[0, 1]) > bound or abs(blk[1, 0]) > bound:
                    return False
            elif abs(blk[0, 0] - blk[1, 1]) > bound or abs(blk[0, 1] + blk[1, 0]) > bound:
                return False
    return True


def is_skew_hamiltonian(M, tol: float = 1e-8) -> bool:
    """``M^T J_n = J_n M`` within ``tol * (1 + ||M||)``.

    For symmetric ``M`` this is equivalent to the paired block form checked
    by :func:`has_passive_block_form`; the two verdicts are compared and a
    disagreement raises, since it can only come from a bug or a tolerance
    at the edge of the structure.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise ValueError(f"expected a square matrix of even size, got {M.shape}")
    scale = 1.0 + np.linalg.norm(M)
    verdict = skew_hamiltonian_residual(M) <= tol * scale
    if np.linalg.norm(M - M.T) <= 1e-12 * scale:
        structural = has_passive_block_form(M, tol)
        # The entrywise test is looser than the Frobenius one by at most a factor 2n.
        loose = skew_hamiltonian_residual(M) <= 2 * M.shape[0] * tol * scale
        if structural != verdict and not (structural and loose):
            raise AssertionError("skew-Hamiltonian residual and block-form test disagree")
    return bool(verdict)


def unitary_symplectic_diagonalize(Qs, tol: float = 1e-8) -> tuple[SymplecticTransform, SymplecticSpectrum]:
    """Orthogonal symplectic ``T`` with ``T^-T Qs T^-1 = diag(s_1 I_2, ..., s_n I_2)``.

    A symmetric skew-Hamiltonian matrix is the real form of a Hermitian
    ``n x n`` matrix ``H``.  Diagonalizing ``H = U L U^H`` gives
    ``T = realify(U^H)``, which is orthogonal and symplectic.  ``Qs`` may be
    singular; values are returned in descending order.

    Raises:
        ValueError: ``Qs`` is not symmetric skew-Hamiltonian within ``tol``
    """
    Qs = _check_symmetric(Qs, tol)
    if skew_hamiltonian_residual(Qs) > tol * (1.0 + np.linalg.norm(Qs)):
        raise ValueError("matrix is not skew-Hamiltonian")
    H = complexify(Qs)
    H = 0.5 * (H + H.conj().T)
    lam, U = np.linalg.eigh(H)
    lam, U = lam[::-1], U[:, ::-1]
    T = realify(U.conj().T)
    return SymplecticTransform(T), SymplecticSpectrum(lam)


def random_symplectic(rng: np.random.Generator, n: int, squeeze: float = 1.0) -> np.ndarray:
    """Random symplectic matrix ``O_1 Z O_2`` with single-mode squeezing ``|r| <= squeeze``."""

    def orthosymplectic():
        Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        U, _ = np.linalg.qr(Z)
        return realify(U)

    r = rng.uniform(-squeeze, squeeze, size=n)
    Z = np.diag(np.exp(np.column_stack([r, -r]).ravel()))
    return orthosymplectic() @ Z @ orthosymplectic()
